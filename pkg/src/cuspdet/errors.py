"""Exception and warning types shared across the package."""


class CuspdetError(Exception):
    """Base class for computation errors (CLI exit status 1)."""


class DomainError(CuspdetError, ValueError):
    pass


class PoleError(DomainError):
    """Argument sits on a pole of a meromorphic function."""


class AlphabetMismatch(CuspdetError, ValueError):
    pass


class MixedGenerators(CuspdetError, ValueError):
    pass


class UnknownGroup(CuspdetError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown group"


class NotHyperbolic(DomainError):
    pass


class EllipticFound(CuspdetError):
    """An elliptic element turned up, so the group is not torsion-free."""


class DivergedError(CuspdetError):
    pass


class IncompleteCutoff(UserWarning):
    """Long words still contribute short geodesics at the word-length limit."""


class EmptySpectrumWarning(UserWarning):
    pass
