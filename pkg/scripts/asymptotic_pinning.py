"""Large-s residuals of the closed-form factors against their expansions.

Prints, for each s, the residual of log F(s) against its leading terms, of
log Z_cusp(s) against Stirling (with and without the 1/(12(s-1/2)) term),
of log(det/Z) against the heat-coefficient expansion, and the gap between
log det and the local terms of zeta'(0; s(s-1)).
"""

import argparse
from dataclasses import dataclass, field

from cuspdet import acceptance, determinant, index


@dataclass
class Config:
    g: int = 1
    n: int = 1
    s_values: list = field(default_factory=lambda: [10.0, 20.0, 35.0, 50.0, 85.0, 200.0])


def rows(cfg: Config):
    st = index.SurfaceType(cfg.g, cfg.n)
    hc = index.heat_coefficients(st)
    for s in cfg.s_values:
        factor = determinant.closed_form_log_factor(st, s).value
        local = determinant.local_terms_zeta_prime(hc, s * (s - 1)).value
        as5 = acceptance.as5_residual(s)
        yield {
            "s": s,
            "as22": acceptance.as22_residual(s),
            "as5": as5,
            "as5_after_1/12h": as5 + 1 / (12 * (s - 0.5)),
            "as7": factor - determinant.asymptotic_log_det_minus_log_z(hc, s).value,
            "local_gap": factor + local,
        }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--g", type=int, default=1)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--s", type=float, nargs="+", dest="s_values")
    a = ap.parse_args()
    cfg = Config(a.g, a.n)
    if a.s_values:
        cfg.s_values = a.s_values
    cols = None
    for r in rows(cfg):
        if cols is None:
            cols = list(r)
            print("  ".join(f"{c:>15}" for c in cols))
        print("  ".join(f"{r[c]:>15.1f}" if c == "s" else f"{r[c]:>15.6e}" for c in cols))


if __name__ == "__main__":
    main()
