"""Richardson estimates of Z'(1) on the modular torus for growing cutoffs.

The spread should shrink with L; two eps grids are compared at each cutoff.
"""

import argparse
import warnings
from dataclasses import dataclass, field

from cuspdet import fuchsian, zeta
from cuspdet.errors import IncompleteCutoff


@dataclass
class Config:
    cutoffs: list = field(default_factory=lambda: [6.0, 8.0, 10.0])
    grids: list = field(default_factory=lambda: [(0.2, 0.1, 0.05), (0.16, 0.08, 0.04)])
    max_word: int = 14


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, nargs="+", dest="cutoffs")
    ap.add_argument("--max-word", type=int, default=Config.max_word)
    a = ap.parse_args()
    cfg = Config(max_word=a.max_word)
    if a.cutoffs:
        cfg.cutoffs = a.cutoffs
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteCutoff)
        full = fuchsian.enumerate_spectrum(fuchsian.builtin_group("modular_torus"), max(cfg.cutoffs), cfg.max_word)
    for L in sorted(cfg.cutoffs):
        sp = full.restrict(L)
        results = [zeta.zeta_prime_at_1(sp, g) for g in cfg.grids]
        cells = "  ".join(f"{r.value:10.5f} +- {r.abs_error:8.5f}" for r in results)
        agree = abs(results[0].value - results[1].value) <= results[0].abs_error + results[1].abs_error
        print(f"L={L:5.1f}  {cells}  grids_agree={agree}  {results[0].notes[2]}")


if __name__ == "__main__":
    main()
