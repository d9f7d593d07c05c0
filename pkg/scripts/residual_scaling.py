"""Residual of the truncated density series against eta, for constant and varying coefficients."""

import warnings

import numpy as np

from prolongation.conserve import GridFn, residual_scaling_check

ETAS = [10, 20, 40, 80, 160, 320]

CASES = {
    "a1=a2=1": (GridFn.constant(1.0), GridFn.constant(1.0)),
    "a1=1+sin/2, a2=1/2+0.3cos": (
        GridFn.sample(lambda x: 1 + 0.5 * np.sin(x), 0, 20, 0.01),
        GridFn.sample(lambda x: 0.5 + 0.3 * np.cos(x), 0, 20, 0.01),
    ),
    "a2=0 (linear)": (GridFn.constant(1.0), GridFn.constant(0.0)),
}

warnings.simplefilter("ignore")
for label, (a1, a2) in CASES.items():
    print(label)
    for N in (1, 2, 3, 4):
        res = residual_scaling_check(a1, a2, N, ETAS)
        row = "  ".join(f"{r:.2e}" for r in res.residuals)
        slope = "exact 0" if res.exact_zero else f"{res.slope:+.3f}"
        print(f"  N={N}  slope {slope:>8}  expected {res.expected:+d}   R: {row}")
