"""How far past x0 the integrated densities need to go before they sit within
1e-6 of the constant-coefficient values (zero initial data, a1 = a2 = 1)."""

import numpy as np

from prolongation.conserve import GridFn, density_solve_constant, integrate_densities, transient_window

N = 3
g = GridFn.constant(1.0, 0.0, 20.0, 0.01)
Y = integrate_densities(g, g, N)
exact = [float(y.constant_value().to_complex().real) for y in density_solve_constant(N, 1, 1).Y]

print(f"declared window: x > {transient_window(g):.1f}")
for x in (5, 6, 7, 8, 9, 10, 11, 12):
    j = int(round(x / g.h))
    errs = [float(np.max(np.abs(Y[n][j:] - exact[n])) / abs(exact[n])) for n in range(N)]
    print(f"x >= {x:>2}: " + "  ".join(f"Y{n + 1} {e:.1e}" for n, e in enumerate(errs)))
