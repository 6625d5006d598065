"""Forecast the viscous Burgers equation beyond its snapshot window.

Twenty snapshots of the closed-form solution on t in [0.3, 0.5] are
compressed to a handful of modes; each mode coefficient is regressed in time
by a Gaussian process; the field at t = 0.6 is then reconstructed and
compared against the exact solution and against the intrusive
Galerkin-projected baseline.
"""

import numpy as np

from mbrom import (
    BurgersConfig,
    assemble_operators,
    build,
    burgers_exact,
    burgers_snapshots,
    forecast,
    integrate,
    reconstruct,
    relative_error,
)

T_QUERY = 0.6

print(f"{'Re':>6} {'R':>3} {'t*':>8} {'err GPR':>10} {'err Galerkin':>13}")
for re in (1.0, 100.0, 300.0, 500.0):
    cfg = BurgersConfig(reynolds=re)
    snaps = burgers_snapshots(cfg, 0.3, 0.5, 20)

    # nonintrusive route: POD + per-mode GP regression
    model = build(snaps)
    fc = forecast(model, T_QUERY, force=T_QUERY > model.t_star)
    truth = burgers_exact(snaps.grid.coords[:, 0], T_QUERY, cfg)
    err_gpr = relative_error(fc.field, truth, snaps.grid)

    # intrusive baseline: project the PDE onto the same modes and integrate
    ops = assemble_operators(model.basis, snaps.mean, snaps.grid, re)
    dt = (snaps.times[1] - snaps.times[0]) / 100.0
    _, traj = integrate(
        ops, model.basis.coeffs[0], (0.3, T_QUERY), dt, np.array([T_QUERY])
    )
    err_gal = relative_error(
        reconstruct(model.basis, snaps.mean, traj[-1]), truth, snaps.grid
    )

    print(
        f"{re:6g} {model.basis.retained:3d} {model.t_star:8.4f} "
        f"{err_gpr:10.5f} {err_gal:13.5f}"
    )

print()
print("Low Reynolds numbers are captured by one or two modes and forecast")
print("almost exactly; near the steep front the subspace itself limits both")
print("routes, so the two errors stay comparable.")
