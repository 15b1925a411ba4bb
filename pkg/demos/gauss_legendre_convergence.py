"""Gauss-Legendre convergence for the parameter integral of lambda1.

The integral of lambda1(y) over [-1, 1] is approximated by n-point rules
and compared against a fine reference rule.  For the analytic coefficient
field the error decays like exp(-r n); for the Gevrey-3 field (whose
parameter dependence degenerates at y = -1) it follows exp(-r n^(1/3)).
Produces CSV tables and SVG plots next to this script.
"""

import pathlib

from gevrey_evp import emit_csv, emit_svg, fit_rate, gl_study, model_by_name

HERE = pathlib.Path(__file__).resolve().parent
MESH_M = 32  # raise to 128 to match a fine production run

studies = [
    ("gl-analytic", 40, "log-vs-n", range(3, 25)),
    ("gl-gevrey3", 123, "log-vs-cuberoot-n", range(3, 41)),
]

for name, n_star, transform, n_range in studies:
    model = model_by_name(name)
    records = gl_study(model, MESH_M, list(n_range), n_star)
    fit = fit_rate(records, transform)
    csv_path = HERE / f"gl_convergence_{name}.csv"
    svg_path = HERE / f"gl_convergence_{name}.svg"
    emit_csv(records, csv_path, ["n", "error"],
             metadata={"model": name, "m": MESH_M, "n_star": n_star})
    emit_svg(records, fit, svg_path, transform,
             title=f"{name}: quadrature error", ylabel="log rel. error")
    print(f"{name} (reference n* = {n_star}):")
    for n, err in records:
        if n in (3, 5, 8, 12, 16, 24, 32, 40):
            print(f"  n={n:3d}  relative error {err:.3e}")
    print(f"  fitted {transform}: slope {fit.slope:.3f}, r^2 {fit.r_squared:.4f}")
    print(f"  wrote {csv_path.name}, {svg_path.name}\n")
