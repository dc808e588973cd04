"""Error decay of Uniform, Method 1 and Method 2 for f1 on the annulus (d=2)."""
from _common import emit_plots, parser, run

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    res = run("fig1_error_decay.json", args)
    for N, e in sorted(res.means("method1").items()):
        print(f"N={N:4d}  method1 E_tau={e:.3e}  method2 E_tau={res.means('method2')[N]:.3e}")
    for path in emit_plots(res.csv_path, "fig1"):
        print(path)
