"""Stability constant C against N for log-linear and linear sample counts."""
from _common import emit_plots, parser, run

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    res = run("fig3_conditioning.json", args, conditioning=True)
    for method in ("uniform", "method1", "method2"):
        for rule in ("nlogn", "linear:2"):
            means = res.means(method, rule, "C")
            Nmax = max(means)
            print(f"{method:8s} {rule:9s} mean C at N={Nmax}: {means[Nmax]:.3g}")
    for path in emit_plots(res.csv_path, "fig3"):
        print(path)
