"""Equivalence of the two weak-solution flows, measured on a grid ladder.

The conservation-law state u and the value function v are evolved by two
different monotone schemes from matched initial data.  At each resolution we
measure how far u sits from the slope of v, and how far v sits from the
gauge-lifted running integral of u.  Both defects should shrink under
refinement; for linear advection the two discrete updates commute with the
discrete primitive exactly and the defects sit at round-off.
"""

from clhjlab import builtin_catalog, check_equivalence


def run(name, t_end=0.5, levels=(64, 128, 256)):
    spec = builtin_catalog(name)
    rep = check_equivalence(spec, t_end, list(levels))
    print(f"\n=== {name}, t_end = {t_end} ===")
    print(f"{'n':>6} {'dx':>12} {'L1 defect':>14} {'Linf defect':>14}")
    for lv in rep.levels:
        print(f"{lv.n_cells:6d} {lv.dx:12.4e} {lv.l1_defects[-1]:14.6e} "
              f"{lv.linf_defects[-1]:14.6e}")
    o1 = "n/a" if rep.order_l1 is None else f"{rep.order_l1:.2f}"
    o2 = "n/a" if rep.order_linf is None else f"{rep.order_linf:.2f}"
    print(f"fitted orders: L1 {o1}, Linf {o2};  verdict {rep.verdict}")


def main():
    run("linear-advection")   # exact commutation: round-off floor
    run("burgers")            # shocks: first-order convergence
    run("plateau-beta", levels=(64, 128, 256))  # degenerate diffusion


if __name__ == "__main__":
    main()
