"""Vanishing-viscosity ladder for the quadratic flux.

Each run adds an artificial eps u_xx term; the table shows the L1 distance
to the zero-viscosity entropy scheme on the same grid.  Before the shock
forms the gap scales linearly in eps; after shock formation the observed
exponent drops but stays within the expected band.
"""

from clhjlab import builtin_catalog, vanishing_viscosity_convergence


def run(t_end, label, n_cells=512):
    spec = builtin_catalog("burgers")
    rep = vanishing_viscosity_convergence(
        spec, [0.04, 0.02, 0.01], t_end, n_cells=n_cells)
    print(f"\n=== {label} (t_end = {t_end}) ===")
    for eps, d in zip(rep.epsilons, rep.distances):
        print(f"  eps = {eps:<6g} ||u_eps - u_0||_L1 = {d:.6e}")
    print(f"fit exponent: {rep.fit_exponent:.3f}   verdict: {rep.verdict}")
    print(f"flux-variable sup over the ladder: {rep.flux_bound_sup:.4f}")


def main():
    run(0.10, "smooth (pre-shock)")
    run(0.35, "after shock formation")


if __name__ == "__main__":
    main()
