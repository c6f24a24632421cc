"""Mollification ladder: distance between the two solvers as n grows.

For each scenario the direct slab solver and the smooth reference
solver are run on the same grid; the table lists the relative L1
distance between rho * theta and its smooth counterpart at each
mollification index.
"""

import argparse

import numpy as np

from transport1d import (
    build_grid,
    build_potential,
    builtin_scenarios,
    oracle_solution,
    sample_scenario,
    solve,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="all")
    ap.add_argument("--nt", type=int, default=257)
    ap.add_argument("--nx", type=int, default=257)
    ap.add_argument("--indices", type=int, nargs="+", default=[4, 8, 16])
    args = ap.parse_args()

    table = builtin_scenarios()
    labels = sorted(table) if args.scenario == "all" else [args.scenario]
    header = " ".join(f"{'n=' + str(n):>10s}" for n in args.indices)
    print(f"{'scenario':<18s} {header}")
    for label in labels:
        sc = table[label]
        g = build_grid(sc.t_max, sc.x_min, sc.x_max, args.nt, args.nx)
        f = sample_scenario(sc, g)
        P = build_potential(f)
        sol = solve(P, f, sc.data)
        target = f.rho * sol.theta
        mass = float(np.sum(np.abs(target)) * g.dt * g.dx)
        cells = []
        for n in args.indices:
            _, theta_n, rho_sm = oracle_solution(f, P, sc.data, n)
            dist = float(np.sum(np.abs(rho_sm * theta_n - target)) * g.dt * g.dx)
            cells.append(f"{dist / mass:10.4f}")
        print(f"{label:<18s} {' '.join(cells)}")


if __name__ == "__main__":
    main()
