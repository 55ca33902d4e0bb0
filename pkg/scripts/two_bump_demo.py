"""Simplify the seeded two-Gaussian field and summarise what survives.

    python3 scripts/two_bump_demo.py [--seed N] [--threshold T] [--svg out.svg]
"""
import argparse
import time

from morse_forge.cancel import simplify
from morse_forge.gradient import build_gradient, critical_cells
from morse_forge.io import svg_schematic
from morse_forge.synth import mixture_field, two_bump_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threshold", type=float, default=1.0)
    ap.add_argument("--svg")
    args = ap.parse_args()

    f = mixture_field(two_bump_config(args.seed))
    c = f.complex
    before = build_gradient(c, f).census()
    t0 = time.perf_counter()
    f2, rep = simplify(c, f, args.threshold)
    dt = time.perf_counter() - t0
    g2 = build_gradient(c, f2)
    print(f"seed {args.seed}: census {before} -> {g2.census()} "
          f"with {len(rep.plans)} cancellations in {dt:.2f}s")
    print(f"perturbation {rep.total_perturbation:.4g} (bound {rep.perturbation_bound:.4g}), "
          f"{rep.rejected} pairs rejected")
    for cc in critical_cells(g2):
        where = "boundary" if c.is_boundary(cc.cell) else "interior"
        v = f2.max_vertex(cc.cell)
        print(f"  index {cc.morse_index} {cc.cell} at vertex {v} ({c.coords[v][0]:g}, {c.coords[v][1]:g}) "
              f"value {cc.value:.4f} ({where})")
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(svg_schematic(f2, critical_cells(g2)))


if __name__ == "__main__":
    main()
