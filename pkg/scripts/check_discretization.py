#!/usr/bin/env python3
"""
Electrode discretization check.
Compares secular frequencies of the stretched elliptical trap at a given
vertex count and at twice as many vertices.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import config
from trap_model import Ion, discretization_check, stretched_ring_layout


def main():
    """Main function with command line options."""
    import argparse

    parser = argparse.ArgumentParser(description="Ellipse discretization convergence check")
    parser.add_argument("--vertices", type=int, default=config.ELLIPSE_VERTICES,
                        help=f"Vertices per ellipse (default: {config.ELLIPSE_VERTICES})")
    parser.add_argument("--limit", type=float, default=1e-3,
                        help="Largest acceptable relative frequency change (default: 1e-3)")

    args = parser.parse_args()
    config.setup_logging()

    ion = Ion.from_amu(config.ION_MASS_AMU, config.ION_CHARGE_E)
    change = discretization_check(lambda n: stretched_ring_layout(vertices=n), ion, args.vertices)

    print(f"{args.vertices} -> {2 * args.vertices} vertices: max relative change {change:.3e}")
    if change < args.limit:
        print("✅ Converged")
        return 0
    print(f"❌ Change exceeds {args.limit:.1e}; increase the vertex count")
    return 1


if __name__ == "__main__":
    sys.exit(main())
