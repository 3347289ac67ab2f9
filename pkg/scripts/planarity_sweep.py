#!/usr/bin/env python3
"""
Planar-to-3D transition of small crystals.
Bisects on the out-of-plane frequency for each crystal size and prints the
numerical transition next to the continuum estimate.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import config
from crystal import planar_transition, planarity_threshold
from trap_model import Ion


def main():
    """Main function with command line options."""
    import argparse

    parser = argparse.ArgumentParser(description="Planar crystal transition sweep")
    parser.add_argument("--ions", type=int, nargs="+", default=[2, 3, 4, 5, 10],
                        help="Crystal sizes to sweep (default: 2 3 4 5 10)")
    parser.add_argument("--nu-plane", type=float, default=100e3,
                        help="In-plane frequency in Hz (default: 100e3)")
    parser.add_argument("--restarts", type=int, default=8,
                        help="Restarts per crystal solve (default: 8)")

    args = parser.parse_args()
    config.setup_logging(quiet=True)
    config.SHOW_PROGRESS = False

    ion = Ion.from_amu(config.ION_MASS_AMU, config.ION_CHARGE_E)
    print("N    | transition (kHz) | estimate (kHz) | ratio")
    print("-" * 52)
    for n in args.ions:
        transition = planar_transition(n, args.nu_plane, args.nu_plane, ion, restarts=args.restarts)
        estimate = planarity_threshold(n, args.nu_plane)
        print(f"{n:4} | {transition / 1e3:16.1f} | {estimate / 1e3:14.1f} | {transition / estimate:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
