#!/usr/bin/env python3
"""Console report: E_p / E_lc from the amplitude scan and the
effective-picture discriminant crossing at fixed-point fields."""

import sys

from epomc import classical, effective
from epomc.model import PAPER_DEFAULTS


def main() -> int:
    drives = [float(d) for d in range(300, 701, 10)]
    print("scanning amplitudes (this takes a few minutes)...")
    scan = classical.amplitude_scan(PAPER_DEFAULTS, drives)
    print(f"E_p  = {scan.e_p}")
    print(f"E_lc = {scan.e_lc}")

    q_warm = (0.0, 0.0)
    prev = None
    for e in drives:
        p = PAPER_DEFAULTS.replace(drive=e)
        fp = classical.fixed_point(p, q_init=q_warm)
        q_warm = (fp.q1, fp.q2)
        disc = effective.spectrum_from_params(p, fp.a1, fp.a2).discriminant
        if prev is not None and prev[1] > 0 >= disc:
            zero = prev[0] + 10.0 * prev[1] / (prev[1] - disc)
            print(f"discriminant zero crossing near E = {zero:.1f} "
                  f"(cell [{prev[0]:g}, {e:g}])")
        prev = (e, disc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
