#!/usr/bin/env python3
"""Sweep the visibility and report sum |c| and whether a local model exists.

Writes CSV to stdout: v, l1, lhv_model.
"""

import argparse
import csv
import sys

import numpy as np

from fourphoton.errors import NoLhvModelError
from fourphoton.fock import four_photon_state
from fourphoton.lhv import PAPER_SETTINGS, expand_in_basis, lhv_l1, quantum_tensor, reconstruct_lhv
from fourphoton.measurement import NoiseMixture


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=101)
    args = ap.parse_args(argv)

    psi = four_photon_state()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["v", "l1", "lhv_model"])
    for v in np.linspace(0, 1, args.points):
        t = quantum_tensor(NoiseMixture(float(v), psi), PAPER_SETTINGS)
        try:
            reconstruct_lhv(expand_in_basis(t))
            ok = 1
        except NoLhvModelError:
            ok = 0
        w.writerow([f"{v:.6g}", f"{lhv_l1(t):.12g}", ok])


if __name__ == "__main__":
    main()
