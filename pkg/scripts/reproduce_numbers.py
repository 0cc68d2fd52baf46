#!/usr/bin/env python3
"""Print the headline numbers of the double-pair analysis in one go."""

import math

import numpy as np

from fourphoton.bell import lhv_bound, quantum_value, saturating_expression
from fourphoton.fock import coincidence_fraction, four_photon_state, ghz_epr_split, pdc_term, pipeline_stages, PAIR_ALPHA
from fourphoton.lhv import PAPER_SETTINGS, critical_visibility, expand_in_basis, lhv_l1, quantum_tensor
from fourphoton.measurement import correlation


def main():
    stages = pipeline_stages()
    print("two-pair term:")
    for m in stages["pairterm"]:
        print(f"  {stages['pairterm'].coefficient(m).real:g}  {m}")
    print("post-selected (before rotation):")
    for m in stages["postselected"]:
        print(f"  {stages['postselected'].coefficient(m).real:g}  {m}")
    print(f"fourfold coincidence fraction of the two-pair emission: {coincidence_fraction(pdc_term(2, PAIR_ALPHA)):.6f}")

    psi = four_photon_state()
    print("normalized state:")
    for p, a in psi.as_dict().items():
        if abs(a) > 1e-15:
            print(f"  {p}  {a.real:.6f}")
    ghz, epr = ghz_epr_split(psi)
    print(f"GHZ / EPR-EPR weights: {ghz:.6f} / {epr:.6f}")

    print(f"E(0,0,0,0)  = {correlation(psi, (0, 0, 0, 0)):+.12f}")
    print(f"E(pi,0,0,0) = {correlation(psi, (math.pi, 0, 0, 0)):+.12f}")

    t = quantum_tensor(psi, PAPER_SETTINGS)
    q = expand_in_basis(t)
    print("basis coefficients at the paper settings (k l m n: q):")
    for idx in np.ndindex(2, 2, 2, 2):
        if abs(q[idx]) > 1e-12:
            print(f"  {' '.join(str(i + 1) for i in idx)}: {q[idx]:+.6f}")
    print(f"sum |q| = {lhv_l1(t):.12f}   (8/(3 sqrt2) = {8 / (3 * math.sqrt(2)):.12f})")
    print(f"critical visibility = {critical_visibility(t):.12f}   (3 sqrt2/8 = {3 * math.sqrt(2) / 8:.12f})")
    e = saturating_expression(t)
    print(f"saturating expression: local bound {lhv_bound(e):.12f}, quantum value {quantum_value(e, t):.12f}")


if __name__ == "__main__":
    main()
