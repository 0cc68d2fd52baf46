#!/usr/bin/env python3
"""Search the eight analyzer phases for the largest l1 violation from several seeds."""

import argparse

import numpy as np

from fourphoton.bell import OptimizerConfig, optimize_settings
from fourphoton.fock import four_photon_state
from fourphoton.lhv import SettingChoices


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--restarts", type=int, default=4)
    args = ap.parse_args(argv)

    psi = four_photon_state()
    for seed in range(args.seeds):
        start = SettingChoices.from_flat(np.random.default_rng(seed).uniform(0, 2 * np.pi, 8))
        res = optimize_settings(psi, start, OptimizerConfig(seed=seed, restarts=args.restarts))
        phases = " ".join(f"{x / np.pi:+.4f}pi" for x in res.settings.flat())
        print(f"seed {seed}: l1 {res.value:.12f}  v_crit {res.critical_visibility:.6f}  [{phases}]")


if __name__ == "__main__":
    main()
