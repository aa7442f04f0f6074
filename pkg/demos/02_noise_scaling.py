#!/usr/bin/env python3
"""Shot-noise scaling: sigma of the readout versus photon number.

True vacuum noise grows as sqrt(J/2), so fitting sigma = sqrt(eps * J / 2)
across a decade of pulse energies and finding eps close to the detection
efficiency is the standard sanity check that a polarimeter is quantum-noise
limited rather than dominated by technical noise (technical noise would
scale linearly with J instead).

Three chains are swept here: an ideal one (eps -> 1), the eta = 0.9 chain
(eps -> 0.9 when counting incident photons), and a chain whose readout
believes a feedback capacitance 5.4% away from the physical one, which
drags the fitted eps down to about 0.81 without any extra physics.
"""

import dataclasses
from pathlib import Path

import numpy as np

from pulsepol import DetectorChainConfig
from pulsepol.config import SWEEP_PHOTON_NUMBERS, default_run_config
from pulsepol.runners import run_sweep

OUT = Path(__file__).parent / "output" / "noise_scaling"


def main():
    base = default_run_config()

    chains = {
        "ideal": dataclasses.replace(
            base,
            detector=DetectorChainConfig(
                quantum_efficiency=1.0, extinction_ratio=0.0, excess_noise_electrons=0.0
            ),
        ),
        "eta=0.9": dataclasses.replace(base, seed=base.seed + 1),
        "mis-calibrated C_f": dataclasses.replace(
            base,
            seed=base.seed + 2,
            detector=DetectorChainConfig(assumed_feedback_capacitance=1e-12 / 1.054),
        ),
    }

    results = {}
    for label, config in chains.items():
        results[label] = run_sweep(
            config, SWEEP_PHOTON_NUMBERS, out_dir=OUT / label.replace(" ", "_")
        )
        scaling = results[label].scaling
        print(f"{label:>20s}: eps = {scaling.epsilon:.3f} +/- {scaling.epsilon_err:.3f}")
        note = results[label].summary["calibration_hypothesis"]
        if note:
            print(f"{'':>20s}  note: {note}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the figure")
        return

    plt.figure(figsize=(7, 4.5))
    grid = np.linspace(min(SWEEP_PHOTON_NUMBERS), max(SWEEP_PHOTON_NUMBERS), 200)
    markers = {"ideal": "o", "eta=0.9": "s", "mis-calibrated C_f": "^"}
    for label, result in results.items():
        points = np.array(result.scaling.points)
        eps = result.scaling.epsilon
        plt.errorbar(
            points[:, 0], points[:, 1], yerr=points[:, 2],
            fmt=markers[label], ls="none", label=f"{label} (eps = {eps:.2f})",
        )
        plt.plot(grid, np.sqrt(eps * grid / 4.0), lw=1, alpha=0.7)
    plt.xscale("log")
    plt.yscale("log")
    plt.xlabel("photons per pulse (2J, incident)")
    plt.ylabel(r"$\sigma$ of $J_y'$ (photoelectrons)")
    plt.title(r"Readout noise vs pulse energy with $\sqrt{\epsilon J/2}$ fits")
    plt.legend()
    plt.tight_layout()
    fig_path = OUT / "noise_scaling.png"
    plt.savefig(fig_path, dpi=120)
    print(f"figure: {fig_path}")


if __name__ == "__main__":
    main()
