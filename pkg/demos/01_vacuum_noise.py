#!/usr/bin/env python3
"""Vacuum-noise histogram of a balanced polarimeter.

A coherent pulse with 2J = 3.7e6 photons and T = 400 ns is sent through
the simulated detection chain (eta = 0.9 photodiodes, charge-sensitive
preamp, CR-RC shaper, 14-bit ADC) 1000 times with no atoms in the beam.
The readout J_y' = (n_plus - n_minus)/2 should be Gaussian with standard
deviation sqrt(eta * J / 2): that Gaussian is the shot-noise floor every
spin-QND measurement has to resolve.
"""

import math
from pathlib import Path

import numpy as np

from pulsepol import histogram
from pulsepol.config import default_run_config
from pulsepol.runners import run_vacuum

OUT = Path(__file__).parent / "output" / "vacuum_noise"


def main():
    config = default_run_config()
    result = run_vacuum(config, out_dir=OUT)
    fit = result.fit

    sigma_expected = math.sqrt(0.9 * config.pulse.mean_photon_number / 4.0)
    print(f"pulses:            {config.n_pulses}")
    print(f"photons per pulse: {config.pulse.mean_photon_number:g}")
    print(f"expected sigma:    {sigma_expected:8.1f} photoelectrons  (sqrt(eta*J/2))")
    print(f"fitted sigma:      {fit.sigma:8.1f} +/- {fit.sigma_err:.1f}")
    print(f"fitted mean:       {fit.mu:8.1f} +/- {fit.mu_err:.1f}")
    print(f"KS p-value:        {fit.ks_pvalue:8.3f}  (> 0.01 means Gaussian is a good fit)")
    print(f"tables written to: {result.out_dir}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the figure")
        return

    hist = histogram(result.record)
    centers = hist.centers
    plt.figure(figsize=(7, 4.5))
    plt.bar(centers, hist.counts, width=hist.bin_width, alpha=0.6, label="simulated pulses")
    grid = np.linspace(centers[0], centers[-1], 400)
    theory = (
        hist.n_samples
        * hist.bin_width
        * np.exp(-(grid**2) / (2 * sigma_expected**2))
        / math.sqrt(2 * math.pi * sigma_expected**2)
    )
    plt.plot(grid, theory, "k--", label=r"vacuum noise, $\sigma=\sqrt{\eta J/2}$")
    plt.xlabel(r"$J_y'$ (photoelectrons)")
    plt.ylabel("pulses per bin")
    plt.title("No-atom polarimeter outcomes vs the shot-noise Gaussian")
    plt.legend()
    plt.tight_layout()
    fig_path = OUT / "vacuum_noise.png"
    plt.savefig(fig_path, dpi=120)
    print(f"figure:            {fig_path}")


if __name__ == "__main__":
    main()
