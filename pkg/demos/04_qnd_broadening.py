#!/usr/bin/env python3
"""Spin-induced broadening of the polarimeter distribution.

With atoms in the beam the Faraday interaction rotates the probe
polarization by an angle proportional to the collective spin S_z, so each
pulse's readout is shifted by alpha*t1*J*S_z.  Averaged over the Gaussian
spin state the distribution stays centered but broadens:

    Var(J_y') = J/2 + (alpha*t1*J)^2 Var(S_z) = (J/2) (1 + kappa^2)

kappa^2, the broadening in units of the vacuum noise, is the measurement
strength: kappa^2 >~ 1 is the regime where a single pulse resolves the
spin distribution, which is the requirement for squeezing by measurement.
"""

import dataclasses
import math
from pathlib import Path

import numpy as np

from pulsepol import InteractionParams
from pulsepol.config import default_qnd_config
from pulsepol.runners import run_qnd

OUT = Path(__file__).parent / "output" / "qnd_broadening"


def main():
    base = dataclasses.replace(default_qnd_config(), n_pulses=50_000)
    print(f"{'kappa^2':>8s} {'predicted Var':>14s} {'empirical Var':>14s} {'ratio':>7s}")
    samples = {}
    for kappa2 in (0.0, 1.0, 9.0):
        gain = math.sqrt(kappa2 * (base.pulse.j() / 2.0) / base.spins.var_sz) / base.pulse.j()
        config = dataclasses.replace(
            base, interaction=InteractionParams.from_product(gain), seed=base.seed + int(kappa2)
        )
        result = run_qnd(config, out_dir=OUT / f"kappa2_{kappa2:g}")
        ratio = result.empirical_variance / result.predicted_variance
        print(
            f"{kappa2:8.1f} {result.predicted_variance:14.4g} "
            f"{result.empirical_variance:14.4g} {ratio:7.3f}"
        )
        samples[kappa2] = result.record.readouts
    print(f"tables written under: {OUT}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the figure")
        return

    plt.figure(figsize=(7, 4.5))
    sigma0 = math.sqrt(base.pulse.j() / 2.0)
    bins = np.linspace(-5, 5, 120)
    for kappa2, readouts in samples.items():
        plt.hist(
            readouts / sigma0, bins=bins, density=True, histtype="step",
            label=rf"$\kappa^2 = {kappa2:g}$",
        )
    plt.xlabel(r"$J_y'$ in units of the vacuum noise $\sqrt{J/2}$")
    plt.ylabel("probability density")
    plt.title("Polarimeter distribution broadened by the atomic spin")
    plt.legend()
    plt.tight_layout()
    fig_path = OUT / "qnd_broadening.png"
    plt.savefig(fig_path, dpi=120)
    print(f"figure: {fig_path}")


if __name__ == "__main__":
    main()
