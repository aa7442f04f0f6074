#!/usr/bin/env python3
"""Amplifier waveforms for a single 400 ns light pulse.

The charge-sensitive preamp integrates the photocurrent: 1e6 electrons on
a 1 pF feedback capacitor give a 0.16 V step (0.16 uV per electron) that
then bleeds away through the 300 MOhm feedback resistor with a 300 us
tail.  The shaping amplifier differentiates/integrates that step into a
peaked pulse (gain 200, peak 2.3 us after the charge) whose height the ADC
samples as the measurement of the collected charge.
"""

from pathlib import Path

from pulsepol.config import default_run_config
from pulsepol.runners import run_waveform_demo

OUT = Path(__file__).parent / "output" / "waveforms"
CHARGE = 1e6  # electrons


def main():
    result = run_waveform_demo(default_run_config(), CHARGE, out_dir=OUT)
    s = result.summary
    print(f"injected charge:      {CHARGE:g} electrons over 400 ns")
    print(f"preamp plateau:       {s['preamp_plateau_volts']:.4f} V "
          f"(0.16 uV/electron sensitivity)")
    print(f"shaper peak:          {s['shaper_peak_volts']:.2f} V")
    print(f"peak after arrival:   {s['shaper_peak_after_arrival_seconds'] * 1e6:.2f} us "
          f"(2.3 us shaper + half the charge ramp)")
    print(f"traces written to:    {result.out_dir}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the figure")
        return

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(result.preamp.times * 1e6, result.preamp.samples * 1e3)
    ax1.set_ylabel("preamp (mV)")
    ax1.set_title(f"Charge-sensitive amplifier: {CHARGE:g} electrons")
    ax2.plot(result.shaped.times * 1e6, result.shaped.samples)
    peak_t = s["shaper_peak_time_seconds"] * 1e6
    ax2.axvline(peak_t, color="k", ls=":", lw=1)
    ax2.annotate(f"peak at {peak_t:.2f} us", (peak_t, s["shaper_peak_volts"] * 0.9),
                 textcoords="offset points", xytext=(8, 0))
    ax2.set_ylabel("shaper (V)")
    ax2.set_xlabel("time (us)")
    ax2.set_title("Shaping amplifier output")
    fig.tight_layout()
    fig_path = OUT / "amplifier_waveforms.png"
    fig.savefig(fig_path, dpi=120)
    print(f"figure:               {fig_path}")


if __name__ == "__main__":
    main()
