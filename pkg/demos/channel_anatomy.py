"""Walk through the physical building blocks: field regions, element
pattern, free-space decay, and waveguide attenuation along a microstrip.

Run from the repo root:  python demos/channel_anatomy.py
Figures land in demos/output/.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dmafocus import (
    build_geometry,
    channel_matrix,
    classify_region,
    fraunhofer_distance,
    fresnel_limit,
    radiation_profile,
    waveguide_matrix,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    g28 = build_geometry(28e9, 0.3)
    g12 = build_geometry(1.2e9, 0.3)

    print("Array derived from a 30 cm x 30 cm panel:")
    for g, label in [(g28, "28 GHz"), (g12, "1.2 GHz")]:
        print(
            f"  {label}: wavelength {g.wavelength_m * 1e3:.2f} mm, "
            f"{g.n_microstrips} x {g.n_elements} elements "
            f"({g.spacing_m * 1e3:.2f} mm spacing)"
        )
        print(
            f"    radiating near field spans [{fresnel_limit(g):.3f}, "
            f"{fraunhofer_distance(g):.2f}] m"
        )
        for z in (0.2, 1.51, 20.0):
            print(f"    point (0, 0, {z}) m -> {classify_region(g, (0, 0, z))}")

    # element pattern
    theta = np.linspace(0, np.pi / 2, 200)
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    for b in (1.0, 2.0, 4.0):
        axes[0].plot(np.degrees(theta), radiation_profile(theta, b), label=f"b = {b:g}")
    axes[0].set_xlabel("angle from boresight [deg]")
    axes[0].set_ylabel("element gain")
    axes[0].set_title("radiation profile 2(b+1) cos^b")
    axes[0].legend()

    # per-element channel magnitude vs distance on boresight
    distances = np.linspace(0.3, 20.0, 300)
    pts = np.column_stack([np.zeros_like(distances)] * 2 + [distances])
    single = build_geometry(2.998e8 / 0.6, 0.3)  # one element at the origin
    mags = np.abs(channel_matrix(single, pts))[:, 0]
    axes[1].loglog(distances, mags)
    axes[1].axvline(fresnel_limit(g28), ls=":", c="gray")
    axes[1].axvline(fraunhofer_distance(g28), ls="--", c="gray")
    axes[1].set_xlabel("boresight distance [m]")
    axes[1].set_ylabel("|channel entry|")
    axes[1].set_title("1/d free-space decay (region edges at 28 GHz)")

    # waveguide attenuation and phase along one 28 GHz strip
    diag = waveguide_matrix(g28).diagonal[: g28.n_elements]
    axes[2].plot(np.arange(1, g28.n_elements + 1), np.abs(diag), ".-")
    axes[2].set_xlabel("element index along the strip")
    axes[2].set_ylabel("|h|")
    axes[2].set_title("intra-strip waveguide decay")
    fig.tight_layout()
    fig.savefig(OUT / "channel_anatomy.png", dpi=140)
    print(f"\nwrote {OUT / 'channel_anatomy.png'}")


if __name__ == "__main__":
    main()
