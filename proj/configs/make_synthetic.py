"""Writes synthetic.csv: two dependent targets driven by a periodic feature.

Targets are drawn from an FGM copula with correlation 0.6 by conditional
inversion, then pushed through skewed marginals whose location moves with
the feature.
"""

import csv
import pathlib

import numpy as np

C = 0.6
N = 1500


def fgm_pairs(rng, n, c):
    u = rng.random(n)
    v = rng.random(n)
    a = c * (1.0 - 2.0 * u)
    # Solve w + a w (1 - w) = v for w in [0, 1].
    safe = np.where(np.abs(a) < 1e-12, 1.0, a)
    root = ((1.0 + a) - np.sqrt((1.0 + a) ** 2 - 4.0 * a * v)) / (2.0 * safe)
    w = np.where(np.abs(a) < 1e-12, v, root)
    return u, w


def main():
    rng = np.random.default_rng(2024)
    hour = np.arange(N) % 24
    season = np.sin(2.0 * np.pi * hour / 24.0)
    u, w = fgm_pairs(rng, N, C)
    wind = 2.0 + 1.5 * season + 4.0 * u**1.5
    solar = np.clip(season, 0.0, None) * 3.0 + 2.0 * w**2
    out = pathlib.Path(__file__).with_name("synthetic.csv")
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour_signal", "wind", "solar"])
        for row in zip(season, wind, solar):
            writer.writerow([f"{x:.6f}" for x in row])


if __name__ == "__main__":
    main()
