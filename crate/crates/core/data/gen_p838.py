"""Tabulates the rain power-law coefficients (k, alpha) of ITU-R P.838-3
for horizontal and vertical polarization on a fixed frequency grid.

    python3 gen_p838.py > p838_rain.csv
"""
import numpy as np

KH = ([-5.33980, -0.35351, -0.23789, -0.94158], [-0.10008, 1.26970, 0.86036, 0.64552],
      [1.13098, 0.45400, 0.15354, 0.16817], -0.18961, 0.71147)
KV = ([-3.80595, -3.44965, -0.39902, 0.50167], [0.56934, -0.22911, 0.73042, 1.07319],
      [0.81061, 0.51059, 0.11899, 0.27195], -0.16398, 0.63297)
AH = ([-0.14318, 0.29591, 0.32177, -5.37610, 16.1721], [1.82442, 0.77564, 0.63773, -0.96230, -3.29980],
      [-0.55187, 0.19822, 0.13164, 1.47828, 3.43990], 0.67849, -1.95537)
AV = ([-0.07771, 0.56727, -0.20238, -48.2991, 48.5833], [2.33840, 0.95545, 1.14520, 0.791669, 0.791459],
      [-0.76284, 0.54039, 0.26809, 0.116226, 0.116479], -0.053739, 0.83433)


def fit(f, c):
    a, b, cc, m, k = c
    lf = np.log10(f)
    return sum(ai * np.exp(-((lf - bi) / ci) ** 2) for ai, bi, ci in zip(a, b, cc)) + m * lf + k


freqs = [1, 2, 4, 6, 7, 8, 10, 12, 15, 20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100,
         120, 150, 200, 250, 300, 350, 400, 450, 500, 550, 600, 650, 700, 750, 800, 850,
         900, 950, 1000]
print("f_ghz,k_h,alpha_h,k_v,alpha_v")
for f in freqs:
    print("%g,%.6g,%.6g,%.6g,%.6g" % (f, 10 ** fit(f, KH), fit(f, AH), 10 ** fit(f, KV), fit(f, AV)))
