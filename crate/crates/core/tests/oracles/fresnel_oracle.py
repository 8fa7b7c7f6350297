"""Reference values for wave impedance and Fresnel reflection.

Direct numpy evaluation of the closed forms with Snell's law for the
refraction angle. Run from this directory:

    python3 fresnel_oracle.py > ../data/fresnel_oracle.json
"""
import json
import os

import numpy as np

MU0 = 1.25663706212e-6
EPS0 = 8.8541878128e-12
C0 = 299792458.0
Z0 = np.sqrt(MU0 / EPS0)


def impedance(n, alpha, f_hz):
    k = alpha * C0 / (4 * np.pi * f_hz)
    eps_r = n * n - k * k - 2j * n * k
    return np.sqrt(MU0 / (EPS0 * eps_r))


def fresnel(z1, z2, ti, tt):
    te = (z2 * np.cos(ti) - z1 * np.cos(tt)) / (z2 * np.cos(ti) + z1 * np.cos(tt))
    tm = (z2 * np.cos(tt) - z1 * np.cos(ti)) / (z2 * np.cos(tt) + z1 * np.cos(ti))
    return te, tm


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    db = json.load(open(os.path.join(here, "..", "..", "data", "materials.json")))
    plaster = [m for m in db["materials"] if m["name"] == "plasterboard"][0]
    row300 = [r for r in plaster["table"] if r[0] == 300.0][0]

    imp_inputs = [(1.0, 0.0, 300e9), (2.0, 0.0, 300e9), (row300[1], row300[2], 300e9)]
    rng = np.random.default_rng(20240611)
    for _ in range(21):
        n = float(rng.uniform(1.0, 4.0))
        alpha = float(rng.uniform(0.0, 5000.0))
        f = float(rng.uniform(100e9, 1000e9))
        imp_inputs.append((n, alpha, f))
    imps = []
    for n, a, f in imp_inputs:
        z = impedance(n, a, f)
        imps.append({"n": n, "alpha": a, "f_hz": f, "re": float(z.real), "im": float(z.imag)})

    fres = []
    z2p = impedance(row300[1], row300[2], 300e9)
    ti = np.deg2rad(45.0)
    tt = np.arcsin(np.sin(ti) / row300[1])
    te, tm = fresnel(Z0, z2p, ti, tt)
    fres.append({"n": row300[1], "alpha": row300[2], "f_hz": 300e9, "theta_i": float(ti),
                 "te_re": float(te.real), "te_im": float(te.imag),
                 "tm_re": float(tm.real), "tm_im": float(tm.imag)})
    for _ in range(23):
        n = float(rng.uniform(1.0, 4.0))
        alpha = float(rng.uniform(0.0, 5000.0))
        f = float(rng.uniform(100e9, 1000e9))
        ti = float(rng.uniform(0.0, np.deg2rad(89.0)))
        tt = np.arcsin(np.sin(ti) / n)
        te, tm = fresnel(Z0, impedance(n, alpha, f), ti, tt)
        fres.append({"n": n, "alpha": alpha, "f_hz": f, "theta_i": ti,
                     "te_re": float(te.real), "te_im": float(te.imag),
                     "tm_re": float(tm.real), "tm_im": float(tm.imag)})

    # |gamma_TM| over a fine angle scan for a lossless n = 2 dielectric:
    # location of the interior minimum (Brewster angle).
    thetas = np.linspace(0.0, np.pi / 2 - 1e-6, 200001)
    tts = np.arcsin(np.sin(thetas) / 2.0)
    _, tms = fresnel(Z0, impedance(2.0, 0.0, 300e9), thetas, tts)
    brewster = float(thetas[np.argmin(np.abs(tms))])

    print(json.dumps({"impedance": imps, "fresnel": fres, "brewster_n2": brewster}, indent=1))


if __name__ == "__main__":
    main()
