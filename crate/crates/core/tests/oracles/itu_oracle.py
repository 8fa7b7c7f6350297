"""Reference values for the table-driven ITU models.

Evaluates ITU-Rpy's own P.676 (line-by-line, version 12) and P.840
(double-Debye) routines. The routines are lifted out of the installed
`itur` package with `ast` so that its heavy optional imports (astropy,
pyproj) are not needed:

    pip install --no-deps itur
    python3 itu_oracle.py > ../data/itu_oracle.json
"""
import ast
import json
import os
import types

import numpy as np

def _find_pkg():
    import importlib.util
    spec = importlib.util.find_spec("itur")
    return os.path.dirname(spec.origin)


def _extract(path, names, cls=None):
    src = open(path).read()
    tree = ast.parse(src)
    out = {}
    nodes = tree.body
    if cls is not None:
        nodes = [n for n in tree.body if isinstance(n, ast.ClassDef) and n.name == cls][0].body
    for node in nodes:
        if isinstance(node, ast.FunctionDef) and node.name in names:
            node.decorator_list = []
            mod = ast.Module(body=[node], type_ignores=[])
            ns = {"np": np}
            exec(compile(mod, path, "exec"), ns)
            out[node.name] = ns[node.name]
    return out


def main():
    pkg = _find_pkg()
    models = os.path.join(pkg, "models")
    data = os.path.join(pkg, "data", "676")
    fns = _extract(os.path.join(models, "itu676.py"), {"__gamma0_exact__", "__gammaw_exact__"})
    ox = np.genfromtxt(os.path.join(data, "v12_lines_oxygen.txt"), delimiter=",", skip_header=1)
    wv = np.genfromtxt(os.path.join(data, "v12_lines_water_vapour.txt"), delimiter=",", skip_header=1)
    tables = types.SimpleNamespace(
        f_ox=ox[:, 0], a1=ox[:, 1], a2=ox[:, 2], a3=ox[:, 3], a4=ox[:, 4], a5=ox[:, 5], a6=ox[:, 6],
        f_wv=wv[:, 0], b1=wv[:, 1], b2=wv[:, 2], b3=wv[:, 3], b4=wv[:, 4], b5=wv[:, 5], b6=wv[:, 6],
    )
    gamma_o = lambda f, p, rho, t: float(fns["__gamma0_exact__"](tables, f, p, rho, t))
    gamma_w = lambda f, p, rho, t: float(fns["__gammaw_exact__"](tables, f, p, rho, t))

    # (f_GHz, dry pressure hPa, vapour density g/m^3, T K)
    gas_inputs = [
        (300.0, 1004.3, 7.44, 293.15),
        (700.0, 1004.3, 7.44, 293.15),
        (60.0, 1013.25, 0.0, 288.15),
        (1.5, 1013.25, 7.5, 288.15),
        (10.0, 1013.25, 7.5, 288.15),
        (22.235, 1013.25, 7.5, 288.15),
        (35.0, 1000.0, 5.0, 280.0),
        (57.0, 1013.25, 7.5, 288.15),
        (94.0, 1013.25, 7.5, 288.15),
        (118.75, 1013.25, 7.5, 288.15),
        (140.0, 990.0, 10.0, 295.0),
        (183.31, 1013.25, 7.5, 288.15),
        (220.0, 1013.25, 3.0, 300.0),
        (240.0, 1010.0, 12.0, 298.0),
        (325.15, 1013.25, 7.5, 288.15),
        (340.0, 1013.25, 7.5, 288.15),
        (410.0, 1000.0, 6.0, 290.0),
        (500.0, 1004.3, 7.44, 293.15),
        (557.0, 1013.25, 7.5, 288.15),
        (650.0, 1013.25, 1.0, 273.15),
        (850.0, 1013.25, 7.5, 288.15),
        (950.0, 950.0, 4.0, 285.0),
        (1000.0, 1013.25, 7.5, 288.15),
        (300.0, 1013.25, 0.0, 293.15),
    ]
    gas = []
    for f, p, rho, t in gas_inputs:
        gas.append({"f_ghz": f, "p_dry_hpa": p, "rho_g_m3": rho, "t_k": t,
                    "gamma_o": gamma_o(f, p, rho, t), "gamma_w": gamma_w(f, p, rho, t)})

    fog_fn = _extract(os.path.join(models, "itu840.py"), {"specific_attenuation_coefficients"},
                      cls="_ITU840_6_")["specific_attenuation_coefficients"]
    fog_inputs = [(f, tc) for f in (10.0, 30.0, 60.0, 100.0, 150.0, 300.0, 500.0, 700.0, 1000.0)
                  for tc in (-10.0, 0.0, 20.0)]
    fog = [{"f_ghz": f, "t_k": tc + 273.15, "k_l": float(fog_fn(f, tc))} for f, tc in fog_inputs]

    print(json.dumps({"gas": gas, "fog": fog}, indent=1))


if __name__ == "__main__":
    main()
