"""Fragment file format: plain decimal CSV with a 3-line comment header.

    # fbmreg fragment v1
    # size=<N> noise_var=<v>
    # grid: row=t (vertical), col=s (horizontal), centered odd lattice
    <N rows of N comma-separated values, 17 significant digits>

Values are written with repr-level precision so parse(serialize(f))
reproduces every pixel bit for bit.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .params import Fragment, FullParams, RstParams, TextureParams

_MAGIC = "# fbmreg fragment v1"


def dumps_fragment(fragment: Fragment) -> str:
    lines = [
        _MAGIC,
        f"# size={fragment.size} noise_var={fragment.noise_var!r}",
        "# grid: row=t (vertical), col=s (horizontal), centered odd lattice",
    ]
    for row in fragment.pixels:
        lines.append(",".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def loads_fragment(text: str) -> Fragment:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4 or lines[0].strip() != _MAGIC:
        raise ValueError("not a fbmreg fragment file (bad or missing header)")
    fields = dict(part.split("=", 1) for part in lines[1][1:].split())
    size = int(fields["size"])
    noise_var = float(fields["noise_var"])
    data = lines[3:3 + size]
    if len(data) != size:
        raise ValueError(f"expected {size} data rows, found {len(data)}")
    pixels = np.array([[float(v) for v in ln.split(",")] for ln in data])
    return Fragment(pixels=pixels, noise_var=noise_var)


def write_fragment(fragment: Fragment, path: str):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_fragment(fragment))
    os.replace(tmp, path)


def read_fragment(path: str) -> Fragment:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_fragment(fh.read())


def params_manifest(params: FullParams, n_ri, n_ti, noise_std_ri,
                    noise_std_ti, seed, test_point_id=None) -> dict:
    """JSON-ready record of a simulation's generating configuration."""
    t, r = params.texture, params.rst
    return {
        "texture": {"sigma_x_ri": t.sigma_x_ri, "sigma_x_ti": t.sigma_x_ti,
                    "hurst": t.hurst, "k_rt": t.k_rt},
        "rst": {"dt": r.dt, "ds": r.ds,
                "alpha_deg": r.alpha * 180.0 / math.pi, "dr": r.dr},
        "n_ri": int(n_ri), "n_ti": int(n_ti),
        "noise_std_ri": float(noise_std_ri),
        "noise_std_ti": float(noise_std_ti),
        "seed": seed,
        "test_point": test_point_id,
    }


def params_from_manifest(manifest: dict) -> FullParams:
    t = manifest["texture"]
    r = manifest["rst"]
    return FullParams(
        TextureParams(sigma_x_ri=t["sigma_x_ri"], sigma_x_ti=t["sigma_x_ti"],
                      hurst=t["hurst"], k_rt=t["k_rt"]),
        RstParams(dt=r["dt"], ds=r["ds"],
                  alpha=r["alpha_deg"] * math.pi / 180.0, dr=r["dr"]))


def write_json(obj, path: str):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
