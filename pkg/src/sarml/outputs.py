"""Deterministic artifact writers: CSV, SVG heat maps, JSON reports, manifest.

All floats are written with 17 significant digits so reruns of the same
scenario produce byte-identical files; masked cells are emitted as "nan".
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np


def fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_sinogram_csv(path, sinogram):
    """Header row carries the s grid; one row per t with masked cells as nan."""
    vals = sinogram.masked_values()
    with open(path, "w", newline="") as fh:
        fh.write("t," + ",".join(fmt(s) for s in sinogram.s_grid) + "\n")
        for j, t in enumerate(sinogram.t_grid):
            fh.write(fmt(t) + "," + ",".join(fmt(v) for v in vals[j]) + "\n")


def read_scene_csv(path):
    """Scene grid CSV: header "v,<u values>"; one row per v with V samples."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "v":
            raise ValueError("scene CSV must start with a 'v,<u grid>' header")
        u_grid = np.array([float(x) for x in header[1:]])
        v_vals = []
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            v_vals.append(float(parts[0]))
            rows.append([float(x) for x in parts[1:]])
    v_grid = np.array(v_vals)
    values = np.array(rows).T  # rows are fixed v; store as (n_u, n_v)
    if values.shape != (u_grid.size, v_grid.size):
        raise ValueError("scene CSV rows do not match the header grid")
    return u_grid, v_grid, values


def write_scene_csv(path, scene):
    with open(path, "w", newline="") as fh:
        fh.write("v," + ",".join(fmt(u) for u in scene.u_grid) + "\n")
        for j, v in enumerate(scene.v_grid):
            fh.write(fmt(v) + "," + ",".join(fmt(x) for x in scene.values[:, j])
                     + "\n")


def write_degeneracy_csv(path, dmap):
    rep = dmap.report
    with open(path, "w", newline="") as fh:
        fh.write("u,v,sigma1_residual,sigma2_residual,minsv_piL,minsv_piR,"
                 "nadir_flag\n")
        for i, u in enumerate(dmap.u_grid):
            for j, v in enumerate(dmap.v_grid):
                fh.write(",".join([
                    fmt(u), fmt(v),
                    fmt(rep.sigma1_residual[i, j]),
                    fmt(rep.sigma2_residual[i, j]),
                    fmt(rep.minsv_piL[i, j]),
                    fmt(rep.minsv_piR[i, j]),
                    "1" if rep.nadir_flag[i, j] else "0",
                ]) + "\n")


def write_mirrors_csv(path, mirror_set):
    """One row per solution; isolated points carry family_id -1."""
    with open(path, "w", newline="") as fh:
        fh.write("u,v,xi,eta,sigma1_residual,sigma2_residual,family_id\n")
        for mp in mirror_set.isolated:
            q, rep = mp.covector, mp.report
            fh.write(",".join([fmt(q.u), fmt(q.v), fmt(q.xi), fmt(q.eta),
                               fmt(rep.sigma1_residual),
                               fmt(rep.sigma2_residual), "-1"]) + "\n")
        for fid, fam in enumerate(mirror_set.families):
            for q, rep in zip(fam.covectors, fam.reports):
                fh.write(",".join([fmt(q.u), fmt(q.v), fmt(q.xi), fmt(q.eta),
                                   fmt(rep.sigma1_residual),
                                   fmt(rep.sigma2_residual), str(fid)]) + "\n")


def mirrors_summary_text(mirror_set):
    counts = mirror_set.counts()
    lines = [
        f"data covector: s={fmt(mirror_set.p.s)} t={fmt(mirror_set.p.t)} "
        f"sigma={fmt(mirror_set.p.sigma)} tau={fmt(mirror_set.p.tau)}",
        f"search region: u in [{fmt(mirror_set.region[0][0])}, "
        f"{fmt(mirror_set.region[0][1])}], v in "
        f"[{fmt(mirror_set.region[1][0])}, {fmt(mirror_set.region[1][1])}], "
        f"grid {mirror_set.grid_n}x{mirror_set.grid_n}",
        f"isolated points: {counts['isolated']}",
        f"families: {counts['families']} "
        f"({counts['family_points']} traced points)",
        f"discarded seeds: {counts['discarded_seeds']}",
    ]
    for fam in mirror_set.families:
        state = "truncated" if fam.truncated else "complete"
        lines.append(f"  family: {len(fam.covectors)} points, "
                     f"max residual {fmt(fam.max_residual)}, {state}")
    return "\n".join(lines) + "\n"


def write_svg_heatmap(path, values, x_grid, y_grid, title):
    """Standalone SVG 1.1 heat map, linear grayscale, min/max annotated.

    values has shape (len(y_grid), len(x_grid)); NaN cells are left at the
    background colour.
    """
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 0.0
    span = hi - lo
    n_y, n_x = values.shape
    cell = 4
    margin = 24
    width = n_x * cell + 2 * margin
    height = n_y * cell + 2 * margin + 16

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#dddddd"/>\n',
        f'<text x="{margin}" y="14" font-family="monospace" font-size="10">'
        f'{title} | x: [{fmt(x_grid[0])}, {fmt(x_grid[-1])}] '
        f'y: [{fmt(y_grid[0])}, {fmt(y_grid[-1])}]</text>\n',
    ]
    for j in range(n_y):
        # draw with y increasing upward
        ypix = margin + 16 + (n_y - 1 - j) * cell
        for i in range(n_x):
            val = values[j, i]
            if not math.isfinite(val):
                continue
            g = 0 if span == 0 else int(round(255 * (val - lo) / span))
            parts.append(
                f'<rect x="{margin + i * cell}" y="{ypix}" width="{cell}" '
                f'height="{cell}" fill="rgb({g},{g},{g})"/>\n')
    parts.append(
        f'<text x="{margin}" y="{height - 6}" font-family="monospace" '
        f'font-size="10">min={fmt(lo)} max={fmt(hi)}</text>\n')
    parts.append("</svg>\n")
    with open(path, "w", newline="") as fh:
        fh.write("".join(parts))


class _JsonEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.bool_,)):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def write_json(path, obj):
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, cls=_JsonEncoder)
        fh.write("\n")


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, out_dir, filenames, extra):
    files = {}
    for name in sorted(filenames):
        full = out_dir / name
        files[name] = {"sha256": sha256_of(full),
                       "bytes": full.stat().st_size}
    payload = {"files": files}
    payload.update(extra)
    write_json(path, payload)
