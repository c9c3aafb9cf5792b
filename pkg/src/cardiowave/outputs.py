"""Delimited and legacy-VTK output writers plus round-trip readers.

Probe traces use the header ``t,V@<probe>,...`` and activation maps the
header ``node,x,y,t_act`` with unactivated nodes omitted.  Floats are
written with shortest round-trip formatting so that reading a file back
reproduces the arrays exactly and reruns are byte-identical.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .mesh import SimplicialMesh

VTK_CELL_TYPES = {1: 3, 2: 5}     # line, triangle


def _fmt(x: float) -> str:
    return repr(float(x))


def probe_label(point) -> str:
    p = np.atleast_1d(np.asarray(point, dtype=float))
    return "V@" + "_".join(f"{c:g}" for c in p)


def write_probe_csv(path, times, values, probes) -> None:
    """Probe time series: one row per sample, ``t`` then one column per probe."""
    path = Path(path)
    values = np.asarray(values)
    with path.open("w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(["t"] + [probe_label(p) for p in probes])
        for t, row in zip(times, values):
            w.writerow([_fmt(t)] + [_fmt(v) for v in row])


def read_probe_csv(path):
    """Inverse of write_probe_csv: returns (times, values, labels)."""
    with Path(path).open(newline="") as fp:
        r = csv.reader(fp)
        header = next(r)
        rows = [[float(c) for c in row] for row in r if row]
    data = np.asarray(rows)
    if data.size == 0:
        return np.zeros(0), np.zeros((0, len(header) - 1)), header[1:]
    return data[:, 0], data[:, 1:], header[1:]


def write_activation_csv(path, mesh: SimplicialMesh, t_act) -> None:
    """Per-node first-crossing times; unactivated nodes are omitted entirely."""
    path = Path(path)
    t_act = np.asarray(t_act)
    with path.open("w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(["node", "x", "y", "t_act"])
        for i in np.flatnonzero(np.isfinite(t_act)):
            x = mesh.nodes[i, 0]
            y = mesh.nodes[i, 1] if mesh.dim > 1 else 0.0
            w.writerow([int(i), _fmt(x), _fmt(y), _fmt(t_act[i])])


def read_activation_csv(path):
    """Returns (node_index, xy, t_act) arrays for the activated nodes."""
    with Path(path).open(newline="") as fp:
        r = csv.reader(fp)
        next(r)
        rows = [row for row in r if row]
    if not rows:
        return (np.zeros(0, dtype=int), np.zeros((0, 2)), np.zeros(0))
    nodes = np.array([int(row[0]) for row in rows])
    xy = np.array([[float(row[1]), float(row[2])] for row in rows])
    t = np.array([float(row[3]) for row in rows])
    return nodes, xy, t


def write_table_csv(path, header, rows) -> None:
    """Generic numeric/str table with round-trip float formatting."""
    with Path(path).open("w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) if isinstance(c, float) else c for c in row])


def read_table_csv(path):
    with Path(path).open(newline="") as fp:
        r = csv.reader(fp)
        header = next(r)
        rows = [row for row in r if row]
    return header, rows


def write_vtk(path, mesh: SimplicialMesh, point_data: dict) -> None:
    """Legacy-VTK ASCII unstructured grid with named scalar point arrays."""
    path = Path(path)
    pts = mesh.nodes
    n = mesh.n_nodes
    m = mesh.n_elements
    k = mesh.dim + 1
    with path.open("w") as fp:
        fp.write("# vtk DataFile Version 3.0\n")
        fp.write("cardiowave snapshot\n")
        fp.write("ASCII\n")
        fp.write("DATASET UNSTRUCTURED_GRID\n")
        fp.write(f"POINTS {n} float\n")
        for p in pts:
            x = p[0]
            y = p[1] if mesh.dim > 1 else 0.0
            fp.write(f"{x:.9g} {y:.9g} 0\n")
        fp.write(f"CELLS {m} {m * (k + 1)}\n")
        for el in mesh.elements:
            fp.write(str(k) + " " + " ".join(str(int(i)) for i in el) + "\n")
        fp.write(f"CELL_TYPES {m}\n")
        ct = VTK_CELL_TYPES[mesh.dim]
        fp.write("\n".join([str(ct)] * m) + "\n")
        fp.write(f"POINT_DATA {n}\n")
        for name, arr in point_data.items():
            arr = np.asarray(arr)
            fp.write(f"SCALARS {name} float 1\n")
            fp.write("LOOKUP_TABLE default\n")
            fp.write("\n".join(f"{v:.9g}" for v in arr) + "\n")


def read_vtk_point_data(path) -> dict:
    """Parse the SCALARS arrays back out of a legacy-VTK snapshot."""
    out = {}
    lines = Path(path).read_text().splitlines()
    i = 0
    n = None
    while i < len(lines):
        tok = lines[i].split()
        if tok[:1] == ["POINT_DATA"]:
            n = int(tok[1])
        elif tok[:1] == ["SCALARS"] and n is not None:
            name = tok[1]
            vals = []
            j = i + 2
            while len(vals) < n:
                vals.extend(float(v) for v in lines[j].split())
                j += 1
            out[name] = np.array(vals)
            i = j - 1
        i += 1
    return out
