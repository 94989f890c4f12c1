"""CSV result files and instance serialisation."""

import csv
import io
import json

import numpy as np

from .. import __version__
from ..objectives import QuadraticObjective, RevenueObjective, SoftmaxObjective
from ..polytope import Polytope
from .config import dump_config

SCHEMA_VERSION = 1

COLUMNS = (
    "experiment",
    "row_kind",
    "instance",
    "instance_seed",
    "n",
    "m",
    "algorithm",
    "t",
    "value",
    "ratio_vs_oracle",
    "cumulative_reward",
    "wall_time",
    "note",
)

BENCH_COLUMNS = ("experiment", "n", "trials", "algorithm", "total_seconds", "per_call_us", "max_disagreement")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def header_lines(cfg, extra=()):
    lines = [f"drsub {__version__} csv-schema {SCHEMA_VERSION}"]
    lines.extend(extra)
    lines.append("config:")
    lines.extend(dump_config(cfg).rstrip("\n").splitlines())
    return ["# " + s if s else "#" for s in lines]


def render_csv(cfg, rows, columns=COLUMNS, extra_header=(), trailer=()):
    """Render the provenance header, column header and rows as one string."""
    buf = io.StringIO()
    for line in header_lines(cfg, extra_header):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    for line in trailer:
        buf.write("# " + line + "\n")
    return buf.getvalue()


def write_csv(path, cfg, rows, **kw):
    text = render_csv(cfg, rows, **kw)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def read_csv(path):
    """Return ``(header_comment_lines, list of row dicts)``."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    comments = [s for s in lines if s.startswith("#")]
    body = [s for s in lines if not s.startswith("#")]
    return comments, list(csv.DictReader(body))


def csv_body(text):
    """The part of a CSV file after the provenance header."""
    return "\n".join(s for s in text.splitlines() if not s.startswith("#"))


def _arr(a):
    return np.asarray(a, dtype=np.float64).tolist()


def instance_to_dict(F, P, spec=None):
    d = {"format": "drsub-instance", "version": 1,
         "polytope": {"A": _arr(P.A), "b": _arr(P.b), "u": _arr(P.u)}}
    if spec is not None:
        d["generator"] = {"family": spec.family, "n": spec.n, "m": spec.m,
                          "seed": spec.seed, "params": dict(spec.params)}
    if isinstance(F, QuadraticObjective):
        d["objective"] = {"type": "quadratic", "H": _arr(F.H), "h": _arr(F.h), "c": F.c}
    elif isinstance(F, SoftmaxObjective):
        d["objective"] = {"type": "softmax", "L": _arr(F.L), "offset": F.offset}
    elif isinstance(F, RevenueObjective):
        edges = np.column_stack([F.src, F.dst, F.w])
        d["objective"] = {"type": "revenue", "n": F.dim, "p": F.p, "edges": _arr(edges)}
    else:
        raise TypeError(f"cannot serialise objective of type {type(F).__name__}")
    return d


def instance_from_dict(d):
    if d.get("format") != "drsub-instance":
        raise ValueError("not a drsub instance file")
    pd = d["polytope"]
    P = Polytope(pd["A"], pd["b"], pd["u"])
    od = d["objective"]
    kind = od["type"]
    if kind == "quadratic":
        F = QuadraticObjective(od["H"], od["h"], od["c"])
    elif kind == "softmax":
        F = SoftmaxObjective(od["L"], od["offset"])
    elif kind == "revenue":
        F = RevenueObjective(od["n"], od["edges"], od["p"])
    else:
        raise ValueError(f"unknown objective type {kind!r}")
    return F, P


def write_instance(path, F, P, spec=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(F, P, spec), fh, indent=1)
        fh.write("\n")


def read_instance(path):
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
