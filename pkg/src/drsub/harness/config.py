"""Experiment configuration files.

The format is INI as read by :mod:`configparser`::

    # comment
    [experiment]
    kind = offline-quadratic
    master_seed = 7
    repeats = 20

    [generator]
    family = quadratic_uniform
    n = 6
    m = 6

    [algorithm]
    T = 100

Every section and key is optional except ``[experiment] kind``; anything
not listed in :data:`SCHEMA` is rejected. Empty values mean "unset".
:func:`dump_config` writes every key in schema order, so
``parse_config(dump_config(cfg)) == cfg``.
"""

import configparser
from dataclasses import dataclass, field

KINDS = (
    "offline-quadratic",
    "offline-softmax",
    "offline-revenue",
    "online-revenue",
    "verify",
    "project-bench",
)


class ConfigError(ValueError):
    pass


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv):
    def parse(s):
        return tuple(conv(p.strip()) for p in s.split(",") if p.strip())
    return parse


def _seed(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return v


# section -> key -> (parser, default); a default of None means unset
SCHEMA = {
    "experiment": {
        "kind": (str, None),
        "id": (str, None),
        "master_seed": (_seed, 0),
        "repeats": (int, 20),
        "out": (str, "results.csv"),
        "record_timing": (_bool, False),
        "record_iterations": (_bool, True),
        "workers": (int, 1),
    },
    "generator": {
        "family": (str, "quadratic_uniform"),
        "n": (int, 6),
        "m": (int, 6),
        "polytope": (str, None),
        "p": (float, None),
        "avg_degree": (float, None),
        "graph": (str, None),
        "index_base": (str, None),
    },
    "algorithm": {
        "T": (int, 100),
        "delta": (float, None),
        "sigma": (float, 0.0),
        "D": (float, None),
        "G": (float, None),
        "start": (str, "min_inf_norm"),
        "algorithms": (_list(str), ("frank_wolfe", "projected_gradient_ascent")),
        "oracle_spacing": (float, 0.02),
        "oracle_max_n": (int, 8),
        "oracle_budget": (int, 10_000_000),
        "stream": (str, "batches"),
        "batch_vertices": (int, None),
        "benchmark_T": (int, 500),
    },
    "verify": {
        "trials": (int, 1000),
        "families": (_list(str), ("quadratic", "softmax", "revenue")),
        "n": (int, 5),
        "fw_runs": (int, 5),
        "inject_violation": (_bool, False),
    },
    "bench": {
        "sizes": (_list(int), (2, 10, 50)),
        "trials": (int, 1000),
        "tol": (float, 1e-8),
    },
}

STARTS = ("min_inf_norm", "zero")
STREAMS = ("batches", "fixed")


def _defaults():
    return {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}


@dataclass
class ExperimentConfig:
    """Parsed configuration; ``sections[sec][key]`` holds typed values."""

    sections: dict = field(default_factory=_defaults)

    def __getitem__(self, sec):
        return self.sections[sec]

    @property
    def kind(self):
        return self.sections["experiment"]["kind"]

    @property
    def experiment_id(self):
        return self.sections["experiment"]["id"] or self.kind

    def set(self, sec, key, value):
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key [{sec}] {key}")
        self.sections[sec][key] = value
        validate(self)

    def generator_params(self):
        g = self.sections["generator"]
        return {k: g[k] for k in ("polytope", "p", "avg_degree", "graph", "index_base") if g[k] is not None}


def validate(cfg):
    e, a = cfg["experiment"], cfg["algorithm"]
    if e["kind"] not in KINDS:
        raise ConfigError(f"[experiment] kind must be one of {', '.join(KINDS)}; got {e['kind']!r}")
    if e["repeats"] < 1:
        raise ConfigError("[experiment] repeats must be >= 1")
    if e["workers"] < 1:
        raise ConfigError("[experiment] workers must be >= 1")
    if a["T"] < 2:
        raise ConfigError("[algorithm] T must be >= 2")
    if a["sigma"] < 0:
        raise ConfigError("[algorithm] sigma must be >= 0")
    if a["start"] not in STARTS:
        raise ConfigError(f"[algorithm] start must be one of {', '.join(STARTS)}")
    if a["stream"] not in STREAMS:
        raise ConfigError(f"[algorithm] stream must be one of {', '.join(STREAMS)}")
    if a["oracle_spacing"] <= 0:
        raise ConfigError("[algorithm] oracle_spacing must be positive")
    if cfg["verify"]["trials"] < 1:
        raise ConfigError("[verify] trials must be >= 1 (zero trials give no evidence)")
    if cfg["bench"]["trials"] < 1 or any(n < 1 for n in cfg["bench"]["sizes"]):
        raise ConfigError("[bench] trials and sizes must be >= 1")
    return cfg


def parse_config(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",), empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = ExperimentConfig()
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{sec}]")
            conv, _ = SCHEMA[sec][key]
            if raw.strip() == "":
                cfg.sections[sec][key] = None
                continue
            try:
                cfg.sections[sec][key] = conv(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{source}: [{sec}] {key} = {raw!r}: {exc}") from None
    if cfg.kind is None:
        raise ConfigError(f"{source}: [experiment] kind is required")
    for sec, keys in SCHEMA.items():
        for key, (_, default) in keys.items():
            if cfg.sections[sec][key] is None and default is not None and key != "kind":
                cfg.sections[sec][key] = default
    return validate(cfg)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg):
    """Serialise every key in schema order."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key in keys:
            lines.append(f"{key} = {_fmt(cfg.sections[sec][key])}".rstrip())
        lines.append("")
    return "\n".join(lines)
