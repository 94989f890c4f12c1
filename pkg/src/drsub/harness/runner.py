"""Experiment orchestration: offline and online runs, verification, projection timing."""

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import verify as suites
from ..algorithms import (
    DELTA,
    FW_RATIO_FLOOR,
    estimate_gradient_bound,
    frank_wolfe,
    grid_oracle_auto,
    online_sga,
    projected_gradient_ascent,
)
from ..instances import (
    FixedStream,
    GeneratorSpec,
    RevenueBatchStream,
    gen_revenue_graph,
    generate,
    load_graph,
    revenue_polytopes,
)
from ..oracles import project_dykstra, project_simplex_iterative, project_simplex_sorted
from ..polytope import contains, diameter_bound, min_inf_norm_point, scaled_simplex
from . import io as rio
from .config import ConfigError

log = logging.getLogger(__name__)

OFFLINE_FAMILIES = {
    "offline-quadratic": ("quadratic_uniform", "quadratic_exponential"),
    "offline-softmax": ("softmax_uniform", "softmax_exponential"),
    "offline-revenue": ("revenue_synthetic", "revenue_graph"),
}
ALGORITHMS = ("frank_wolfe", "projected_gradient_ascent")


class RunError(RuntimeError):
    """An instance failed; ``partial`` holds the CSV text written so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class BenchError(RuntimeError):
    pass


def instance_seed(master_seed, experiment_id, index):
    """64-bit seed: the first 8 bytes (little endian) of BLAKE2b("master:experiment:index")."""
    key = f"{int(master_seed)}:{experiment_id}:{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _mean(xs):
    # index order, so aggregates are reproducible
    xs = [x for x in xs if x is not None]
    if not xs:
        return None
    total = 0.0
    for x in xs:
        total += x
    return total / len(xs)


def _start(cfg, P):
    if cfg["algorithm"]["start"] == "zero":
        x = np.zeros(P.n)
        if not contains(P, x, 1e-12):
            raise ConfigError("start = zero but the origin is not feasible")
        return x
    return min_inf_norm_point(P)


def _oracle(F, P, a):
    res = grid_oracle_auto(F, P, a["oracle_spacing"], budget=a["oracle_budget"])
    if res is None:
        log.warning("grid oracle unavailable: grid exceeds %d points at every spacing", a["oracle_budget"])
    return res


def _spec(cfg, seed):
    g = cfg["generator"]
    return GeneratorSpec(g["family"], g["n"], g["m"], seed, cfg.generator_params())


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def offline_instance(cfg, index):
    """Run every configured algorithm on one generated instance; returns rows."""
    e, a = cfg["experiment"], cfg["algorithm"]
    seed = instance_seed(e["master_seed"], cfg.experiment_id, index)
    F, P = generate(_spec(cfg, seed))
    x1 = _start(cfg, P)
    base = {"experiment": cfg.experiment_id, "instance": index, "instance_seed": seed, "n": P.n, "m": P.m}
    timing = e["record_timing"]
    opt = None
    rows = []
    if P.n <= a["oracle_max_n"]:
        res, secs = _timed(_oracle, F, P, a)
        if res is not None:
            opt = res.value
            rows.append(dict(base, row_kind="oracle", algorithm="grid_oracle", value=res.value,
                             wall_time=secs if timing else None,
                             note=f"spacing={res.spacing!r};points={res.points}"))
    for name in a["algorithms"]:
        if name == "frank_wolfe":
            traj, secs = _timed(frank_wolfe, F, P, a["T"], a["delta"] or DELTA, x1)
        elif name == "projected_gradient_ascent":
            traj, secs = _timed(projected_gradient_ascent, F, P, a["T"], D=a["D"], G=a["G"], x1=x1)
        else:
            raise ConfigError(f"unknown algorithm {name!r}; offline runs support {', '.join(ALGORITHMS)}")
        if e["record_iterations"]:
            for t, v in enumerate(traj.values):
                rows.append(dict(base, row_kind="iteration", algorithm=name, t=t, value=v))
        final = traj.final_value
        ratio = final / opt if opt is not None and opt > 0 else None
        note = "" if opt is not None else "ratio unavailable (no oracle)"
        if name == "frank_wolfe":
            floor = FW_RATIO_FLOOR * (1.0 - float(np.max(x1 / P.u)))
            note = f"{note};floor={floor!r}" if note else f"floor={floor!r}"
        rows.append(dict(base, row_kind="summary", algorithm=name, t=a["T"], value=final,
                         ratio_vs_oracle=ratio, wall_time=secs if timing else None, note=note))
    return rows


def offline_aggregate(cfg, rows):
    out = []
    summaries = [r for r in rows if r["row_kind"] in ("summary", "oracle")]
    for name in dict.fromkeys(r["algorithm"] for r in summaries):
        rs = [r for r in summaries if r["algorithm"] == name]
        ratios = [r.get("ratio_vs_oracle") for r in rs]
        out.append({"experiment": cfg.experiment_id, "row_kind": "aggregate", "instance": "mean",
                    "n": rs[0]["n"], "algorithm": name, "t": rs[0].get("t"),
                    "value": _mean([r["value"] for r in rs]), "ratio_vs_oracle": _mean(ratios),
                    "note": f"instances={len(rs)};with_ratio={sum(r is not None for r in ratios)}"})
    return out


def _online_stream(cfg, seed):
    """Return ``(stream, P, averaged objective)``."""
    a = cfg["algorithm"]
    spec = _spec(cfg, seed)
    if a["stream"] == "fixed":
        F, P = generate(spec)
        return FixedStream(F, a["T"]), P, F
    if not spec.family.startswith("revenue"):
        raise ConfigError("stream = batches needs a revenue generator family")
    prm = spec.params
    if spec.family == "revenue_synthetic":
        graph = gen_revenue_graph(spec.n, seed, float(prm.get("avg_degree", 8.0)))
    else:
        graph = load_graph(prm["graph"], prm.get("index_base", "auto"))
    if prm.get("polytope", "down_closed") != "down_closed":
        raise ConfigError("online runs need the down-closed revenue polytope")
    p = float(prm.get("p", 1e-4))
    bv = a["batch_vertices"] if a["batch_vertices"] is not None else min(graph.n, max(20, graph.n // 10))
    stream = RevenueBatchStream(graph, bv, a["T"], p, seed)
    return stream, revenue_polytopes(graph.n)[1], stream.averaged_objective()


def online_instance(cfg, index):
    e, a = cfg["experiment"], cfg["algorithm"]
    seed = instance_seed(e["master_seed"], cfg.experiment_id, index)
    stream, P, Favg = _online_stream(cfg, seed)
    T = a["T"]
    D = a["D"] if a["D"] is not None else diameter_bound(P)
    G = a["G"] if a["G"] is not None else estimate_gradient_bound(Favg, P, a["sigma"], seed=seed % 2**32)
    x1 = _start(cfg, P)
    traj, secs = _timed(online_sga, stream, P, T, D, G, sigma=a["sigma"], seed=seed, x1=x1)
    bench_note = "benchmark=pga (approximate)"
    xstar = None
    if a["stream"] == "fixed" and P.n <= a["oracle_max_n"]:
        res = _oracle(Favg, P, a)
        if res is not None:
            xstar, bench_note = res.x, f"benchmark=grid_oracle spacing={res.spacing!r}"
    if xstar is None:
        xstar = projected_gradient_ascent(Favg, P, a["benchmark_T"], x1=x1).x
    bench = np.array([stream.next(t).value(xstar) for t in range(1, T + 1)])
    rew = np.asarray(traj.values)
    cum_r, cum_b = np.cumsum(rew), np.cumsum(bench)
    base = {"experiment": cfg.experiment_id, "instance": index, "instance_seed": seed, "n": P.n, "m": P.m}
    rows = []
    if e["record_iterations"]:
        for t in range(T):
            ratio = cum_r[t] / cum_b[t] if cum_b[t] > 0 else None
            rows.append(dict(base, row_kind="curve", algorithm="online_sga", t=t + 1, value=rew[t],
                             cumulative_reward=cum_r[t], ratio_vs_oracle=ratio))
            rows.append(dict(base, row_kind="curve", algorithm="benchmark", t=t + 1, value=bench[t],
                             cumulative_reward=cum_b[t]))
    ratio = cum_r[-1] / cum_b[-1] if cum_b[-1] > 0 else None
    rows.append(dict(base, row_kind="summary", algorithm="online_sga", t=T, value=rew[-1],
                     cumulative_reward=cum_r[-1], ratio_vs_oracle=ratio,
                     wall_time=secs if e["record_timing"] else None,
                     note=f"{bench_note};D={D!r};G={G!r}"))
    rows.append(dict(base, row_kind="summary", algorithm="benchmark", t=T, value=bench[-1],
                     cumulative_reward=cum_b[-1], note=bench_note))
    return rows


def online_aggregate(cfg, rows):
    out = []
    T = cfg["algorithm"]["T"]
    curves = {}
    for r in rows:
        if r["row_kind"] == "curve":
            curves.setdefault((r["algorithm"], r["t"]), []).append(r["cumulative_reward"])
    if curves:
        for t in range(1, T + 1):
            mr, mb = _mean(curves[("online_sga", t)]), _mean(curves[("benchmark", t)])
            out.append({"experiment": cfg.experiment_id, "row_kind": "mean_curve", "instance": "mean",
                        "algorithm": "online_sga", "t": t, "cumulative_reward": mr,
                        "ratio_vs_oracle": mr / mb if mb > 0 else None})
            out.append({"experiment": cfg.experiment_id, "row_kind": "mean_curve", "instance": "mean",
                        "algorithm": "benchmark", "t": t, "cumulative_reward": mb})
    summ = [r for r in rows if r["row_kind"] == "summary"]
    for name in ("online_sga", "benchmark"):
        rs = [r for r in summ if r["algorithm"] == name]
        out.append({"experiment": cfg.experiment_id, "row_kind": "aggregate", "instance": "mean",
                    "algorithm": name, "t": T, "cumulative_reward": _mean([r["cumulative_reward"] for r in rs]),
                    "ratio_vs_oracle": _mean([r.get("ratio_vs_oracle") for r in rs]),
                    "note": f"instances={len(rs)}"})
    return out


def _check_family(cfg):
    kind, fam = cfg.kind, cfg["generator"]["family"]
    if kind in OFFLINE_FAMILIES and fam not in OFFLINE_FAMILIES[kind]:
        raise ConfigError(f"{kind} expects generator family in {OFFLINE_FAMILIES[kind]}, got {fam!r}")


def _instances(cfg, fn):
    e = cfg["experiment"]
    idx = range(e["repeats"])
    if e["workers"] == 1:
        for i in idx:
            yield fn(cfg, i)
        return
    with ProcessPoolExecutor(max_workers=e["workers"]) as pool:
        # map yields in submission order, so rows merge in instance order
        yield from pool.map(fn, [cfg] * len(idx), idx)


def run(cfg, out=None):
    """Run an offline or online experiment and write its CSV; returns the CSV text."""
    if cfg.kind in ("verify", "project-bench"):
        raise ConfigError(f"kind {cfg.kind!r} is run with its own command")
    _check_family(cfg)
    out = out or cfg["experiment"]["out"]
    online = cfg.kind == "online-revenue"
    fn = online_instance if online else offline_instance
    rows = []
    try:
        for chunk in _instances(cfg, fn):
            rows.extend(chunk)
    except ConfigError:
        raise
    except Exception as exc:
        msg = f"instance {len({r['instance'] for r in rows})} failed: {type(exc).__name__}: {exc}"
        text = rio.write_csv(out, cfg, rows, trailer=[f"status: partial; {msg}"])
        raise RunError(msg, text) from exc
    rows.extend(online_aggregate(cfg, rows) if online else offline_aggregate(cfg, rows))
    return rio.write_csv(out, cfg, rows, trailer=["status: complete"])


def run_verify(cfg, out=None):
    """Run the property suites; returns ``(report_text, all_passed)``."""
    v, seed = cfg["verify"], cfg["experiment"]["master_seed"] % 2**32
    extra = [suites.positive_hessian_quadratic(v["n"], seed)] if v["inject_violation"] else []
    results = suites.run_all(v["trials"], seed, v["n"], v["families"], v["fw_runs"], include=extra)
    lines = []
    for r in results:
        lines.append(r.line())
        if not r.passed:
            lines.append(f"  witness: {_witness(r.witness)}")
    ok = all(r.passed for r in results)
    lines.append(f"# {sum(r.passed for r in results)}/{len(results)} suites passed")
    text = "\n".join(lines) + "\n"
    with open(out or cfg["experiment"]["out"], "w", encoding="utf-8") as fh:
        fh.write(text)
    return text, ok


def _witness(w):
    if w is None:
        return "none"
    if isinstance(w, tuple):
        return " | ".join(_witness(x) for x in w)
    return np.array2string(np.asarray(w), precision=17, separator=",", max_line_width=10**6)


def _bench_inputs(rng, n, trials):
    X = rng.normal(0.0, 1.0, (trials, n)) * rng.choice([0.1, 1.0, 3.0], size=(trials, 1))
    X += rng.choice([0.0, 0.5], size=(trials, 1))
    X[: max(1, trials // 20)] = -np.abs(X[: max(1, trials // 20)])  # all-negative inputs
    return X


def run_project_bench(cfg, out=None):
    """Time the three simplex projections on shared inputs after checking they agree."""
    e, b = cfg["experiment"], cfg["bench"]
    rows = []
    methods = (("sorted", project_simplex_sorted), ("iterative", project_simplex_iterative),
               ("dykstra", None))
    for n in b["sizes"]:
        rng = np.random.default_rng(instance_seed(e["master_seed"], cfg.experiment_id, n))
        X = _bench_inputs(rng, n, b["trials"])
        P = scaled_simplex(n)
        outs, secs = {}, {}
        for name, fn in methods:
            f = (lambda x: project_dykstra(P, x)) if fn is None else fn
            t0 = time.perf_counter()
            outs[name] = np.array([f(x) for x in X])
            secs[name] = time.perf_counter() - t0
        ref = outs["sorted"]
        for name, Y in outs.items():
            err = np.max(np.abs(Y - ref), axis=1)
            k = int(np.argmax(err))
            if err[k] > b["tol"]:
                raise BenchError(f"n={n}: {name} disagrees with sorted by {err[k]:.3e} at x={X[k].tolist()}")
            rows.append({"experiment": cfg.experiment_id, "n": n, "trials": b["trials"], "algorithm": name,
                         "total_seconds": secs[name] if e["record_timing"] else None,
                         "per_call_us": 1e6 * secs[name] / b["trials"] if e["record_timing"] else None,
                         "max_disagreement": float(err[k])})
    note = ["timings are wall-clock and vary between runs"] if e["record_timing"] else []
    return rio.write_csv(out or e["out"], cfg, rows, columns=rio.BENCH_COLUMNS, extra_header=note)
