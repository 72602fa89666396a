"""Command line front end: run check suites from a JSON config or a builtin scenario.

    projlab run config.json
    projlab scenario halperin --seed 3 --out results/

Exit status: 0 when no check fails, 1 when one does, 2 for a bad config,
3 when reports cannot be written.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import apostol, classes, dynamics, projections, semigroup, spectral
from ._search import SamplingConfig
from .errors import ProjlabError
from .linalg import SpaceDescriptor, as_matrix, exact_norm, matrix_from_json
from .report import FAIL, PASS, CheckResult, combine, compare, dumps

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
SUMMARY_COLUMNS = ["check", "instance", "verdict", "lhs", "rhs", "slack", "runtime_ms"]


class ConfigError(ProjlabError, ValueError):
    pass


@dataclass
class RunConfig:
    space: SpaceDescriptor
    generators: list  # matrices, in config order
    expressions: list
    checks: list  # of {"name", "params"}
    seed: int = 0
    output: str = "projlab-out"
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_json(cls, obj) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        try:
            space = SpaceDescriptor.from_json(obj["space"])
        except KeyError:
            raise ConfigError("config needs a 'space'") from None
        except ProjlabError as exc:
            raise ConfigError(str(exc)) from exc
        gens = []
        for i, g in enumerate(obj.get("generators", [])):
            try:
                gens.append(_generator(g, space))
            except ProjlabError as exc:
                raise ConfigError(f"generators[{i}]: {exc}") from exc
        exprs = []
        for i, e in enumerate(obj.get("expressions", [])):
            try:
                ex = semigroup.from_json(e)
            except ProjlabError as exc:
                raise ConfigError(f"expressions[{i}]: {exc}") from exc
            bad = semigroup.validate(ex, len(gens))
            if bad:
                raise ConfigError(f"expressions[{i}]: " + "; ".join(bad))
            exprs.append(ex)
        checks = []
        for i, c in enumerate(obj.get("checks", [])):
            if not isinstance(c, dict) or c.get("name") not in CHECKS:
                raise ConfigError(f"checks[{i}]: unknown check {c!r}; known: {sorted(CHECKS)}")
            checks.append({"name": c["name"], "params": dict(c.get("params", {}))})
        seed = obj.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        cfg = cls(space, gens, exprs, checks, seed, str(obj.get("output", "projlab-out")), obj)
        for i, c in enumerate(checks):
            for t in _targets(c["params"]):
                try:
                    cfg.operator(t)
                except ConfigError as exc:
                    raise ConfigError(f"checks[{i}]: {exc}") from None
        return cfg

    def operator(self, target) -> np.ndarray:
        """Resolve ``{"generator": k}`` (1-based), ``{"expr": i}`` (0-based) or a matrix."""
        if isinstance(target, dict) and "generator" in target:
            k = target["generator"]
            if not isinstance(k, int) or not 1 <= k <= len(self.generators):
                raise ConfigError(f"generator {k!r} does not exist")
            return self.generators[k - 1]
        if isinstance(target, dict) and "expr" in target:
            i = target["expr"]
            if not isinstance(i, int) or not 0 <= i < len(self.expressions):
                raise ConfigError(f"expression {i!r} does not exist")
            return semigroup.evaluate(self.expressions[i], self.generators)
        if isinstance(target, dict) and "rows" in target:
            try:
                return as_matrix(matrix_from_json(target))
            except ProjlabError as exc:
                raise ConfigError(str(exc)) from exc
        raise ConfigError(f"cannot resolve operator {target!r}")


def _generator(g, space):
    if isinstance(g, dict) and "rows" in g:
        M = as_matrix(matrix_from_json(g))
    elif isinstance(g, dict) and "kind" in g:
        M = projections.make_projection(projections.ProjectionSpec.from_json(g), space)
    else:
        raise ConfigError(f"generator must be a matrix or a projection spec, got {g!r}")
    if M.shape[0] != space.dim:
        raise ConfigError(f"generator is {M.shape[0]}x{M.shape[0]}, space has dimension {space.dim}")
    return M


def _targets(params):
    out = [params["target"]] if "target" in params else []
    return out + list(params.get("operators", []))


def _sampling(params, seed):
    d = SamplingConfig()
    return SamplingConfig(int(params.get("samples", d.samples)), seed, int(params.get("starts", d.starts)),
                          int(params.get("iters", d.iters)), float(params.get("slack", d.slack)))


def _bounded(name, value, params, details):
    """Compare a measurement with optional ``min``/``max`` claims; a bare measurement passes."""
    parts = []
    if "max" in params:
        parts.append(compare(f"{name}<=max", value, params["max"], params.get("tol", 0.0)))
    if "min" in params:
        parts.append(compare(f"{name}>=min", value, params["min"], params.get("tol", 0.0), ">="))
    if not parts:
        return CheckResult(name, PASS, value, math.nan, 0.0, "measure", details)
    res = combine(name, parts, details)
    return res


# --- checks --------------------------------------------------------------------
# Each takes (config, params, seed) and returns a CheckResult.

def _op(cfg, params):
    return cfg.operator(params["target"])


def check_orthoprojection(cfg, params, seed):
    rep = projections.is_orthoprojection(_op(cfg, params), cfg.space, seed)
    return CheckResult("orthoprojection", PASS if rep.ok else FAIL, rep.norm, 1.0, 0.0, "<=",
                       {"report": rep})


def check_hermitian(cfg, params, seed):
    d = projections.hermitian_defect(_op(cfg, params), cfg.space, seed=seed)
    return compare("hermitian", d, 0.0, params.get("tol", 1e-8))


def check_halperin(cfg, params, seed):
    est = classes.halperin_constant(_op(cfg, params), cfg.space, _sampling(params, seed))
    return _bounded("halperin", est.value, params, {"estimate": est})


def check_d_radius(cfg, params, seed):
    R = classes.d_radius_interval(_op(cfg, params), cfg.space, seed)
    details = {"interval": R}
    if "contains" in params:
        r = float(params["contains"])
        return CheckResult("d-radius", PASS if r in R else FAIL, r, math.nan, 0.0, "in", details)
    return CheckResult("d-radius", PASS, math.nan, math.nan, 0.0, "measure", details)


def check_wprime(cfg, params, seed):
    w = classes.wprime_defect(_op(cfg, params), cfg.space, _sampling(params, seed))
    return compare("wprime", w.value, 0.0, params.get("tol", 1e-6),
                   details={"maximizer": w.maximizer, "feasible": w.feasible,
                            "isometry_tol": w.isometry_tol, "seed": seed})


def check_spectral(cfg, params, seed):
    rep = spectral.spectral_report(_op(cfg, params))
    a = math.nan if rep.amplitude is None else rep.amplitude
    if "amplitude" in params:
        return compare("spectral", a, params["amplitude"], params.get("tol", 1e-10), "==", {"report": rep})
    return CheckResult("spectral", PASS, a, math.nan, 0.0, "measure", {"report": rep})


def check_iterate(cfg, params, seed):
    T = _op(cfg, params)
    rep = dynamics.iterate(T, cfg.space, int(params.get("n_max", 100_000)), float(params.get("tol", 1e-10)))
    expect = params.get("expect", "converge")
    details = {"report": rep, "expect": expect}
    if expect == "diverge":
        return CheckResult("iterate", FAIL if rep.converged else PASS, rep.n_stop, math.nan, 0.0,
                           "diverge", details)
    if not rep.converged:
        return CheckResult("iterate", FAIL, rep.limit_residual, 0.0, 0.0, "<=", details)
    err = 0.0
    if rep.cesaro_limit is not None:
        err = exact_norm(rep.limit - rep.cesaro_limit, 2)
        details["limit_vs_ergodic"] = err
    idem = exact_norm(rep.limit @ rep.limit - rep.limit, 2)
    details["limit_idempotency"] = idem
    worst = max(err, idem if idem > 1e-8 else 0.0)
    return compare("iterate", worst, 0.0, params.get("limit_tol", 1e-6), details=details)


def check_range(cfg, params, seed):
    i = params["expr"]
    if not isinstance(i, int) or not 0 <= i < len(cfg.expressions):
        raise ConfigError(f"expression {i!r} does not exist")
    return dynamics.check_range_formula(cfg.expressions[i], cfg.generators, cfg.space,
                                        params.get("tol", 1e-6), params.get("claim_wprime", False), seed)


def check_kernels(cfg, params, seed):
    A, B = (cfg.operator(t) for t in params["operators"])
    return dynamics.check_kernel_formulas(A, B, params.get("alpha", 0.5), params.get("tol", 1e-8))


def check_decay(cfg, params, seed):
    return dynamics.check_decay_bound(_op(cfg, params), cfg.space, int(params.get("n_max", 1000)))


def check_chain(cfg, params, seed):
    return apostol.check_modulus_chain(_op(cfg, params), cfg.space, params.get("epsilon", 0.1),
                                       _sampling(params, seed))


def check_composition(cfg, params, seed):
    ops = [cfg.operator(t) for t in params["operators"]]
    w = params.get("weights", [1.0 / len(ops)] * len(ops))
    return apostol.check_composition_bounds(ops, w, cfg.space, params.get("epsilon", 0.05),
                                            _sampling(params, seed))


def check_beta(cfg, params, seed):
    return apostol.check_beta_bound(_op(cfg, params), cfg.space, params.get("epsilon", 0.1),
                                    _sampling(params, seed))


def check_amplitude(cfg, params, seed):
    p = {"slack": 0.01, **params}
    return spectral.check_amplitude_omega(_op(cfg, params), cfg.space, _sampling(p, seed))


def check_closure(cfg, params, seed):
    A, B = (cfg.operator(t) for t in params["operators"])
    return classes.closure_report(A, B, params.get("alpha", 0.5), cfg.space, _sampling(params, seed))


def check_apostol(cfg, params, seed):
    est = apostol.apostol_phi(_op(cfg, params), cfg.space, params.get("epsilon", 0.1),
                              params.get("variant", apostol.PHI), _sampling(params, seed))
    return _bounded("apostol", est.value, params, {"estimate": est})


def check_omega(cfg, params, seed):
    om = apostol.omega(_op(cfg, params), cfg.space, _sampling(params, seed))
    return _bounded("omega", om.extrapolated, params, {"estimate": om})


CHECKS = {
    "orthoprojection": check_orthoprojection,
    "hermitian": check_hermitian,
    "halperin": check_halperin,
    "d-radius": check_d_radius,
    "wprime": check_wprime,
    "spectral": check_spectral,
    "iterate": check_iterate,
    "range-formula": check_range,
    "kernel-formulas": check_kernels,
    "decay-bound": check_decay,
    "modulus-chain": check_chain,
    "composition-bounds": check_composition,
    "beta-bound": check_beta,
    "amplitude-omega": check_amplitude,
    "closure": check_closure,
    "apostol": check_apostol,
    "omega": check_omega,
}


# --- running -------------------------------------------------------------------

@dataclass
class CheckOutcome:
    index: int
    name: str
    params: dict
    seed: int
    result: CheckResult
    runtime_ms: float

    @property
    def instance(self):
        return f"{self.index:03d}-{self.name}"


def check_seed(seed: int, index: int) -> int:
    """Independent substream seed for the check at ``index``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _run_one(cfg, index, check):
    seed = check_seed(cfg.seed, index)
    t0 = time.perf_counter()
    try:
        res = CHECKS[check["name"]](cfg, check["params"], seed)
    except ConfigError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"checks[{index}] ({check['name']}): bad parameters: {exc}") from exc
    except ProjlabError as exc:
        res = CheckResult(check["name"], FAIL, details={"error": type(exc).__name__, "message": str(exc)})
    ms = 1000 * (time.perf_counter() - t0)
    return CheckOutcome(index, check["name"], check["params"], seed, res, ms)


def _threads():
    try:
        return max(1, int(os.environ.get("PROJLAB_THREADS", "1")))
    except ValueError:
        return 1


def run(cfg: RunConfig) -> list[CheckOutcome]:
    """Execute every check; the result order is the config order whatever the thread count."""
    jobs = list(enumerate(cfg.checks))
    if _threads() == 1 or len(jobs) < 2:
        return [_run_one(cfg, i, c) for i, c in jobs]
    with ThreadPoolExecutor(_threads()) as pool:
        return list(pool.map(lambda ic: _run_one(cfg, *ic), jobs))


def _csv_num(x):
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def emit_report(outcomes, cfg: RunConfig, out: Path | None = None) -> Path:
    """One JSON file per check plus ``summary.csv``; iterate checks also get a diff CSV."""
    out = Path(out or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.raw, sort_keys=True, indent=2) + "\n")
    for o in outcomes:
        doc = {"check": o.name, "instance": o.instance, "seed": o.seed, "params": o.params,
               "space": cfg.space, "verdict": o.result.verdict, "result": o.result}
        (out / f"{o.instance}.json").write_text(dumps(doc))
        rep = o.result.details.get("report")
        if isinstance(rep, dynamics.IterationReport):
            (out / f"{o.instance}-powers.csv").write_text(rep.to_csv())
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for o in outcomes:
            r = o.result
            w.writerow([o.name, o.instance, r.verdict, _csv_num(r.lhs), _csv_num(r.rhs),
                        _csv_num(r.slack), f"{o.runtime_ms:.1f}"])
    return out


def execute(cfg: RunConfig, out=None, stream=sys.stdout) -> int:
    outcomes = run(cfg)
    try:
        path = emit_report(outcomes, cfg, out)
    except OSError as exc:
        print(f"projlab: cannot write reports: {exc}", file=sys.stderr)
        return EXIT_IO
    for o in outcomes:
        print(f"{o.result.verdict:8s} {o.instance}  ({o.runtime_ms:.0f} ms)", file=stream)
    failed = sum(o.result.verdict == FAIL for o in outcomes)
    print(f"{len(outcomes)} checks, {failed} failed; reports in {path}", file=stream)
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None) -> int:
    from .scenarios import SCENARIOS, build_scenario

    ap = argparse.ArgumentParser(prog="projlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the checks in a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="report directory (overrides the config)")
    s = sub.add_parser("scenario", help="run a builtin scenario")
    s.add_argument("name", choices=sorted(SCENARIOS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    args = ap.parse_args(argv)

    try:
        if args.cmd == "run":
            try:
                raw = json.loads(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read {args.config}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config} is not valid JSON: {exc}") from exc
        else:
            raw = build_scenario(args.name, args.seed)
            raw["output"] = args.out or f"projlab-{args.name}-{args.seed}"
        cfg = RunConfig.from_json(raw)
        return execute(cfg, args.out)
    except ConfigError as exc:
        print(f"projlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
