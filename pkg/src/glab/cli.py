"""Experiment orchestration CLI.

Subcommands: sample, solve, estimate-curve, verify, scaling-test, q-scan.
Flags override values from an optional JSON config file; every run directory
receives the fully resolved spec (seed included) so artifacts reproduce
byte-identically.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import verification
from .errors import GlabError, SizeError, ValidationError
from .estimation import (
    MODE_AUTO,
    MODES,
    CurveEstimate,
    check_curve_shape,
    estimate_curve,
    g_function,
    q_scan,
    scaling_test,
    stretching_bound_check,
)
from .geometry import (
    ANIMAL_PENALIZED,
    ANIMAL_RESTRICTED,
    MODELS,
    PATH_MODEL,
    Query,
)
from .point_process import IntensityDescriptor, sample_ppp
from .solvers import (
    solve_animal_bracket,
    solve_heuristic,
    solve_path_exact,
    solve_restricted_animal_exact,
)
from .estimation import segment_window

VERIFY_CHECKS = ("chain", "stretch", "rewire", "prune", "sprinkle", "moment")


# ---------------------------------------------------------------------------
# spec parsing
# ---------------------------------------------------------------------------


def parse_nu(text: str, dim: int) -> IntensityDescriptor:
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "dirac":
            return IntensityDescriptor.dirac_kind(float(parts[1]), float(parts[2]), dim)
        if kind == "exponential":
            weight = float(parts[2]) if len(parts) > 2 else 1.0
            return IntensityDescriptor.exponential_kind(float(parts[1]), dim, weight)
        if kind == "pareto":
            weight = float(parts[3]) if len(parts) > 3 else 1.0
            return IntensityDescriptor.pareto_kind(float(parts[1]), float(parts[2]), dim, weight)
        if kind == "mixture":
            atoms, rates = [], []
            for pair in ":".join(parts[1:]).split(";"):
                a, r = pair.split(",")
                atoms.append(float(a))
                rates.append(float(r))
            return IntensityDescriptor.mixture_kind(atoms, rates, dim)
    except (IndexError, ValueError) as exc:
        raise ValidationError("nu", f"cannot parse {text!r}: {exc}") from exc
    raise ValidationError("nu", f"unknown kind {kind!r}")


def parse_point(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise ValidationError("point", f"cannot parse {text!r}") from exc


def parse_grid(text: str) -> list[float]:
    """lo:hi:step, endpoints inclusive."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ValidationError("beta-grid", f"cannot parse {text!r}") from exc
    if step <= 0 or hi < lo:
        raise ValidationError("beta-grid", "need lo <= hi and step > 0")
    n = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(n)]


def parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise ValidationError("lengths", f"cannot parse {text!r}") from exc


def parse_q(text: str) -> float:
    if text in ("inf", "infinity", "oo"):
        return math.inf
    try:
        value = float(text)
    except ValueError as exc:
        raise ValidationError("q", f"cannot parse {text!r}") from exc
    if value < 0:
        raise ValidationError("q", "penalty must be nonnegative")
    return value


@dataclass
class ExperimentSpec:
    command: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"command": self.command}
        for k, v in sorted(self.params.items()):
            if isinstance(v, np.ndarray):
                v = v.tolist()
            elif isinstance(v, float) and math.isinf(v):
                v = "inf"
            out[k] = v
        return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glab",
        description="Greedy paths and animals on marked Poisson point processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, nu=True):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if nu:
            p.add_argument("--nu", default=None, help="kind:params, e.g. dirac:1.0:1.0")

    p = sub.add_parser("sample", help="sample one realization and dump it as JSON")
    common(p)
    p.add_argument("--window", default=None, help='JSON box, e.g. "[[0,10],[0,10]]"')

    p = sub.add_parser("solve", help="solve one value-function query")
    common(p)
    p.add_argument("--window", default=None)
    p.add_argument("--model", default=None, choices=MODELS)
    p.add_argument("--x", default=None)
    p.add_argument("--y", default=None)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--q", default=None)
    p.add_argument("--mode", default=None, choices=list(MODES))
    p.add_argument("--effort", type=int, default=None)

    p = sub.add_parser("estimate-curve", help="Monte Carlo limit-curve estimation")
    common(p)
    p.add_argument("--model", default=None, choices=MODELS)
    p.add_argument("--q", default=None)
    p.add_argument("--beta-grid", default=None, help="lo:hi:step")
    p.add_argument("--betas", default=None, help="comma list (overrides --beta-grid)")
    p.add_argument("--lengths", default=None, help="comma list of scales")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--mode", default=None, choices=list(MODES))
    p.add_argument("--effort", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--k-sigma", type=float, default=None)

    p = sub.add_parser("verify", help="run one lemma check")
    p.add_argument("check", choices=VERIFY_CHECKS)
    common(p)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("scaling-test", help="homothety vs intensity KS test")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--model", default=None, choices=[PATH_MODEL, ANIMAL_RESTRICTED])
    p.add_argument("--x", default=None)
    p.add_argument("--y", default=None)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--coupled", action="store_true")

    p = sub.add_parser("q-scan", help="penalized values across a penalty grid")
    common(p)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--q-grid", default=None, help="comma list, inf allowed")
    p.add_argument("--reps", type=int, default=None)

    return parser


def parse_spec(argv) -> ExperimentSpec:
    """Resolve CLI flags over the optional config file into a validated spec."""
    args = _build_parser().parse_args(argv)
    params: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            params.update(json.load(fh))
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None and value is not False:
            params[key] = value
    if params.get("seed") is None:
        env = os.environ.get("GLAB_SEED")
        params["seed"] = int(env) if env else 0
    params.setdefault("dim", 2)
    spec = ExperimentSpec(args.command, params)
    _validate_spec(spec)
    return spec


def _validate_spec(spec: ExperimentSpec) -> None:
    p = spec.params
    if p.get("dim", 2) < 2:
        raise ValidationError("dim", "dimension must be >= 2")
    command = spec.command
    if command in ("estimate-curve", "q-scan", "scaling-test"):
        reps = p.get("reps")
        if reps is None or reps < (200 if command == "scaling-test" else 2):
            need = 200 if command == "scaling-test" else 2
            raise ValidationError("reps", f"at least {need} replicates are required")
    if command in ("solve", "estimate-curve"):
        model = p.get("model")
        if model is None:
            raise ValidationError("model", "a model is required")
        q_text = p.get("q")
        if q_text is not None:
            if model == PATH_MODEL:
                raise ValidationError("q", "penalty is undefined for the path model")
            if model != ANIMAL_PENALIZED:
                raise ValidationError("q", f"penalty conflicts with model {model}")
    if command == "solve" and p.get("budget") is None:
        raise ValidationError("budget", "a positive budget is required")
    if command == "estimate-curve" and not (p.get("beta_grid") or p.get("betas")):
        raise ValidationError("beta-grid", "a beta grid is required")
    if command == "estimate-curve" and not p.get("lengths"):
        raise ValidationError("lengths", "a length grid is required")
    if command == "scaling-test" and not p.get("lam"):
        raise ValidationError("lambda", "a scaling factor is required")
    if command == "q-scan" and not p.get("q_grid"):
        raise ValidationError("q-grid", "a penalty grid is required")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, payload: dict) -> None:
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _run_dir(spec: ExperimentSpec) -> str:
    out = spec.params.get("out")
    if not out:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = os.path.join("runs", f"{stamp}-seed{spec.params['seed']}")
    os.makedirs(out, exist_ok=True)
    return out


def curve_csv_text(curve: CurveEstimate) -> str:
    lines = ["model,q,beta,L,replicate,value,exact"]
    for model, q, beta, length, rep, value, exact in curve.csv_rows():
        qtext = "inf" if math.isinf(q) else repr(float(q))
        lines.append(
            f"{model},{qtext},{beta!r},{length!r},{rep},{value!r},{int(exact)}"
        )
    return "\n".join(lines) + "\n"


def emit_plot_data(curve: CurveEstimate, out_dir: str) -> list[str]:
    """Write the per-replicate curve CSV plus the g-overlay companion series.

    The overlay column g(beta) * fhat(0) is the stretch bound; it is empty for
    beta below the threshold 1/sqrt(d) where g is undefined.
    """
    paths = []
    curve_path = os.path.join(out_dir, "curve.csv")
    atomic_write(curve_path, curve_csv_text(curve))
    paths.append(curve_path)
    cells = sorted(curve.fhat(), key=lambda c: c.beta)
    base = next((c for c in cells if c.beta == 0.0), None)
    lines = ["beta,fhat,stderr,overlay"]
    threshold = 1.0 / math.sqrt(curve.dim) - 1e-12
    for c in cells:
        overlay = ""
        if base is not None and c.beta >= threshold:
            overlay = repr(g_function(c.beta, curve.dim) * base.mean)
        lines.append(f"{c.beta!r},{c.mean!r},{c.stderr!r},{overlay}")
    overlay_path = os.path.join(out_dir, "overlay.csv")
    atomic_write(overlay_path, "\n".join(lines) + "\n")
    paths.append(overlay_path)
    return paths


# ---------------------------------------------------------------------------
# command runners
# ---------------------------------------------------------------------------


def _nu_from(spec: ExperimentSpec) -> IntensityDescriptor:
    p = spec.params
    dim = p.get("dim", 2)
    nu = p.get("nu")
    if nu is None:
        raise ValidationError("nu", "an intensity descriptor is required")
    if isinstance(nu, dict):
        return IntensityDescriptor.from_json({**nu, "dim": nu.get("dim", dim)})
    return parse_nu(nu, dim)


def _window_from(spec: ExperimentSpec, fallback=None):
    w = spec.params.get("window")
    if w is None:
        return fallback
    if isinstance(w, str):
        w = json.loads(w)
    return np.asarray(w, dtype=float)


def _query_from(spec: ExperimentSpec) -> Query:
    p = spec.params
    x = parse_point(p["x"]) if isinstance(p.get("x"), str) else np.asarray(p.get("x", [0.0] * p["dim"]))
    y = p.get("y")
    if isinstance(y, str):
        y = parse_point(y)
    elif y is not None:
        y = np.asarray(y, dtype=float)
    q = parse_q(p["q"]) if isinstance(p.get("q"), str) else float(p.get("q") or 0.0)
    return Query(model=p["model"], x=x, y=y, budget=float(p["budget"]), q=q)


def run_sample(spec: ExperimentSpec, out: str) -> int:
    nu = _nu_from(spec)
    window = _window_from(spec)
    if window is None:
        raise ValidationError("window", "a sampling window is required")
    cfg = sample_ppp(nu, window, spec.params["seed"])
    payload = cfg.to_json()
    payload["spec"] = spec.to_json()
    write_json(os.path.join(out, "config.json"), payload)
    print(f"sampled {cfg.n} atoms -> {out}/config.json")
    return 0


def run_solve(spec: ExperimentSpec, out: str) -> int:
    nu = _nu_from(spec)
    query = _query_from(spec)
    window = _window_from(
        spec, segment_window(query.x, query.y, query.budget, nu.dim)
    )
    cfg = sample_ppp(nu, window, spec.params["seed"])
    mode = spec.params.get("mode", "exact")
    effort = spec.params.get("effort", 150)
    if mode == "heuristic":
        result = solve_heuristic(cfg, query, effort=effort, seed=spec.params["seed"])
    elif query.model == PATH_MODEL:
        result = solve_path_exact(cfg, query.x, query.y, query.budget)
    elif query.model == ANIMAL_RESTRICTED:
        result = solve_restricted_animal_exact(cfg, query.x, query.y, query.budget)
    else:
        result = solve_animal_bracket(cfg, query, seed=spec.params["seed"])
    payload = result.to_json()
    payload["spec"] = spec.to_json()
    write_json(os.path.join(out, "result.json"), payload)
    print(json.dumps({k: payload[k] for k in payload if k != "spec"}, sort_keys=True))
    return 0


def run_estimate_curve(spec: ExperimentSpec, out: str) -> int:
    p = spec.params
    nu = _nu_from(spec)
    betas = parse_list(p["betas"]) if p.get("betas") else parse_grid(p["beta_grid"])
    lengths = parse_list(p["lengths"]) if isinstance(p["lengths"], str) else list(p["lengths"])
    q = parse_q(p["q"]) if isinstance(p.get("q"), str) else float(p.get("q") or 0.0)
    curve = estimate_curve(
        nu,
        p["model"],
        q,
        betas,
        lengths,
        replicates=int(p["reps"]),
        seed=int(p["seed"]),
        mode=p.get("mode", MODE_AUTO),
        effort=int(p.get("effort", 150)),
        workers=int(p.get("workers", 1)),
    )
    emit_plot_data(curve, out)
    shape = check_curve_shape(curve, k_sigma=float(p.get("k_sigma", 2.0)))
    summary = curve.to_json()
    summary["shape"] = shape.to_json()
    try:
        summary["stretch"] = stretching_bound_check(curve).to_json()
    except GlabError:
        summary["stretch"] = None
    summary["spec"] = spec.to_json()
    write_json(os.path.join(out, "summary.json"), summary)
    print(f"estimated {len(betas)}x{len(lengths)} cells -> {out}")
    return 0


def run_verify(spec: ExperimentSpec, out: str) -> int:
    check = spec.params["check"]
    seed = int(spec.params["seed"])
    trials = int(spec.params.get("trials", 200))
    if check == "chain":
        report = verification.check_chain(trials, seed)
    elif check == "stretch":
        half = max(trials // 2, 1)
        r2 = verification.check_stretch_bound(2, half, seed)
        r3 = verification.check_stretch_bound(3, trials - half, seed + 1)
        report = verification.CheckReport(
            "stretch",
            trials,
            r2.failures + r3.failures,
            {"d2": r2.details, "d3": r3.details},
        )
    elif check == "rewire":
        report = verification.check_rewire(trials, seed)
    elif check == "prune":
        report = verification.check_prune(trials, seed)
    elif check == "sprinkle":
        report = verification.check_sprinkle(trials, seed)
    else:
        report = verification.check_moment()
    payload = report.to_json()
    payload["spec"] = spec.to_json()
    write_json(os.path.join(out, "report.json"), payload)
    print(f"verify {check}: {'PASS' if report.passed else 'FAIL'} ({report.trials} trials)")
    return 0 if report.passed else 1


def run_scaling_test(spec: ExperimentSpec, out: str) -> int:
    p = spec.params
    nu = _nu_from(spec)
    model = p.get("model", ANIMAL_RESTRICTED)
    x = parse_point(p["x"]) if p.get("x") else np.zeros(nu.dim)
    y = parse_point(p["y"]) if p.get("y") else None
    budget = float(p.get("budget", 1.0))
    query = Query(model=model, x=x, y=y, budget=budget)
    report = scaling_test(
        nu,
        float(p["lam"]),
        query,
        int(p["reps"]),
        int(p["seed"]),
        alpha=float(p.get("alpha", 0.01)),
        couple_seeds=bool(p.get("coupled", False)),
    )
    payload = report.to_json()
    payload["spec"] = spec.to_json()
    write_json(os.path.join(out, "report.json"), payload)
    print(
        f"scaling-test lambda={report.lam}: stat={report.statistic:.4f} "
        f"crit={report.critical:.4f} {'PASS' if report.passed else 'FAIL'}"
    )
    return 0 if report.passed else 1


def run_q_scan(spec: ExperimentSpec, out: str) -> int:
    p = spec.params
    nu = _nu_from(spec)
    qs = [parse_q(tok) for tok in str(p["q_grid"]).split(",")]
    report = q_scan(
        nu,
        float(p.get("beta", 0.5)),
        float(p.get("budget", 1.0)),
        qs,
        int(p["reps"]),
        int(p["seed"]),
    )
    lines = ["q,mean_low,mean_high,exact"]
    for qv, lo, hi, ex in zip(report.qs, report.mean_low, report.mean_high, report.exact_columns):
        qtext = "inf" if math.isinf(qv) else repr(float(qv))
        lines.append(f"{qtext},{lo!r},{hi!r},{int(ex)}")
    atomic_write(os.path.join(out, "qscan.csv"), "\n".join(lines) + "\n")
    payload = report.to_json()
    payload["spec"] = spec.to_json()
    write_json(os.path.join(out, "report.json"), payload)
    print(f"q-scan: {'PASS' if report.passed else 'FAIL'} ({len(report.qs)} penalties)")
    return 0 if report.passed else 1


RUNNERS = {
    "sample": run_sample,
    "solve": run_solve,
    "estimate-curve": run_estimate_curve,
    "verify": run_verify,
    "scaling-test": run_scaling_test,
    "q-scan": run_q_scan,
}


def run(spec: ExperimentSpec) -> int:
    """Execute a validated spec; nonzero exit iff a check fails or errors occur."""
    out = _run_dir(spec)
    write_json(os.path.join(out, "spec.json"), spec.to_json())
    return RUNNERS[spec.command](spec, out)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_spec(argv)
        return run(spec)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except SizeError as exc:
        print(f"size error: {exc}", file=sys.stderr)
        return 1
    except GlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
