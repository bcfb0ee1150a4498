import logging
import math
import multiprocessing as mp
import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config_service import ConfigValidationError
from .core import PathState, make_market
from .hindsight import (best_lambda, boundary_envelope_check, klinf, medium_drift_envelope_check,
                        restricted_comparator, sandwich_check, sign_check, wstar_lower_bound_check)
from .mixture import MixtureEngine, aggregate_log_wealth
from .models import Branch, ExperimentConfig, PriorKind, StreamKind, StreamSpec, Violation
from .priors import MIN_NODES_PER_SIDE, make_prior
from .regret_bounds import (aggregate_bound, classify, classify_restricted, lemma_a1_bound,
                            lemma_a2_bound, oj_bound, regret, robbins_bound,
                            robbins_conditional_bound, uniform_bound)
from .streams import (NsmAdversaryStream, get_stream, spawn_generators, stream_distribution,
                      stream_moments)

logger = logging.getLogger('VilleBet')

TRACE_COLUMNS = [
    "n", "x_n", "S_n", "V_n", "lnW_uniform", "lnW_robbins", "lnW_oj", "lnW_agg", "lnW_star",
    "lnW_star_restricted", "lambda_star", "lambda_star_location", "branch", "regret_uniform",
    "bound_uniform", "regret_robbins", "bound_robbins", "regret_oj", "bound_oj", "regret_agg",
    "bound_agg", "ville_inside", "eps_quad",
]
CHECK_COLUMNS = ["replication", "label", "n", "check", "value", "limit", "slack", "tolerance", "violated"]
LIL_COLUMNS = ["replication", "n", "S_n", "V_n", "lil_ratio", "regret_robbins", "regret_ratio", "skipped"]
AGGREGATE_ALGEBRA_TOL = 1e-9


@dataclass
class ExperimentResult:
    table: pd.DataFrame
    violations: List[Violation] = field(default_factory=list)
    checks: Optional[pd.DataFrame] = None
    summary: Dict[str, Any] = field(default_factory=dict)


class ExperimentValidator:
    """Validates experiment configuration before any engine is built."""
    @staticmethod
    def validate(config: ExperimentConfig):
        if not config.priors:
            raise ConfigValidationError("At least one prior is required")
        if not (0.0 < config.alpha < 1.0):
            raise ConfigValidationError(f"alpha must lie in (0, 1), got {config.alpha}")
        if not (0.0 < config.s0 < 1.0):
            raise ConfigValidationError(f"s0 must lie in (0, 1), got {config.s0}")
        if config.replications < 1:
            raise ConfigValidationError(f"replications must be at least 1, got {config.replications}")
        if config.nodes_per_side < MIN_NODES_PER_SIDE:
            raise ConfigValidationError(f"nodes_per_side must be at least {MIN_NODES_PER_SIDE}")
        if config.corpus_size is not None and config.corpus_size < 1:
            raise ConfigValidationError(f"corpus_size must be at least 1, got {config.corpus_size}")
        if config.checkpoints is not None:
            cps = list(config.checkpoints)
            if any(b <= a for a, b in zip(cps, cps[1:])):
                raise ConfigValidationError("checkpoints must be strictly ascending")
            if cps and (cps[0] < 1 or cps[-1] > config.stream.horizon):
                raise ConfigValidationError(f"checkpoints must lie in [1, horizon={config.stream.horizon}]")


def geometric_checkpoints(horizon: int) -> List[int]:
    """1, 2, 4, ... up to the horizon, always ending at the horizon."""
    if horizon < 1:
        return []
    points, n = [], 1
    while n < horizon:
        points.append(n)
        n *= 2
    points.append(horizon)
    return points


def resolve_workers(workers: int) -> int:
    return (os.cpu_count() or 1) if workers == 0 else max(1, workers)


def parallel_map(func: Callable, tasks: Sequence, workers: int) -> List:
    """Ordered map over tasks; a process pool when more than one worker is asked for."""
    workers = resolve_workers(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with mp.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(func, tasks, chunksize=chunksize)


def _replication_stream(config: ExperimentConfig, replication: int, engine=None):
    rng = spawn_generators(config.stream.seed, config.replications)[replication]
    return get_stream(config.stream, config.market, rng, engine=engine)


def _engine(config: ExperimentConfig, kind: PriorKind, nodes_per_side: Optional[int] = None) -> MixtureEngine:
    return MixtureEngine(make_prior(kind, config.market), config.market,
                         nodes_per_side or config.nodes_per_side, config.gl_order, config.grading_levels)


def _mixture_series(config: ExperimentConfig, values: np.ndarray, nodes_per_side: Optional[int] = None
                    ) -> Tuple[Dict[PriorKind, np.ndarray], Dict[PriorKind, float]]:
    """Per-step log-mixture of every active prior, and each prior's log mass at n = 0."""
    series, initial = {}, {}
    for kind in config.priors:
        engine = _engine(config, kind, nodes_per_side)
        initial[kind] = engine.initial_log_mass
        series[kind] = engine.step_many(values)
    return series, initial


class _CheckLog:
    """Collects every evaluated path-wise assertion with its slack."""

    def __init__(self, replication: int, label: str = ""):
        self.replication = replication
        self.label = label
        self.records: List[Dict[str, Any]] = []

    def add(self, check: str, n: int, value: Optional[float], limit: Optional[float], tolerance: float):
        """Asserts value <= limit + tolerance; skipped when either side is not applicable."""
        if value is None or limit is None:
            return
        slack = limit - value
        self.records.append({
            "replication": self.replication, "label": self.label, "n": n, "check": check,
            "value": value, "limit": limit, "slack": slack, "tolerance": tolerance,
            "violated": not (slack >= -tolerance),
        })

    def envelope(self, check: str, n: int, slack: Optional[float], tolerance: float):
        if slack is not None:
            self.add(check, n, -slack, 0.0, tolerance)


def _violations_from(checks: pd.DataFrame) -> List[Violation]:
    if checks is None or checks.empty:
        return []
    bad = checks[checks["violated"]]
    return [Violation(check=r.check, n=int(r.n), value=float(r.value), limit=float(r.limit),
                      slack=float(r.slack), replication=int(r.replication), detail=str(r.label))
            for r in bad.itertuples(index=False)]


def _log_violations(violations: List[Violation]):
    for v in violations:
        logger.error(f"Bound violation [{v.check}] rep={v.replication} n={v.n} {v.detail}: value={v.value:.10g} limit={v.limit:.10g} slack={v.slack:.3e}")


def _primary_prior(priors: Sequence[PriorKind]) -> PriorKind:
    return PriorKind.ROBBINS if PriorKind.ROBBINS in priors else priors[0]


def _trace_replication(task: Tuple[ExperimentConfig, int, str]) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
    config, replication, label = task
    cfg = config.market
    values = _replication_stream(config, replication).path()
    checkpoints = geometric_checkpoints(values.size) if config.checkpoints is None else list(config.checkpoints)

    series, initial = _mixture_series(config, values)
    shadow = _mixture_series(config, values, 2 * config.nodes_per_side)[0] if config.certify else {}
    primary = _primary_prior(config.priors)
    primary_sup = np.maximum(initial[primary], np.maximum.accumulate(series[primary])) if values.size else None
    threshold = math.log(1.0 / config.alpha)
    robbins_prior = make_prior(PriorKind.ROBBINS, cfg)
    has = {kind: kind in config.priors for kind in PriorKind}

    path = PathState(cfg, keep_values=False)
    log = _CheckLog(replication, label)
    rows, prev = [], 0
    for n in checkpoints:
        path.extend(values[prev:n])
        prev = n
        i = n - 1
        S, V = path.s, path.v
        full = best_lambda(path)
        restricted = best_lambda(path, restricted_comparator())
        branch = classify(S, V, full.location, cfg)
        lnw = {kind: float(series[kind][i]) for kind in config.priors}
        eps = max((abs(lnw[k] - float(shadow[k][i])) for k in shadow), default=0.0)
        tol = eps + config.tolerance
        inside = bool(primary_sup[i] <= threshold)

        row = dict.fromkeys(TRACE_COLUMNS)
        row.update({
            "n": n, "x_n": path.last_x, "S_n": S, "V_n": V,
            "lnW_star": full.log_wstar, "lnW_star_restricted": restricted.log_wstar,
            "lambda_star": full.lambda_star, "lambda_star_location": full.location.value,
            "branch": branch.value, "ville_inside": inside, "eps_quad": eps,
        })
        if config.certify:
            log.add("quadrature_gap", n, eps, config.max_quadrature_gap, 0.0)

        if has[PriorKind.UNIFORM]:
            r_u = regret(full.log_wstar, lnw[PriorKind.UNIFORM])
            row.update(lnW_uniform=lnw[PriorKind.UNIFORM], regret_uniform=r_u, bound_uniform=uniform_bound(n))
            log.add("uniform_bound", n, r_u, row["bound_uniform"], tol)
        if has[PriorKind.ROBBINS]:
            r_r = regret(full.log_wstar, lnw[PriorKind.ROBBINS])
            b_r = robbins_bound(branch, S, V, full.log_wstar, cfg)
            row.update(lnW_robbins=lnw[PriorKind.ROBBINS], regret_robbins=r_r, bound_robbins=b_r)
            log.add("robbins_bound", n, r_r, b_r, tol)
            log.add("lemma_a1_bound", n, r_r, lemma_a1_bound(full.log_wstar, full.lambda_star, robbins_prior, cfg), tol)
            log.add("lemma_a2_bound", n, r_r, lemma_a2_bound(full.lambda_star, full.location, V, robbins_prior, cfg), tol)
            if inside and branch in (Branch.MEDIUM_DRIFT, Branch.LARGE_DRIFT):
                log.add("conditional_bound", n, r_r, robbins_conditional_bound(branch, S, V, config.alpha, cfg), tol)
        if has[PriorKind.ORABONA_JUN]:
            r_oj = regret(restricted.log_wstar, lnw[PriorKind.ORABONA_JUN])
            oj_branch = classify_restricted(S, V, restricted.location, cfg)
            b_oj = oj_bound(oj_branch, S, V, restricted.log_wstar, cfg)
            row.update(lnW_oj=lnw[PriorKind.ORABONA_JUN], regret_oj=r_oj, bound_oj=b_oj)
            log.add("oj_bound", n, r_oj, b_oj, tol)
        if has[PriorKind.UNIFORM] and has[PriorKind.ROBBINS]:
            lnw_agg = aggregate_log_wealth(lnw[PriorKind.UNIFORM], lnw[PriorKind.ROBBINS], config.s0)
            r_agg = regret(full.log_wstar, lnw_agg)
            b_agg = aggregate_bound(row["regret_uniform"], row["regret_robbins"], config.s0)
            row.update(lnW_agg=lnw_agg, regret_agg=r_agg, bound_agg=b_agg)
            log.add("aggregate_bound", n, r_agg, b_agg, AGGREGATE_ALGEBRA_TOL)

        log.envelope("sign", n, sign_check(full, S), config.tolerance)
        log.envelope("sandwich", n, sandwich_check(full, S, V, cfg), config.tolerance)
        log.envelope("boundary_envelope", n, boundary_envelope_check(full, S, V, cfg), config.tolerance)
        log.envelope("medium_drift_envelope", n, medium_drift_envelope_check(full, S, V, cfg), config.tolerance)
        log.envelope("wstar_lower_bound", n, wstar_lower_bound_check(full, S, V), config.tolerance)

        if config.replications > 1:
            row["replication"] = replication
        rows.append(row)
    return rows, log.records


def run_trace(config: ExperimentConfig, label: str = "") -> ExperimentResult:
    """
    Runs every replication of the configured stream and evaluates all path-wise assertions at
    each checkpoint.

    Returns:
        ExperimentResult: The trace table (TRACE_COLUMNS, plus a leading replication column
        when replications > 1), the long table of evaluated checks and the violations.
    """
    ExperimentValidator.validate(config)
    logger.info(f"Trace run: m0={config.market.m0}, stream={config.stream.kind.value}, horizon={config.stream.horizon}, "
                f"priors={[p.value for p in config.priors]}, K={config.nodes_per_side}, replications={config.replications}")
    tasks = [(config, r, label) for r in range(config.replications)]
    results = parallel_map(_trace_replication, tasks, config.workers)

    rows = [row for rep_rows, _ in results for row in rep_rows]
    columns = (["replication"] if config.replications > 1 else []) + TRACE_COLUMNS
    table = pd.DataFrame(rows, columns=columns)
    checks = pd.DataFrame([rec for _, recs in results for rec in recs], columns=CHECK_COLUMNS)
    violations = _violations_from(checks)
    _log_violations(violations)
    summary = {
        "rows": len(table),
        "checks": len(checks),
        "violations": len(violations),
        "max_eps_quad": float(table["eps_quad"].max()) if len(table) else 0.0,
        "branches": sorted(table["branch"].dropna().unique().tolist()) if len(table) else [],
    }
    logger.info(f"Trace finished: {summary['rows']} rows, {summary['checks']} checks, {summary['violations']} violations, max eps_quad={summary['max_eps_quad']:.3e}")
    return ExperimentResult(table=table, violations=violations, checks=checks, summary=summary)


def growth_condition(points, weights, m0: float) -> bool:
    """True when min(m0, 1-m0)/5 < |m - m0| / (Var + (m - m0)^2) for the law (points, weights)."""
    points, weights = np.asarray(points, float), np.asarray(weights, float)
    mean = float(np.dot(weights, points))
    second = float(np.dot(weights, (points - m0) ** 2)) # Var + (m - m0)^2
    if second == 0.0:
        return False
    return min(m0, 1.0 - m0) / 5.0 < abs(mean - m0) / second


def growth_rate(config: ExperimentConfig) -> ExperimentResult:
    """
    Empirical log-wealth growth of each mixture at the horizon against the KL_inf reference.

    The stream must be iid with a known law. Rows: one per active prior plus the aggregate.
    """
    ExperimentValidator.validate(config)
    cfg = config.market
    dist = stream_distribution(config.stream)
    if dist is None:
        raise ConfigValidationError(f"Growth rates need an iid stream with a known law, got {config.stream.kind.value}")
    if config.stream.horizon < 10_000:
        logger.warning(f"Growth rate at horizon {config.stream.horizon} is dominated by the O(ln n / n) regret term")

    points, weights = dist
    reference = klinf(points, weights, cfg.m0)
    mean, var = stream_moments(config.stream)
    second = var + (mean - cfg.m0) ** 2
    self_normalized = reference / second if second > 0 else 0.0
    condition = growth_condition(points, weights, cfg.m0)

    values = _replication_stream(config, 0).path()
    n = values.size
    path = PathState(cfg, keep_values=False).extend(values)
    final = {}
    for kind in config.priors:
        engine = _engine(config, kind)
        engine.step_many(values)
        final[kind.value] = engine.log_mixture_wealth()
    if PriorKind.UNIFORM in config.priors and PriorKind.ROBBINS in config.priors:
        final["aggregate"] = aggregate_log_wealth(final["uniform"], final["robbins"], config.s0)

    rows = []
    for name, log_wealth in final.items():
        rows.append({
            "prior": name, "n": n, "V_n": path.v, "log_wealth": log_wealth,
            "growth_per_n": log_wealth / n if n else float('nan'),
            "growth_per_v": log_wealth / path.v if path.v > 0 else float('nan'),
            "klinf_reference": reference, "half_klinf_reference": 0.5 * reference,
            "self_normalized_reference": self_normalized,
            "half_self_normalized_reference": 0.5 * self_normalized,
            "condition_holds": condition,
        })
    table = pd.DataFrame(rows)

    log = _CheckLog(0, "growth")
    if "aggregate" in final and n:
        best = max(final["uniform"], final["robbins"]) / n
        log.add("aggregate_growth", n, best - 2.0 * math.log(2.0) / n, final["aggregate"] / n, 0.0)
    checks = pd.DataFrame(log.records, columns=CHECK_COLUMNS)
    violations = _violations_from(checks)
    _log_violations(violations)
    logger.info(f"Growth run finished: n={n}, klinf={reference:.6g}, condition={condition}")
    return ExperimentResult(table=table, violations=violations, checks=checks,
                            summary={"klinf_reference": reference, "condition_holds": condition})


def _lil_replication(task: Tuple[ExperimentConfig, int]) -> List[Dict[str, Any]]:
    config, replication = task
    cfg = config.market
    values = _replication_stream(config, replication).path()
    checkpoints = geometric_checkpoints(values.size) if config.checkpoints is None else list(config.checkpoints)
    robbins = _engine(config, PriorKind.ROBBINS).step_many(values)
    path = PathState(cfg, keep_values=False)
    rows, prev = [], 0
    for n in checkpoints:
        path.extend(values[prev:n])
        prev = n
        S, V = path.s, path.v
        row = {"replication": replication, "n": n, "S_n": S, "V_n": V, "lil_ratio": None,
               "regret_robbins": None, "regret_ratio": None, "skipped": True}
        if V > math.e:
            lnln_v = math.log(math.log(V))
            r_r = regret(best_lambda(path).log_wstar, float(robbins[n - 1]))
            row.update(lil_ratio=abs(S) / math.sqrt(2.0 * V * lnln_v), regret_robbins=r_r,
                       regret_ratio=r_r / lnln_v, skipped=False)
        rows.append(row)
    return rows


def lil_trace(config: ExperimentConfig) -> ExperimentResult:
    """
    Self-normalized LIL ratio |S_n| / sqrt(2 V_n ln ln V_n) and Robbins regret / ln ln V_n at
    each checkpoint; rows with V_n <= e are marked skipped.
    """
    ExperimentValidator.validate(config)
    logger.info(f"LIL run: m0={config.market.m0}, stream={config.stream.kind.value}, horizon={config.stream.horizon}, seeds={config.replications}")
    results = parallel_map(_lil_replication, [(config, r) for r in range(config.replications)], config.workers)
    table = pd.DataFrame([row for rows in results for row in rows], columns=LIL_COLUMNS)
    skipped = int(table["skipped"].sum()) if len(table) else 0
    logger.info(f"LIL run finished: {len(table)} rows, {skipped} skipped (V_n <= e)")
    return ExperimentResult(table=table, summary={"rows": len(table), "skipped": skipped})


def _ville_replication(task: Tuple[ExperimentConfig, int]) -> Dict[str, float]:
    """Supremum over n <= horizon of each tracked log-wealth on one replication."""
    config, replication = task
    sups: Dict[str, float] = {}
    stream = _replication_stream(config, replication)
    values = stream.path()
    if isinstance(stream, NsmAdversaryStream):
        sups["two_point"] = stream.running_max_log_wealth
    series, initial = _mixture_series(config, values)
    for kind, s in series.items():
        sups[kind.value] = max(initial[kind], float(s.max())) if s.size else initial[kind]
    if PriorKind.UNIFORM in series and PriorKind.ROBBINS in series:
        agg0 = aggregate_log_wealth(initial[PriorKind.UNIFORM], initial[PriorKind.ROBBINS], config.s0)
        agg = np.logaddexp(math.log(config.s0) + series[PriorKind.UNIFORM],
                           math.log1p(-config.s0) + series[PriorKind.ROBBINS])
        sups["aggregate"] = max(agg0, float(agg.max())) if agg.size else agg0
    return sups


def ville_coverage(config: ExperimentConfig) -> ExperimentResult:
    """
    Fraction of null replications whose mixture wealth ever exceeds 1/alpha, per prior and for
    the aggregate; compared with alpha + 3 binomial standard errors.
    """
    ExperimentValidator.validate(config)
    cfg = config.market
    if config.replications < 500:
        logger.warning(f"Only {config.replications} replications; the coverage check is coarse below 500")
    moments = stream_moments(config.stream)
    if moments is not None and abs(moments[0] - cfg.m0) > 1e-12:
        logger.warning(f"Stream mean {moments[0]:.6g} differs from m0={cfg.m0}; Ville's inequality does not apply")
    elif moments is None and config.stream.kind != StreamKind.NSM_ADVERSARY:
        logger.warning(f"Stream {config.stream.kind.value} is not a known null; coverage is descriptive only")

    logger.info(f"Ville coverage: alpha={config.alpha}, horizon={config.stream.horizon}, replications={config.replications}, K={config.nodes_per_side}")
    sups = parallel_map(_ville_replication, [(config, r) for r in range(config.replications)], config.workers)

    threshold = math.log(1.0 / config.alpha)
    reps = config.replications
    ci_upper = config.alpha + 3.0 * math.sqrt(config.alpha * (1.0 - config.alpha) / reps)
    log = _CheckLog(0, "ville")
    rows = []
    for name in sups[0]:
        exceed = sum(1 for s in sups if s[name] > threshold)
        rate = exceed / reps
        rows.append({"mixture": name, "alpha": config.alpha, "replications": reps, "exceedances": exceed,
                     "exceedance_rate": rate, "ci_upper": ci_upper, "within": rate <= ci_upper})
        log.add(f"ville_coverage_{name}", config.stream.horizon, rate, ci_upper, 0.0)
    table = pd.DataFrame(rows)
    checks = pd.DataFrame(log.records, columns=CHECK_COLUMNS)
    violations = _violations_from(checks)
    _log_violations(violations)
    logger.info(f"Ville coverage finished: { {r['mixture']: r['exceedance_rate'] for r in rows} } (limit {ci_upper:.4f})")
    return ExperimentResult(table=table, violations=violations, checks=checks)


def _random_stream(rng: np.random.Generator) -> Tuple[str, Dict[str, Any], StreamKind]:
    family = int(rng.integers(3))
    if family == 0:
        p = round(float(rng.uniform(0.02, 0.98)), 3)
        return f"bernoulli:p={p}", {"p": p}, StreamKind.BERNOULLI
    if family == 1:
        a, b = (round(float(v), 3) for v in rng.uniform(0.5, 5.0, size=2))
        return f"beta:a={a},b={b}", {"a": a, "b": b}, StreamKind.SCALED_BETA
    points = sorted(round(float(v), 3) for v in rng.uniform(0.0, 1.0, size=3))
    weights = [float(w) for w in rng.dirichlet(np.ones(3))]
    label = "discrete:points=" + "/".join(f"{p:g}" for p in points) + ",weights=" + "/".join(f"{w:.3f}" for w in weights)
    return label, {"points": points, "weights": weights}, StreamKind.DISCRETE


def bounds_corpus(m0_values: Sequence[float] = (0.25, 0.5, 0.7), size: Optional[int] = None,
                  seed: int = 0) -> List[Tuple[float, str, Dict[str, Any], StreamKind]]:
    """
    Streams used by check_bounds: (m0, label, params, kind).

    The fixed streams come first; when size exceeds their count the corpus is filled with
    seeded random Bernoulli, scaled Beta and three-point laws, cycling through m0_values.
    """
    corpus = []
    for m0 in m0_values:
        for p in [round(0.1 * k, 1) for k in range(1, 10)]:
            corpus.append((m0, f"bernoulli:p={p}", {"p": p}, StreamKind.BERNOULLI))
        corpus.append((m0, "beta:a=2,b=5", {"a": 2.0, "b": 5.0}, StreamKind.SCALED_BETA))
        corpus.append((m0, "discrete:points=0/0.3/1,weights=0.2/0.5/0.3",
                       {"points": [0.0, 0.3, 1.0], "weights": [0.2, 0.5, 0.3]}, StreamKind.DISCRETE))
        corpus.append((m0, "constant:x=0", {"x": 0.0}, StreamKind.CONSTANT))
        corpus.append((m0, "constant:x=1", {"x": 1.0}, StreamKind.CONSTANT))
        drift = min(1.0, m0 + 0.02)
        corpus.append((m0, f"bernoulli:p={drift}", {"p": drift}, StreamKind.BERNOULLI))
    if size is not None and size > len(corpus):
        rng = spawn_generators(seed, 1)[0]
        for i in range(size - len(corpus)):
            corpus.append((m0_values[i % len(m0_values)], *_random_stream(rng)))
    return corpus


def _bounds_task(task: Tuple[ExperimentConfig, float, str, Dict[str, Any], StreamKind, int]) -> ExperimentResult:
    base, m0, label, params, kind, index = task
    stream = StreamSpec(kind=kind, params=params, seed=base.stream.seed + index, horizon=base.stream.horizon)
    config = replace(base, market=make_market(m0), stream=stream, workers=1)
    return run_trace(config, label=f"m0={m0} {label}")


def check_bounds(config: ExperimentConfig, m0_values: Sequence[float] = (0.25, 0.5, 0.7),
                 corpus_size: Optional[int] = None) -> ExperimentResult:
    """
    Runs the full assertion suite over the random stream corpus (Bernoulli p = 0.1..0.9,
    Beta(2,5), a three-point law, Constant(0), Constant(1) and Bernoulli(m0 + 0.02)) for each m0,
    topped up with seeded random laws to corpus_size (or config.corpus_size). Rows are emitted at
    config.checkpoints, so pass 1..horizon to assert at every n.

    Returns:
        ExperimentResult: Per-check summary (evaluated, violations, min slack) and all violations.
    """
    ExperimentValidator.validate(config)
    size = config.corpus_size if corpus_size is None else corpus_size
    corpus = bounds_corpus(m0_values, size=size, seed=config.stream.seed)
    logger.info(f"check-bounds: {len(corpus)} streams, horizon={config.stream.horizon}, K={config.nodes_per_side}")
    tasks = [(config, m0, label, params, kind, i) for i, (m0, label, params, kind) in enumerate(corpus)]
    results = parallel_map(_bounds_task, tasks, config.workers)

    checks = pd.concat([r.checks for r in results], ignore_index=True)
    violations = [v for r in results for v in r.violations]
    branches = sorted({b for r in results for b in r.summary.get("branches", [])})
    if checks.empty:
        table = pd.DataFrame(columns=["check", "evaluated", "violations", "min_slack"])
    else:
        table = (checks.groupby("check")
                 .agg(evaluated=("slack", "size"), violations=("violated", "sum"), min_slack=("slack", "min"))
                 .reset_index())
    max_eps = max((r.summary.get("max_eps_quad", 0.0) for r in results), default=0.0)
    logger.info(f"check-bounds finished: {len(checks)} checks, {len(violations)} violations, branches={branches}, max eps_quad={max_eps:.3e}")
    return ExperimentResult(table=table, violations=violations, checks=checks,
                            summary={"branches": branches, "max_eps_quad": max_eps, "streams": len(corpus)})
