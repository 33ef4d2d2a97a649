"""Monte Carlo harness: grids of simulation cells, replications, reports.

A *cell* is one (scenario, regime, n, p) combination; every cell runs R
replications. Each replication simulates a dataset, computes one
instability curve, and feeds that same curve to every requested criterion.
Replication seeds derive from (master seed, n, p, scenario, regime,
replication index), so results are independent of execution order and of
how many worker threads run them; growing R keeps the first R replications
unchanged.

Outputs: ``selection.csv`` (per cell and criterion, the selection histogram
over k and the percent-correct), ``instability.csv`` (per cell, the mean
instability curve), ``failures.csv`` (replications that raised), and one
SVG chart per cell family (selection rate vs p; mean instability vs k).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .criteria import CRITERION_NAMES, evaluate_criteria
from .errors import InvalidInput, ParseError
from .rng import _seed_sequence
from .simulate import (
    REGIMES,
    SCENARIOS,
    SimulationConfig,
    parse_key_values,
    simulate_dataset,
)
from .stability import InstabilityCurve, ins_curve
from .svgplot import line_chart

_SCENARIO_CODE = {name: i + 1 for i, name in enumerate(SCENARIOS)}
_REGIME_CODE = {name: i + 1 for i, name in enumerate(REGIMES)}


@dataclass(frozen=True)
class ExperimentPlan:
    """Grid of cells plus run parameters; fully determines an experiment."""

    n: int
    p_values: tuple[int, ...]
    scenarios: tuple[str, ...]
    regimes: tuple[str, ...]
    replications: int
    criteria: tuple[str, ...] = CRITERION_NAMES
    n_factors: int = 4
    kmax: int = 10
    n_splits: int = 10
    seed: int = 0
    workers: int = 1
    unit_variance_factors: bool = True

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidInput("need at least one replication")
        if not self.p_values:
            raise InvalidInput("need at least one value of p")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise InvalidInput(f"unknown scenario {s!r}")
        for r in self.regimes:
            if r not in REGIMES:
                raise InvalidInput(f"unknown regime {r!r}")
        for c in self.criteria:
            if c not in CRITERION_NAMES:
                raise InvalidInput(f"unknown criterion {c!r}")
        if self.n_factors != 4:
            raise InvalidInput("named signal regimes define exactly 4 factors")
        if self.workers < 1:
            raise InvalidInput("workers must be >= 1")

    def cells(self) -> list[tuple[str, str, int]]:
        return [
            (s, r, p)
            for s in self.scenarios
            for r in self.regimes
            for p in self.p_values
        ]


@dataclass
class CellResult:
    scenario: str
    regime: str
    n: int
    p: int
    replications: int
    counts: dict[str, np.ndarray]  # criterion -> histogram over k = 1..kmax
    pct_correct: dict[str, float]
    mean_ins: np.ndarray
    errors: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def failed(self) -> bool:
        return bool(self.errors)


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    cells: list[CellResult]

    @property
    def failed_cells(self) -> list[CellResult]:
        return [c for c in self.cells if c.failed]


def _replication_seeds(plan: ExperimentPlan, scenario, regime, p, rep) -> tuple[int, int]:
    """(dataset seed, split seed) for one replication, content-addressed."""
    key = (
        plan.n,
        p,
        _SCENARIO_CODE[scenario],
        _REGIME_CODE[regime],
        rep,
    )
    state = _seed_sequence(plan.seed, key).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def run_replication(
    config: SimulationConfig,
    kmax: int,
    n_splits: int,
    criteria,
    split_seed: int | None = None,
) -> tuple[dict[str, int], InstabilityCurve]:
    """Simulate one dataset and apply every criterion to it.

    Returns the selected k per criterion plus the instability curve they
    shared. ``split_seed`` defaults to the dataset seed.
    """
    data = simulate_dataset(config)
    curve = ins_curve(
        data.x,
        kmax,
        n_splits,
        config.seed if split_seed is None else split_seed,
    )
    curves = evaluate_criteria(data.x, curve, names=criteria)
    return {name: c.selected_k for name, c in curves.items()}, curve


def _run_cell(plan: ExperimentPlan, scenario: str, regime: str, p: int) -> CellResult:
    t0 = time.perf_counter()
    counts = {c: np.zeros(plan.kmax, dtype=np.int64) for c in plan.criteria}
    ins_sum = np.zeros(plan.kmax)
    errors: list[str] = []

    def one_rep(rep: int):
        data_seed, split_seed = _replication_seeds(plan, scenario, regime, p, rep)
        config = SimulationConfig(
            n=plan.n,
            p=p,
            n_factors=plan.n_factors,
            scenario=scenario,
            regime=regime,
            seed=data_seed,
            unit_variance_factors=plan.unit_variance_factors,
        )
        return run_replication(config, plan.kmax, plan.n_splits, plan.criteria,
                               split_seed=split_seed)

    reps = range(plan.replications)
    if plan.workers > 1:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(lambda r: _guard(one_rep, r), reps))
    else:
        outcomes = [_guard(one_rep, r) for r in reps]

    for rep, outcome in enumerate(outcomes):
        if isinstance(outcome, Exception):
            # a failed replication aborts the cell rather than biasing it
            errors.append(f"replication {rep}: {outcome}")
            continue
        selections, curve = outcome
        for name, k in selections.items():
            counts[name][k - 1] += 1
        ins_sum += curve.ins

    if errors:
        return CellResult(
            scenario, regime, plan.n, p, plan.replications,
            counts={}, pct_correct={}, mean_ins=np.full(plan.kmax, np.nan),
            errors=errors, seconds=time.perf_counter() - t0,
        )
    pct = {
        name: float(100.0 * counts[name][plan.n_factors - 1] / plan.replications)
        for name in plan.criteria
    }
    return CellResult(
        scenario, regime, plan.n, p, plan.replications,
        counts=counts, pct_correct=pct, mean_ins=ins_sum / plan.replications,
        seconds=time.perf_counter() - t0,
    )


def _guard(fn, rep):
    try:
        return fn(rep)
    except Exception as exc:  # recorded, never silently dropped
        return exc


def run_experiment(plan: ExperimentPlan, progress=None) -> ExperimentResult:
    """Run every cell of the plan; deterministic in the plan alone."""
    cells = []
    for scenario, regime, p in plan.cells():
        cell = _run_cell(plan, scenario, regime, p)
        cells.append(cell)
        if progress is not None:
            status = "FAILED" if cell.failed else ", ".join(
                f"{c}={cell.pct_correct[c]:.0f}%" for c in plan.criteria
            )
            progress(
                f"{scenario}({regime}) n={cell.n} p={cell.p}: {status} "
                f"[{cell.seconds:.1f}s]"
            )
    return ExperimentResult(plan=plan, cells=cells)


# --- reports ----------------------------------------------------------------


def emit_reports(result: ExperimentResult, outdir) -> list[Path]:
    """Write selection/instability/failure CSVs and the SVG charts.

    Returns the written paths. CSV float cells use repr, so parsing them
    back recovers the exact values.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    plan = result.plan
    written = []

    k_cols = ",".join(f"count_k{k}" for k in range(1, plan.kmax + 1))
    sel_lines = [f"scenario,regime,n,p,criterion,pct_correct,{k_cols}"]
    ins_lines = ["scenario,regime,n,p,k,mean_ins"]
    fail_lines = ["scenario,regime,n,p,error"]
    for cell in result.cells:
        prefix = f"{cell.scenario},{cell.regime},{cell.n},{cell.p}"
        if cell.failed:
            for err in cell.errors:
                fail_lines.append(f'{prefix},"{err}"')
            continue
        for name in plan.criteria:
            hist = ",".join(str(int(v)) for v in cell.counts[name])
            sel_lines.append(
                f"{prefix},{name},{cell.pct_correct[name]!r},{hist}"
            )
        for k in range(1, plan.kmax + 1):
            ins_lines.append(f"{prefix},{k},{float(cell.mean_ins[k - 1])!r}")

    for fname, lines in (
        ("selection.csv", sel_lines),
        ("instability.csv", ins_lines),
        ("failures.csv", fail_lines),
    ):
        path = outdir / fname
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

    # one chart pair per (scenario, regime): selection rate vs p, mean ins vs k
    for scenario in plan.scenarios:
        for regime in plan.regimes:
            group = [
                c for c in result.cells
                if c.scenario == scenario and c.regime == regime and not c.failed
            ]
            if not group:
                continue
            group.sort(key=lambda c: c.p)
            sel_series = [
                (name, [float(c.p) for c in group],
                 [c.pct_correct[name] for c in group])
                for name in plan.criteria
            ]
            path = outdir / f"selection_{scenario}{regime}.svg"
            path.write_text(
                line_chart(
                    sel_series,
                    f"Correct selection, {scenario}({regime}), n={plan.n}",
                    "number of features p",
                    "% correct",
                    y_range=(0.0, 100.0),
                ),
                encoding="utf-8",
            )
            written.append(path)
            ks = [float(k) for k in range(1, plan.kmax + 1)]
            ins_series = [
                (f"p={c.p}", ks, [float(v) for v in c.mean_ins]) for c in group
            ]
            path = outdir / f"instability_{scenario}{regime}.svg"
            path.write_text(
                line_chart(
                    ins_series,
                    f"Mean loading instability, {scenario}({regime}), n={plan.n}",
                    "candidate k",
                    "mean instability",
                    y_range=(0.0, 1.0),
                ),
                encoding="utf-8",
            )
            written.append(path)
    return written


# --- plan files and stock plans ----------------------------------------------


def desk_plan(**overrides) -> ExperimentPlan:
    """Small grid sized for a workstation run (minutes, not hours)."""
    base = dict(
        n=500,
        p_values=(250, 400, 500, 650),
        scenarios=("S1", "S2"),
        regimes=("i", "ii", "iii"),
        replications=50,
        seed=20240601,
    )
    base.update(overrides)
    return ExperimentPlan(**base)


def paper_plan(**overrides) -> ExperimentPlan:
    """Full-scale grid (n=1500, p up to 2000, R=100); multi-hour runtime."""
    base = dict(
        n=1500,
        p_values=(500, 1000, 1500, 2000),
        scenarios=("S1", "S2"),
        regimes=("i", "ii", "iii"),
        replications=100,
        seed=20240601,
    )
    base.update(overrides)
    return ExperimentPlan(**base)


def format_plan(plan: ExperimentPlan) -> str:
    return "\n".join(
        [
            f"n = {plan.n}",
            "p = " + ",".join(str(p) for p in plan.p_values),
            "scenarios = " + ",".join(plan.scenarios),
            "regimes = " + ",".join(plan.regimes),
            f"replications = {plan.replications}",
            "criteria = " + ",".join(plan.criteria),
            f"K = {plan.n_factors}",
            f"kmax = {plan.kmax}",
            f"splits = {plan.n_splits}",
            f"seed = {plan.seed}",
            f"workers = {plan.workers}",
            f"unit_variance_factors = {'true' if plan.unit_variance_factors else 'false'}",
        ]
    ) + "\n"


def parse_plan(text: str, source: str = "<plan>") -> ExperimentPlan:
    """Plan from 'key = value' text; keys as written by format_plan."""
    kv = parse_key_values(text, source)
    missing = [k for k in ("n", "p", "replications", "seed") if k not in kv]
    if missing:
        raise ParseError(f"{source}: missing required keys: {', '.join(missing)}")
    try:
        return ExperimentPlan(
            n=int(kv["n"]),
            p_values=tuple(int(p) for p in kv["p"].split(",")),
            scenarios=tuple(kv.get("scenarios", "S1,S2").split(",")),
            regimes=tuple(kv.get("regimes", "i,ii,iii").split(",")),
            replications=int(kv["replications"]),
            criteria=tuple(kv.get("criteria", ",".join(CRITERION_NAMES)).split(",")),
            n_factors=int(kv.get("K", "4")),
            kmax=int(kv.get("kmax", "10")),
            n_splits=int(kv.get("splits", "10")),
            seed=int(kv["seed"]),
            workers=int(kv.get("workers", "1")),
            unit_variance_factors=kv.get("unit_variance_factors", "true").lower()
            not in ("false", "0", "no"),
        )
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from exc
