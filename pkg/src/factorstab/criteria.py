"""Selection criteria for the number of factors.

Each criterion assigns a score to every candidate k in 1..kmax and selects
the argmin (ties broken toward the smallest k, the conservative choice).
The stability criteria add the split-sample instability ins(k) to a
structural penalty that decreases in k and lives in [0, 1]:

* SC1(k) = (kmax - k)/kmax + ins(k)
* SC2(k) = l(k)/l(0) + ins(k), with l(k) = sum_{j>k..kmax} log(sigma_j + 1)
  over the leading kmax covariance eigenvalues and l(kmax) = 0
* SC3(k) = log(1 + tail(k)/p) / log(1 + tail(0)/p) + ins(k), with tail(k)
  the sum of squared covariance eigenvalues beyond the k-th

The baseline eigenvalue-penalty criterion, for comparison:

* IC(k) = log(tail(k)/p) + k * g(n, p), g(n, p) = ((n+p)/(np)) log(np/(n+p))

All eigenvalues are those of the full-sample covariance ``x.T @ x / n``;
the instability term is the only split-based ingredient. Logs are natural.

The AIC/BIC variants of Bai, Choi & Fujikoshi (2018, Ann. Statist. 46)
are not implemented: reproducing them requires penalty constants not
restated here, and guessing them would misrepresent the baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInput, InvalidInput
from .linalg import EigenSystem, cov_eigs, sum_sq_eigenvalues
from .stability import InstabilityCurve

CRITERION_NAMES = ("SC1", "SC2", "SC3", "IC")


@dataclass(frozen=True)
class CriterionCurve:
    """Per-k values of one criterion and its argmin selection.

    ``penalty`` is the structural (non-instability) term per k; ``ins`` is
    the instability term, or None for criteria that do not use one.
    """

    name: str
    values: np.ndarray
    selected_k: int
    penalty: np.ndarray
    ins: Optional[np.ndarray] = None

    @property
    def kmax(self) -> int:
        return len(self.values)

    def value_at(self, k: int) -> float:
        return float(self.values[k - 1])


@dataclass(frozen=True)
class WeightSequence:
    """Decreasing weights c_1 > ... > c_kmax in [0, 1] with a gap parameter.

    ``satisfies_selection_conditions(k_true)`` checks the sufficient gap
    conditions under which the weighted selector is consistent: consecutive
    gaps above delta up to k_true, and c_{k_true} - c_kmax below 1 - delta.
    """

    c: np.ndarray
    delta: float

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        object.__setattr__(self, "c", c)
        if c.ndim != 1 or len(c) < 1:
            raise InvalidInput("weights must form a non-empty vector")
        if np.any(c < 0) or np.any(c > 1):
            raise InvalidInput("weights must lie in [0, 1]")
        if np.any(np.diff(c) >= 0):
            raise InvalidInput("weights must be strictly decreasing")
        if not 0 < self.delta < 1:
            raise InvalidInput("delta must lie in (0, 1)")

    def satisfies_selection_conditions(self, k_true: int) -> bool:
        c, d = self.c, self.delta
        if not 1 <= k_true <= len(c):
            raise InvalidInput(f"k_true={k_true} outside the candidate set")
        gaps_ok = all(c[k - 1] - c[k] > d for k in range(1, k_true))
        return gaps_ok and (c[k_true - 1] - c[-1] < 1.0 - d)


def _select(name, values, penalty, ins=None) -> CriterionCurve:
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DegenerateInput(f"{name}: criterion values are not finite")
    return CriterionCurve(
        name=name,
        values=values,
        selected_k=int(np.argmin(values)) + 1,  # first min <=> smallest k
        penalty=np.asarray(penalty, dtype=np.float64),
        ins=None if ins is None else np.asarray(ins, dtype=np.float64),
    )


def sc1(ins: InstabilityCurve) -> CriterionCurve:
    """Rank-count penalty plus instability: (kmax - k)/kmax + ins(k)."""
    ks = np.arange(1, ins.kmax + 1)
    penalty = (ins.kmax - ks) / ins.kmax
    return _select("SC1", penalty + ins.ins, penalty, ins.ins)


def sc2(ins: InstabilityCurve, eigs: EigenSystem) -> CriterionCurve:
    """Log-eigenvalue-mass penalty plus instability.

    ``eigs`` must carry at least kmax leading eigenvalues of the full-sample
    covariance. Eigenvalues are clamped at zero before the logs.
    """
    if len(eigs.values) < ins.kmax:
        raise InvalidInput(
            f"need at least kmax={ins.kmax} eigenvalues, got {len(eigs.values)}"
        )
    logs = np.log(np.maximum(eigs.values[: ins.kmax], 0.0) + 1.0)
    # l[k] = sum of logs beyond position k, k = 0..kmax; l[kmax] = 0
    l = np.concatenate([np.cumsum(logs[::-1])[::-1], [0.0]])
    if l[0] <= 0.0:
        raise DegenerateInput("SC2: all leading eigenvalues are zero")
    penalty = l[1:] / l[0]
    return _select("SC2", penalty + ins.ins, penalty, ins.ins)


def _tail_sums(x, kmax: int, eigs: Optional[EigenSystem], total_sq: Optional[float]):
    """tail(k) = sum_{j>k} sigma_j^2 for k = 0..kmax, via the Frobenius total."""
    if eigs is None:
        eigs = cov_eigs(x, top=kmax)
    if total_sq is None:
        total_sq = sum_sq_eigenvalues(x)
    leading = np.maximum(eigs.values[:kmax], 0.0)
    tails = total_sq - np.concatenate([[0.0], np.cumsum(leading**2)])
    return np.maximum(tails, 0.0), total_sq


def sc3(
    ins: InstabilityCurve,
    x,
    *,
    eigs: Optional[EigenSystem] = None,
    total_sq: Optional[float] = None,
) -> CriterionCurve:
    """Scree-mass penalty plus instability.

    The penalty normalizes the log residual eigenvalue mass by its k = 0
    value, which maps it into [0, 1]. ``eigs`` and ``total_sq`` can be
    passed in when the caller already decomposed x.
    """
    x = np.asarray(x, dtype=np.float64)
    tails, total = _tail_sums(x, ins.kmax, eigs, total_sq)
    if total <= 0.0:
        raise DegenerateInput("SC3: zero data matrix")
    p = x.shape[1]
    penalty = np.log1p(tails[1:] / p) / np.log1p(total / p)
    return _select("SC3", penalty + ins.ins, penalty, ins.ins)


def ic_baseline(
    x,
    kmax: int,
    *,
    eigs: Optional[EigenSystem] = None,
    total_sq: Optional[float] = None,
) -> CriterionCurve:
    """Eigenvalue-penalty baseline: log(tail(k)/p) + k * g(n, p)."""
    x = np.asarray(x, dtype=np.float64)
    n, p = x.shape
    tails, _ = _tail_sums(x, kmax, eigs, total_sq)
    if np.any(tails[1:] <= 0.0):
        raise DegenerateInput(
            "IC: residual eigenvalue mass hits zero inside the candidate set"
        )
    ks = np.arange(1, kmax + 1)
    g = (n + p) / (n * p) * np.log(n * p / (n + p))
    penalty = ks * g
    return _select("IC", np.log(tails[1:] / p) + penalty, penalty)


def weighted_select(ins: InstabilityCurve, weights: WeightSequence) -> CriterionCurve:
    """Generic weighted selector: argmin of c_k + ins(k).

    SC1 is the special case c_k = (kmax - k)/kmax (up to its endpoint at 0).
    """
    if len(weights.c) != ins.kmax:
        raise InvalidInput(
            f"need one weight per candidate k: {len(weights.c)} != {ins.kmax}"
        )
    return _select("WeightedINS", weights.c + ins.ins, weights.c, ins.ins)


def evaluate_criteria(
    x, ins: InstabilityCurve, names=CRITERION_NAMES
) -> dict[str, CriterionCurve]:
    """Evaluate several criteria on one dataset, sharing the eigen work.

    The full-sample covariance is decomposed once and its Frobenius total
    computed once; the same instability curve feeds every criterion.
    """
    x = np.asarray(x, dtype=np.float64)
    names = list(names)
    unknown = [nm for nm in names if nm not in CRITERION_NAMES]
    if unknown:
        raise InvalidInput(f"unknown criteria: {unknown}; expected {CRITERION_NAMES}")
    eigs = cov_eigs(x, top=ins.kmax) if set(names) & {"SC2", "SC3", "IC"} else None
    total = sum_sq_eigenvalues(x) if set(names) & {"SC3", "IC"} else None
    out: dict[str, CriterionCurve] = {}
    for nm in names:
        if nm == "SC1":
            out[nm] = sc1(ins)
        elif nm == "SC2":
            out[nm] = sc2(ins, eigs)
        elif nm == "SC3":
            out[nm] = sc3(ins, x, eigs=eigs, total_sq=total)
        elif nm == "IC":
            out[nm] = ic_baseline(x, ins.kmax, eigs=eigs, total_sq=total)
    return out


def curves_to_csv_rows(curves) -> list[str]:
    """Flatten criterion curves to CSV rows.

    Schema: criterion,k,penalty,ins,value,selected — one row per (criterion,
    k); ``ins`` is empty for criteria without an instability term; selected
    is 1 on the argmin row.
    """
    rows = ["criterion,k,penalty,ins,value,selected"]
    for curve in curves:
        for k in range(1, curve.kmax + 1):
            ins_cell = "" if curve.ins is None else repr(float(curve.ins[k - 1]))
            rows.append(
                f"{curve.name},{k},{float(curve.penalty[k - 1])!r},{ins_cell},"
                f"{float(curve.values[k - 1])!r},{int(k == curve.selected_k)}"
            )
    return rows
