"""Synthetic data generation for the selection experiments.

Data follow the linear factor model ``X = scores @ loadings.T + noise`` with

* factor scores drawn i.i.d. uniform on [-0.5, 0.5] and, by default,
  rescaled by sqrt(12) to unit variance (see note below);
* loadings ``L = Q @ diag(mu)`` with Q the orthonormal factor of a random
  Gaussian matrix, so column j of L has norm mu_j;
* noise either homogeneous standard normal ("S1") or heteroskedastic
  ("S2"): Student-t(10) entries premultiplied by a random rotation and the
  row scaling diag(1/n, 2/n, ..., 1).

Three named signal regimes set mu for K = 4 factors:

* "i"   (strong):  (6, 5, 4, 3) * p**(1/2)
* "ii"  (weak):    (6, 5, 3, 3) * p**(1/6)
* "iii" (varying): (3, 3) * p**(1/3) + (3, 3) * p**(1/6)

Note on score variance: raw uniform [-0.5, 0.5] scores have variance 1/12,
which shrinks every signal eigenvalue by the same factor and, at these mu
scales, makes the weak regimes undetectable. The factor-model convention is
unit-variance scores, and that is the default here; pass
``unit_variance_factors=False`` to keep the raw uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidInput, ParseError
from .rng import spawn_rng

SCENARIOS = ("S1", "S2")
REGIMES = ("i", "ii", "iii")

# stream purposes under a dataset seed
_STREAM_LOADINGS = 0
_STREAM_FACTORS = 1
_STREAM_NOISE = 2
_STREAM_NOISE_ROTATION = 3


def regime_mu(regime: str, p: int) -> np.ndarray:
    """Signal strengths (loading column norms) for a named regime at width p."""
    if regime == "i":
        return np.array([6.0, 5.0, 4.0, 3.0]) * p ** 0.5
    if regime == "ii":
        return np.array([6.0, 5.0, 3.0, 3.0]) * p ** (1.0 / 6.0)
    if regime == "iii":
        return np.array([3.0 * p ** (1.0 / 3.0)] * 2 + [3.0 * p ** (1.0 / 6.0)] * 2)
    raise InvalidInput(f"unknown signal regime {regime!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class SimulationConfig:
    """Fully determines one synthetic dataset (a pure function of itself).

    Either ``regime`` (named, K must be 4) or an explicit ``mu`` vector of
    length ``n_factors`` must be given. ``noise_scale`` is a test hook;
    0 produces exactly rank-K data.
    """

    n: int
    p: int
    n_factors: int
    scenario: str
    seed: int
    regime: Optional[str] = None
    mu: Optional[tuple[float, ...]] = None
    unit_variance_factors: bool = True
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise InvalidInput(f"need n, p >= 1, got n={self.n}, p={self.p}")
        if not 1 <= self.n_factors <= min(self.n, self.p):
            raise InvalidInput(
                f"n_factors={self.n_factors} must lie in [1, min(n, p)]"
            )
        if self.scenario not in SCENARIOS:
            raise InvalidInput(
                f"unknown error scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        if self.seed < 0:
            raise InvalidInput("seed must be a non-negative 64-bit integer")
        if self.regime is None and self.mu is None:
            raise InvalidInput("either a named regime or an explicit mu is required")
        if self.regime is not None:
            if self.regime not in REGIMES:
                raise InvalidInput(f"unknown signal regime {self.regime!r}")
            if self.n_factors != 4:
                raise InvalidInput("named regimes define exactly 4 signal strengths")
        if self.mu is not None:
            if len(self.mu) != self.n_factors:
                raise InvalidInput("mu must have one entry per factor")
            if any(m <= 0 for m in self.mu):
                raise InvalidInput("signal strengths mu must be positive")
        if self.noise_scale < 0:
            raise InvalidInput("noise_scale must be non-negative")

    def mu_values(self) -> np.ndarray:
        if self.mu is not None:
            return np.asarray(self.mu, dtype=np.float64)
        return regime_mu(self.regime, self.p)


@dataclass(frozen=True)
class SimulatedDataset:
    """A generated dataset together with its ground-truth components.

    ``x == scores @ loadings.T + noise`` exactly as generated; ``scores``
    already include the unit-variance rescaling when the config asks for it,
    while ``loadings`` keep column norms equal to mu.
    """

    x: np.ndarray
    scores: np.ndarray
    loadings: np.ndarray
    config: SimulationConfig


def gen_loadings(p: int, n_factors: int, mu, rng: np.random.Generator) -> np.ndarray:
    """Loading matrix Q @ diag(mu) with orthonormal Q from a random QR.

    Column j has norm mu_j; the Gram matrix is diag(mu**2). The QR factor is
    sign-fixed (positive R diagonal) so the output is deterministic in rng.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if n_factors > p:
        raise InvalidInput(f"n_factors={n_factors} exceeds p={p}")
    if mu.shape != (n_factors,) or np.any(mu <= 0):
        raise InvalidInput("mu must be a positive vector of length n_factors")
    z = rng.standard_normal((p, n_factors))
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs * mu


def gen_factors(n: int, n_factors: int, rng: np.random.Generator) -> np.ndarray:
    """Factor scores, i.i.d. uniform on [-0.5, 0.5] (variance 1/12)."""
    if n < 1 or n_factors < 1:
        raise InvalidInput("need n, n_factors >= 1")
    return rng.uniform(-0.5, 0.5, size=(n, n_factors))


def gen_noise(
    n: int,
    p: int,
    scenario: str,
    rng: np.random.Generator,
    rotation_rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Noise matrix, already premultiplied by its row transform.

    "S1": i.i.d. standard normal. "S2": Student-t(10) entries, left-multiplied
    by a random n-by-n rotation and then scaled row-wise by (1/n, 2/n, ..., 1).
    The rotation draws from ``rotation_rng`` (defaults to ``rng``) so it can
    come from an independent stream.
    """
    if scenario == "S1":
        return rng.standard_normal((n, p))
    if scenario != "S2":
        raise InvalidInput(f"unknown error scenario {scenario!r}")
    eps = rng.standard_t(df=10, size=(n, p))
    if rotation_rng is None:
        rotation_rng = rng
    q, r = np.linalg.qr(rotation_rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    row_scale = np.arange(1, n + 1, dtype=np.float64) / n
    return row_scale[:, None] * (q @ eps)


def simulate_dataset(config: SimulationConfig) -> SimulatedDataset:
    """Generate a dataset; a pure function of the config (seed included)."""
    loadings = gen_loadings(
        config.p,
        config.n_factors,
        config.mu_values(),
        spawn_rng(config.seed, _STREAM_LOADINGS),
    )
    scores = gen_factors(
        config.n, config.n_factors, spawn_rng(config.seed, _STREAM_FACTORS)
    )
    if config.unit_variance_factors:
        scores = scores * np.sqrt(12.0)
    noise = gen_noise(
        config.n,
        config.p,
        config.scenario,
        spawn_rng(config.seed, _STREAM_NOISE),
        rotation_rng=spawn_rng(config.seed, _STREAM_NOISE_ROTATION),
    )
    x = scores @ loadings.T + config.noise_scale * noise
    return SimulatedDataset(x=x, scores=scores, loadings=loadings, config=config)


# --- plain-text config files (key = value) ---------------------------------

_CONFIG_KEYS = ("n", "p", "K", "regime", "scenario", "seed")


def format_config(config: SimulationConfig) -> str:
    """Render a config as 'key = value' lines (documented keys: n, p, K,
    regime, scenario, seed, plus mu / unit_variance_factors / noise_scale
    when they differ from defaults)."""
    lines = [
        f"n = {config.n}",
        f"p = {config.p}",
        f"K = {config.n_factors}",
        f"scenario = {config.scenario}",
        f"seed = {config.seed}",
    ]
    if config.regime is not None:
        lines.insert(3, f"regime = {config.regime}")
    if config.mu is not None:
        lines.append("mu = " + ",".join(repr(float(m)) for m in config.mu))
    if not config.unit_variance_factors:
        lines.append("unit_variance_factors = false")
    if config.noise_scale != 1.0:
        lines.append(f"noise_scale = {config.noise_scale!r}")
    return "\n".join(lines) + "\n"


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    """Build a SimulationConfig from plain text (inverse of format_config)."""
    kv = parse_key_values(text, source)
    required = [k for k in ("n", "p", "K", "scenario", "seed") if k not in kv]
    if required:
        raise ParseError(f"{source}: missing required keys: {', '.join(required)}")
    try:
        mu = None
        if "mu" in kv:
            mu = tuple(float(m) for m in kv["mu"].split(","))
        return SimulationConfig(
            n=int(kv["n"]),
            p=int(kv["p"]),
            n_factors=int(kv["K"]),
            scenario=kv["scenario"],
            seed=int(kv["seed"]),
            regime=kv.get("regime"),
            mu=mu,
            unit_variance_factors=kv.get("unit_variance_factors", "true").lower()
            not in ("false", "0", "no"),
            noise_scale=float(kv.get("noise_scale", "1.0")),
        )
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def with_seed(config: SimulationConfig, seed: int) -> SimulationConfig:
    """Copy of a config with a replaced seed."""
    return replace(config, seed=seed)
