"""Causality diagnostics built on top of the propagator.

The central objects are probability time series P(t) = <psi_t|O|psi_t> for
bounded observables O.  For a Hamiltonian bounded below, such a series is
either identically zero or nonzero at almost every time; an isolated stretch
of machine zeros between nonzero values is therefore a numerical artifact,
never a causal "quiet period".  The helpers here classify series against
that dichotomy, attach the discrete log-integral witness (a finite value of
integral ln P(t) / (1 + t^2) dt is what forbids extended zero intervals),
difference two-atom runs against atom-free runs, and locate signal fronts.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basis import FockBasis, build_basis, index_of_bare_state
from .config import (AnyConfig, LatticeConfig, ModelConfig, config_fingerprint,
                     mode_table)
from .errors import ConfigError, DomainError, TwoAtomError
from .operators import (BoundedObservable, HermitianOperator, build_hamiltonian,
                        exchange_projector, excitation_observable_b,
                        local_photon_observable)
from .propagator import (StateVector, evolve_complex, evolve_grid,
                         expectation_grid, prepare_initial_state)

DEFAULT_EPSILON_ZERO = 1e-12
DEFAULT_FLOOR = 1e-30
DEFAULT_FRONT_FRACTION = 0.01

OBSERVABLE_NAMES = ("excitation_b", "exchange", "photon_region")

_BOUND_SLACK = 1e-9


def make_time_grid(t_max: float, steps: int) -> np.ndarray:
    """Uniform grid 0..t_max with `steps` intervals (steps+1 points)."""
    if t_max <= 0 or steps < 1:
        raise ConfigError("time grid needs t_max > 0 and steps >= 1")
    return np.linspace(0.0, float(t_max), int(steps) + 1)


@dataclass(frozen=True)
class ProbabilitySeries:
    """Sampled expectation values over a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    observable: str
    fingerprint: str
    signed: bool = False

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be matching 1-D arrays")
        if len(times) >= 2 and not np.all(np.diff(times) > 0):
            raise ValueError("time grid must be strictly increasing")
        lo = -1.0 - _BOUND_SLACK if self.signed else -_BOUND_SLACK
        if values.size and (values.min() < lo or values.max() > 1.0 + _BOUND_SLACK):
            raise ValueError("series values escape the unit range")

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class ZeroCandidate:
    index: int
    time: float
    value: float
    left_value: float | None
    right_value: float | None
    isolated: bool


@dataclass(frozen=True)
class DichotomyReport:
    classification: str  # "identically_zero" or "nonzero_almost_everywhere"
    zero_candidates: tuple[ZeroCandidate, ...]
    interior_plateaus: tuple[tuple[int, int], ...]
    log_integral: float
    floor_dominated: bool
    epsilon_zero: float
    floor: float


@dataclass(frozen=True)
class FrontDetection:
    detected: bool
    arrival_time: float | None
    uncertainty: float
    threshold: float
    max_abs: float


@dataclass(frozen=True)
class CutoffRow:
    cutoff: float
    modes_retained: int
    max_prob_before_cone: float | None
    log_integral: float | None
    error: str | None = None


@dataclass(frozen=True)
class CutoffSweepResult:
    rows: tuple[CutoffRow, ...]
    trend: str


# ---------------------------------------------------------------------------
# model cache
# ---------------------------------------------------------------------------


@lru_cache(maxsize=6)
def _model(config: AnyConfig):
    basis = build_basis(config)
    return basis, build_hamiltonian(basis)


@lru_cache(maxsize=4)
def _photon_observable(config: ModelConfig, region: tuple[float, float]):
    basis, _ = _model(config)
    return local_photon_observable(basis, region)


def build_model(config: AnyConfig):
    """(basis, hamiltonian) for a config, cached across calls."""
    return _model(config)


def resolve_observable(config: AnyConfig, observable, region=None) -> BoundedObservable:
    """Accept an observable instance or one of the documented names."""
    if isinstance(observable, BoundedObservable):
        return observable
    basis, _ = _model(config)
    if observable == "excitation_b":
        return excitation_observable_b(basis)
    if observable == "exchange":
        return exchange_projector(basis)
    if observable == "photon_region":
        if not isinstance(config, ModelConfig):
            raise DomainError("photon_region is defined for the box field only")
        if region is None:
            region = (0.0, config.box_length / 2.0)
        return _photon_observable(config, (float(region[0]), float(region[1])))
    raise ConfigError(
        f"unknown observable {observable!r}; expected one of {OBSERVABLE_NAMES}"
    )


# ---------------------------------------------------------------------------
# series construction
# ---------------------------------------------------------------------------


def series_from_operators(hamiltonian: HermitianOperator, initial: StateVector,
                          observable: BoundedObservable, time_grid, *,
                          method: str = "auto", tol: float = 1e-10,
                          label: str = "observable",
                          fingerprint: str = "adhoc") -> ProbabilitySeries:
    """P(t) over a grid for explicitly supplied operators.

    This is the model-independent core: any Hamiltonian bounded below and
    any 0 <= O <= 1 qualify for the dichotomy statement.
    """
    states = evolve_grid(hamiltonian, initial, time_grid, method=method, tol=tol)
    values = expectation_grid(observable, states)
    return ProbabilitySeries(np.asarray(time_grid, dtype=float), values,
                             label, fingerprint)


def probability_series(config: AnyConfig, observable, time_grid, *,
                       method: str = "auto", tol: float = 1e-10,
                       initial_state: StateVector | None = None,
                       region=None) -> ProbabilitySeries:
    """P(t) for a config, starting from (excited A, ground B, vacuum).

    Parameters
    ----------
    observable : str or BoundedObservable
        One of "excitation_b", "exchange", "photon_region", or a prebuilt
        observable on the config's basis.
    initial_state : StateVector, optional
        Override for the canonical initial state.
    """
    basis, hamiltonian = _model(config)
    obs = resolve_observable(config, observable, region=region)
    psi0 = initial_state if initial_state is not None else prepare_initial_state(basis)
    return series_from_operators(
        hamiltonian, psi0, obs, time_grid, method=method, tol=tol,
        label=obs.label, fingerprint=config_fingerprint(config),
    )


def auxiliary_function(config: AnyConfig, observable, phi: StateVector, z: complex, *,
                       method: str = "auto", tol: float = 1e-10, region=None) -> complex:
    """F_phi(z) = <phi, O exp(-i H z) psi_0> for Im z <= 0.

    For fixed phi this is analytic in the open lower half plane and
    continuous up to the real axis, where |F| is bounded by
    ||phi|| * exp(Im(z) * spectral_floor).  Its boundary values at real z
    recover probing of the probability series.
    """
    basis, hamiltonian = _model(config)
    obs = resolve_observable(config, observable, region=region)
    psi0 = prepare_initial_state(basis)
    psi_z = evolve_complex(hamiltonian, psi0, z, method=method, tol=tol)
    return complex(np.vdot(phi.amplitudes, obs.matrix @ psi_z.amplitudes))


# ---------------------------------------------------------------------------
# dichotomy classification
# ---------------------------------------------------------------------------


def log_integral(series: ProbabilitySeries, floor: float = DEFAULT_FLOOR) -> float:
    """Trapezoid value of integral ln(max(P, floor)) / (1 + t^2) dt.

    The floor regularizes grid zeros.  A finite, floor-stable value is the
    discrete witness that zeros of the series cannot fill an interval.
    """
    if floor <= 0:
        raise DomainError("floor must be positive")
    vals = np.log(np.maximum(np.abs(series.values), floor)) / (1.0 + series.times ** 2)
    return float(np.trapezoid(vals, series.times))


def dichotomy_scan(series: ProbabilitySeries, *,
                   epsilon_zero: float = DEFAULT_EPSILON_ZERO,
                   floor: float = DEFAULT_FLOOR) -> DichotomyReport:
    """Classify a series as identically zero or nonzero almost everywhere.

    Grid points below epsilon_zero become zero candidates, reported with
    their neighbours so isolation is checkable.  Interior plateaus (3 or
    more consecutive zeros flanked by nonzero values) are listed separately:
    for an exact series from a Hamiltonian bounded below they cannot occur,
    so any hit flags a numerical problem rather than physics.
    """
    values = np.abs(series.values)
    below = values < epsilon_zero
    if bool(below.all()):
        classification = "identically_zero"
    else:
        classification = "nonzero_almost_everywhere"

    candidates = []
    for i in np.nonzero(below)[0]:
        left = float(values[i - 1]) if i > 0 else None
        right = float(values[i + 1]) if i + 1 < len(values) else None
        isolated = all(v is None or v >= epsilon_zero for v in (left, right))
        candidates.append(ZeroCandidate(int(i), float(series.times[i]),
                                        float(series.values[i]), left, right,
                                        isolated))

    plateaus = []
    i = 0
    n = len(values)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        run = j - i + 1
        interior = i > 0 and j < n - 1
        if run >= 3 and interior:
            plateaus.append((int(i), int(j)))
        i = j + 1

    li = log_integral(series, floor)
    floor_dominated = bool(np.all(values <= floor))
    return DichotomyReport(
        classification=classification,
        zero_candidates=tuple(candidates),
        interior_plateaus=tuple(plateaus),
        log_integral=li,
        floor_dominated=floor_dominated,
        epsilon_zero=float(epsilon_zero),
        floor=float(floor),
    )


# ---------------------------------------------------------------------------
# weak-causality difference and front detection
# ---------------------------------------------------------------------------


def weak_causality_difference(config: AnyConfig, time_grid, *,
                              method: str = "auto", tol: float = 1e-10) -> ProbabilitySeries:
    """P_B(with A present) - P_B(A decoupled) on one shared Hilbert space.

    The subtrahend run zeroes A's coupling scale and starts from
    (ground A, ground B, vacuum); B, the field, and the truncation are
    identical in both branches, so the vacuum-fluctuation background that a
    counter-rotating coupling gives atom B cancels pointwise until a signal
    from A can reach it.
    """
    with_a = probability_series(config, "excitation_b", time_grid,
                                method=method, tol=tol)
    cfg_without = dataclasses.replace(config, coupling_scale_a=0.0)
    basis_wo, _ = _model(cfg_without)
    amp = np.zeros(basis_wo.dimension, dtype=np.complex128)
    amp[index_of_bare_state(basis_wo, 0, 0, basis_wo.vacuum)] = 1.0
    without_a = probability_series(cfg_without, "excitation_b", time_grid,
                                   method=method, tol=tol,
                                   initial_state=StateVector(amp, basis_wo))
    return ProbabilitySeries(
        with_a.times, with_a.values - without_a.values,
        "excitation_b_difference", config_fingerprint(config), signed=True,
    )


def detect_front(series: ProbabilitySeries, *,
                 threshold_fraction: float = DEFAULT_FRONT_FRACTION) -> FrontDetection:
    """First time |value| reaches threshold_fraction of the global maximum.

    The arrival estimate carries the local grid spacing as its uncertainty.
    A series of exact zeros has no front.
    """
    if not (0 < threshold_fraction <= 1):
        raise DomainError("threshold_fraction must lie in (0, 1]")
    mags = np.abs(series.values)
    max_abs = float(mags.max()) if mags.size else 0.0
    if max_abs == 0.0:
        return FrontDetection(False, None, 0.0, 0.0, 0.0)
    threshold = threshold_fraction * max_abs
    idx = int(np.argmax(mags >= threshold))
    spacing = (
        float(series.times[idx] - series.times[idx - 1])
        if idx > 0 else float(series.times[1] - series.times[0])
        if len(series.times) > 1 else 0.0
    )
    return FrontDetection(True, float(series.times[idx]), spacing,
                          float(threshold), max_abs)


# ---------------------------------------------------------------------------
# cutoff sweep
# ---------------------------------------------------------------------------


def _sweep_row(config: ModelConfig, cutoff: float, time_grid, method, tol, floor):
    cfg = dataclasses.replace(config, cutoff=float(cutoff))
    retained = len(mode_table(cfg))
    try:
        series = probability_series(cfg, "excitation_b", time_grid,
                                    method=method, tol=tol)
        before = series.times < cfg.light_cone_time
        max_prob = float(np.max(series.values[before])) if before.any() else None
        li = log_integral(series, floor)
        return CutoffRow(float(cutoff), retained, max_prob, li)
    except TwoAtomError as exc:
        return CutoffRow(float(cutoff), retained, None, None, error=str(exc))


def _classify_trend(points: list[float]) -> str:
    if len(points) < 2:
        return "constant"
    scale = max(abs(p) for p in points) or 1.0
    tol = 1e-12 * scale
    diffs = np.diff(points)
    if np.all(np.abs(diffs) <= tol):
        return "constant"
    if np.all(diffs >= -tol):
        return "increasing"
    if np.all(diffs <= tol):
        return "decreasing"
    return "non_monotone"


def cutoff_sweep(config: ModelConfig, cutoffs, time_grid, *,
                 method: str = "auto", tol: float = 1e-10,
                 floor: float = DEFAULT_FLOOR, workers: int = 1) -> CutoffSweepResult:
    """Repeat the excitation run across cutoff values and report the trend.

    Each row records the retained mode count, the maximum excitation
    probability before the light cone, and the log-integral; rows that fail
    keep their error message instead of aborting the sweep.  The observed
    trend of the pre-cone maxima is reported as is, with no expectation
    attached.  Rows can be computed concurrently (workers > 1); results
    keep the input ordering either way.
    """
    if not isinstance(config, ModelConfig):
        raise ConfigError("cutoff sweeps apply to the box-field config only")
    cutoffs = [float(c) for c in cutoffs]
    if not cutoffs:
        raise ConfigError("cutoff sweep needs at least one cutoff value")
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    if workers == 1:
        rows = [_sweep_row(config, c, time_grid, method, tol, floor) for c in cutoffs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                lambda c: _sweep_row(config, c, time_grid, method, tol, floor),
                cutoffs,
            ))
    maxima = [r.max_prob_before_cone for r in rows if r.error is None
              and r.max_prob_before_cone is not None]
    return CutoffSweepResult(tuple(rows), _classify_trend(maxima))
