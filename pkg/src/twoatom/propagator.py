"""Exact time evolution of truncated-basis states.

Two propagation paths share one interface.  Up to DENSE_LIMIT the
Hamiltonian is diagonalized once (cached on the operator) and evolution is
exact phase multiplication in the eigenbasis; above it an adaptive Lanczos
scheme approximates exp(-i H t) psi with a per-substep error estimate held
below the requested tolerance.  Complex times z with Im z <= 0 are allowed
everywhere; the spectrum is shifted by the operator's certified floor
before exponentiation so the damped factors never overflow, then the shift
is restored as a scalar.

Grid sweeps on the dense path evaluate all requested times in one BLAS
call, so the per-point work parallelizes internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import FockBasis, index_of_bare_state
from .errors import ConvergenceError, DomainError
from .operators import BoundedObservable, HermitianOperator

DENSE_LIMIT = 2000
KRYLOV_DIM = 30
DEFAULT_TOL = 1e-10
MAX_SUBSTEPS = 100_000


@dataclass
class StateVector:
    """Complex amplitude vector over a basis (basis optional for synthetic use)."""

    amplitudes: np.ndarray
    basis: FockBasis | None = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.ndim != 1:
            raise ValueError("state amplitudes must be a 1-D array")
        if self.basis is not None and len(self.amplitudes) != self.basis.dimension:
            raise ValueError("amplitude length does not match basis dimension")

    @property
    def dimension(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.basis)


def prepare_initial_state(basis: FockBasis) -> StateVector:
    """Unit amplitude on (first excited A, ground B, field vacuum)."""
    amp = np.zeros(basis.dimension, dtype=np.complex128)
    amp[index_of_bare_state(basis, 1, 0, basis.vacuum)] = 1.0
    return StateVector(amp, basis)


def _check_z(z: complex) -> complex:
    z = complex(z)
    if z.imag > 0:
        raise DomainError(
            f"complex time {z} has positive imaginary part; only Im z <= 0 "
            "keeps exp(-iHz) bounded for a Hamiltonian bounded below"
        )
    return z


def _resolve_method(method: str, dim: int) -> str:
    if method == "auto":
        return "dense" if dim <= DENSE_LIMIT else "krylov"
    if method not in ("dense", "krylov"):
        raise DomainError(f"unknown propagation method {method!r}")
    return method


# ---------------------------------------------------------------------------
# dense path
# ---------------------------------------------------------------------------


def _dense_phases(hamiltonian: HermitianOperator, z: complex) -> np.ndarray:
    """exp(-i w z) for all eigenvalues, evaluated with the floor shift."""
    w, _ = hamiltonian.eigensystem()
    floor = hamiltonian.spectral_floor
    # shifted exponent has non-positive real part for Im z <= 0
    shifted = np.exp(-1j * z * (w - floor))
    restore = np.exp(-1j * z * floor)
    if not np.isfinite(restore):
        raise DomainError(
            f"complex-time factor exp(-i*floor*z) overflows for z={z}, "
            f"floor={floor}"
        )
    return shifted * restore


def _dense_apply(hamiltonian, amplitudes, zs) -> np.ndarray:
    w, v = hamiltonian.eigensystem()
    coeff = v.conjugate().T @ amplitudes
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    phases = np.stack([_dense_phases(hamiltonian, z) for z in zs])
    return (v @ (phases * coeff).T).T  # shape (len(zs), dim)


# ---------------------------------------------------------------------------
# Lanczos path
# ---------------------------------------------------------------------------


def _lanczos_decompose(matvec, start, m):
    """Lanczos tridiagonalization with full reorthogonalization.

    Returns (V, alphas, betas, beta_next) where V has the orthonormal
    Krylov vectors as rows.  beta_next is the residual coupling out of the
    subspace (0.0 on happy breakdown, i.e. an exact invariant subspace).
    """
    dim = len(start)
    m = min(m, dim)
    v_rows = np.empty((m, dim), dtype=np.complex128)
    alphas = []
    betas = []
    scale = np.linalg.norm(start)
    v_rows[0] = start / scale
    w = matvec(v_rows[0])
    a = float(np.real(np.vdot(v_rows[0], w)))
    alphas.append(a)
    w = w - a * v_rows[0]
    j = 1
    beta_next = float(np.linalg.norm(w))
    while j < m:
        if beta_next <= 1e-14 * max(1.0, abs(a)):
            return v_rows[:j], np.array(alphas), np.array(betas), 0.0
        betas.append(beta_next)
        v_rows[j] = w / beta_next
        # full reorthogonalization, two passes
        for _ in range(2):
            overlaps = v_rows[:j] @ v_rows[j].conjugate()
            v_rows[j] -= overlaps.conjugate() @ v_rows[:j]
        v_rows[j] /= np.linalg.norm(v_rows[j])
        w = matvec(v_rows[j])
        a = float(np.real(np.vdot(v_rows[j], w)))
        alphas.append(a)
        w = w - a * v_rows[j] - betas[-1] * v_rows[j - 1]
        beta_next = float(np.linalg.norm(w))
        j += 1
    return v_rows, np.array(alphas), np.array(betas), beta_next


def _tridiag_expv(alphas, betas, z):
    """exp(-i z T) e1 for a real symmetric tridiagonal T, floor-shifted."""
    from scipy.linalg import eigh_tridiagonal

    if len(alphas) == 1:
        lam = np.array([alphas[0]])
        s = np.array([[1.0]])
    else:
        lam, s = eigh_tridiagonal(alphas, betas)
    lam0 = lam.min()
    phases = np.exp(-1j * z * (lam - lam0))
    restore = np.exp(-1j * z * lam0)
    if not np.isfinite(restore):
        raise DomainError(f"complex-time factor overflows for z={z}")
    return s @ (phases * s[0].conjugate()) * restore


def _krylov_apply(hamiltonian, amplitudes, z, tol):
    """Adaptive-substep Lanczos approximation of exp(-i H z) amplitudes."""
    mat = hamiltonian.matrix
    matvec = mat.dot
    total = abs(z)
    if total == 0.0:
        return amplitudes.copy()
    direction = z / total
    done = 0.0
    vec = amplitudes
    step = total
    substeps = 0
    last_err = 0.0
    while done < total * (1 - 1e-15):
        substeps += 1
        if substeps > MAX_SUBSTEPS:
            raise ConvergenceError(
                "Krylov propagation exceeded the substep budget",
                residual=last_err,
            )
        step = min(step, total - done)
        scale = np.linalg.norm(vec)
        if scale == 0.0:
            return vec.copy()
        v_rows, alphas, betas, beta_next = _lanczos_decompose(matvec, vec, KRYLOV_DIM)
        while True:
            z_step = step * direction
            small = _tridiag_expv(alphas, betas, z_step)
            # generalized-residual estimate: weight leaking through the
            # last Krylov coupling during this substep
            err = beta_next * abs(small[-1]) * scale
            budget = tol * max(step / total, 1e-3) * 0.25
            if err <= budget * max(1.0, scale) or beta_next == 0.0:
                last_err = err
                break
            step *= 0.5
            if step < total * 1e-12:
                raise ConvergenceError(
                    "Krylov substep collapsed without meeting tolerance",
                    residual=err,
                )
        vec = scale * (small @ v_rows)
        done += step
        step *= 1.4  # gentle growth after an accepted step
    return vec


# ---------------------------------------------------------------------------
# public interface
# ---------------------------------------------------------------------------


def evolve(hamiltonian: HermitianOperator, state: StateVector, t: float, *,
           method: str = "auto", tol: float = DEFAULT_TOL) -> StateVector:
    """Propagate a state by exp(-i H t) for real t.

    Parameters
    ----------
    method : {"auto", "dense", "krylov"}
        "auto" picks dense up to dimension 2000, Lanczos above.
    tol : float
        Per-substep error budget for the Lanczos path.
    """
    return evolve_complex(hamiltonian, state, float(t), method=method, tol=tol)


def evolve_complex(hamiltonian: HermitianOperator, state: StateVector, z: complex, *,
                   method: str = "auto", tol: float = DEFAULT_TOL) -> StateVector:
    """Propagate by exp(-i H z) for complex z with Im z <= 0.

    The result is not normalized: for Im z < 0 its norm obeys
    ||psi_z|| <= exp(Im(z) * spectral_floor) * ||psi||.
    """
    z = _check_z(z)
    chosen = _resolve_method(method, hamiltonian.dimension)
    if chosen == "dense":
        out = _dense_apply(hamiltonian, state.amplitudes, [z])[0]
    else:
        out = _krylov_apply(hamiltonian, state.amplitudes, z, tol)
    return StateVector(out, state.basis)


def evolve_grid(hamiltonian: HermitianOperator, state: StateVector, times, *,
                method: str = "auto", tol: float = DEFAULT_TOL) -> np.ndarray:
    """States at many real times; shape (len(times), dim).

    The dense path evaluates every grid point from one eigendecomposition.
    The Lanczos path walks the grid sequentially, reusing the state.
    """
    times = np.asarray(times, dtype=float)
    chosen = _resolve_method(method, hamiltonian.dimension)
    if chosen == "dense":
        return _dense_apply(hamiltonian, state.amplitudes, times)
    out = np.empty((len(times), state.dimension), dtype=np.complex128)
    current = state.amplitudes
    t_now = 0.0
    for i, t in enumerate(times):
        dt = float(t) - t_now
        if dt < 0:
            raise DomainError("time grid must be non-decreasing for the Krylov path")
        if dt > 0:
            current = _krylov_apply(hamiltonian, current, dt, tol)
            t_now = float(t)
        out[i] = current
    return out


def expectation(observable: BoundedObservable, state: StateVector) -> float:
    """<psi|O|psi> as a real number.

    When the observable carries a square-root factor W (projectors always
    do), the value is computed as ||W psi||^2, which keeps it inside
    [0, ||psi||^2] by construction rather than by clipping.
    """
    amp = state.amplitudes
    if observable.sqrt_factor is not None:
        half = observable.sqrt_factor @ amp
        return float(np.real(np.vdot(half, half)))
    return float(np.real(np.vdot(amp, observable.matrix @ amp)))


def expectation_grid(observable: BoundedObservable, states: np.ndarray) -> np.ndarray:
    """Expectation values for a stack of states, shape (n_times, dim)."""
    if observable.sqrt_factor is not None:
        half = observable.sqrt_factor @ states.T
        return np.real(np.einsum("ij,ij->j", half.conjugate(), half))
    tmp = observable.matrix @ states.T
    return np.real(np.einsum("ij,ij->j", states.T.conjugate(), tmp))
