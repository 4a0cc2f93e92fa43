"""Time propagation: Schrodinger, Lindblad and process-map evolution.

All propagation uses fixed-step classical RK4 with Hamiltonian evaluations at
the step edges and midpoint.  The system is small (9x9) and non-stiff, and a
fixed step keeps runs deterministic and makes step-halving convergence checks
meaningful.  Density-matrix propagation re-Hermitizes after every step but
never renormalizes the trace, so trace drift stays visible as a health metric
(the Lindblad increments are traceless, so drift only reflects rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert, models
from .hilbert import DIM, QUBIT_INDICES
from .models import DriveParams

#: Hard ceiling on the integration step: at least this many steps per period
#: of the fastest angular frequency in the model.
MIN_STEPS_PER_PERIOD = 50

#: Default cap on stored samples per trajectory.
MAX_SAMPLES_DEFAULT = 2000


class IntegratorHealthError(RuntimeError):
    """Propagation drifted outside its health bounds; use a smaller dt."""


def fastest_angular_frequency(params: DriveParams) -> float:
    """Fastest angular scale of the model: max(V, 2*omega, Omega_m)."""
    return max(params.v, 2.0 * params.omega, params.omega_m)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid hitting ``t_end`` exactly.

    Construct through :meth:`build`, which derives dt from the model's
    fastest frequency and enforces the step ceiling.  Direct construction
    skips the ceiling check (used by convergence tests that deliberately
    under-resolve).
    """

    t_start: float
    t_end: float
    dt: float
    n_steps: int
    sample_stride: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.n_steps < 1 or self.sample_stride < 1:
            raise ValueError("n_steps and sample_stride must be positive")

    @classmethod
    def build(
        cls,
        params: DriveParams,
        t_end: float,
        *,
        t_start: float = 0.0,
        dt_divisor: int = MIN_STEPS_PER_PERIOD,
        dt: float | None = None,
        sample_stride: int | None = None,
        max_samples: int = MAX_SAMPLES_DEFAULT,
    ) -> "TimeGrid":
        """Grid with dt = (fastest period)/dt_divisor, adjusted downward so an
        integer number of steps lands exactly on ``t_end``.

        An explicit ``dt`` or a ``dt_divisor`` below the ceiling of
        :data:`MIN_STEPS_PER_PERIOD` steps per fastest period is rejected.
        """
        period = 2.0 * math.pi / fastest_angular_frequency(params)
        cap = period / MIN_STEPS_PER_PERIOD
        if dt is None:
            if dt_divisor < MIN_STEPS_PER_PERIOD:
                raise ValueError(
                    f"dt_divisor must be >= {MIN_STEPS_PER_PERIOD}, got {dt_divisor}"
                )
            dt = period / dt_divisor
        elif dt > cap * (1.0 + 1e-12):
            raise ValueError(f"dt {dt:.3e} exceeds the step ceiling {cap:.3e}")
        span = t_end - t_start
        n_steps = max(1, math.ceil(span / dt * (1.0 - 1e-12)))
        dt_actual = span / n_steps
        if sample_stride is None:
            sample_stride = max(1, math.ceil(n_steps / max_samples))
        return cls(
            t_start=t_start,
            t_end=t_end,
            dt=dt_actual,
            n_steps=n_steps,
            sample_stride=sample_stride,
        )

    def halved(self) -> "TimeGrid":
        """Same window with twice the steps (for convergence checks)."""
        return TimeGrid(
            t_start=self.t_start,
            t_end=self.t_end,
            dt=self.dt / 2.0,
            n_steps=self.n_steps * 2,
            sample_stride=self.sample_stride * 2,
        )

    @property
    def sample_steps(self) -> np.ndarray:
        """Step indices at which states are stored (always includes the last)."""
        steps = np.arange(0, self.n_steps + 1, self.sample_stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    @property
    def sample_times(self) -> np.ndarray:
        return self.t_start + self.dt * self.sample_steps


@dataclass(frozen=True)
class Trajectory:
    """Sampled states along one propagation.

    ``states`` has shape (n_samples, 9) for state vectors or
    (n_samples, 9, 9) for density matrices, aligned with ``times``.
    """

    times: np.ndarray
    states: np.ndarray
    params: DriveParams
    dt: float

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def basis_populations(self, index: int) -> np.ndarray:
        """Population of the basis state ``index`` at every sample."""
        if self.states.ndim == 2:
            return np.abs(self.states[:, index]) ** 2
        return np.real(self.states[:, index, index])


@dataclass(frozen=True)
class ConvergenceReport:
    """Step-halving comparison of one scalar observable."""

    value: float
    value_halved: float
    delta: float
    dt: float
    passed: bool


# Seed layout for the Hermitian process-basis propagation: the 4 projectors
# |q_i><q_i| followed, for each pair i<j, by the symmetric and antisymmetric
# Hermitian combinations of |q_i><q_j|.
_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def _process_seeds() -> np.ndarray:
    kets = [hilbert.ket(*divmod(q, 3)) for q in QUBIT_INDICES]
    seeds = np.zeros((16, DIM, DIM), dtype=complex)
    for i in range(4):
        seeds[i] = np.outer(kets[i], kets[i].conj())
    for k, (i, j) in enumerate(_PAIRS):
        e_ij = np.outer(kets[i], kets[j].conj())
        e_ji = np.outer(kets[j], kets[i].conj())
        seeds[4 + 2 * k] = e_ij + e_ji
        seeds[5 + 2 * k] = 1j * e_ij - 1j * e_ji
    return seeds


def _recombination_coefficients() -> np.ndarray:
    """coeff[i, j, b] with |q_i><q_j| image = sum_b coeff[i,j,b] * image(seed_b)."""
    coeff = np.zeros((4, 4, 16), dtype=complex)
    for i in range(4):
        coeff[i, i, i] = 1.0
    for k, (i, j) in enumerate(_PAIRS):
        coeff[i, j, 4 + 2 * k] = 0.5
        coeff[i, j, 5 + 2 * k] = -0.5j
        coeff[j, i, 4 + 2 * k] = 0.5
        coeff[j, i, 5 + 2 * k] = +0.5j
    return coeff


@dataclass(frozen=True)
class ProcessMap:
    """Linear action of the dynamics on the qubit subspace.

    ``images[s, i, j]`` is the propagated state of the basis matrix
    |q_i><q_j| (q = 00, 01, 10, 11) at sample ``s``; the map applied to any
    qubit-subspace initial matrix follows by linearity.
    """

    times: np.ndarray
    images: np.ndarray  # (n_samples, 4, 4, 9, 9)
    params: DriveParams
    grid: TimeGrid

    @property
    def basis_in(self) -> np.ndarray:
        """The 16 matrix units |q_i><q_j| embedded in the 9x9 space."""
        kets = [hilbert.ket(*divmod(q, 3)) for q in QUBIT_INDICES]
        out = np.zeros((4, 4, DIM, DIM), dtype=complex)
        for i in range(4):
            for j in range(4):
                out[i, j] = np.outer(kets[i], kets[j].conj())
        return out

    @property
    def basis_out(self) -> np.ndarray:
        """Images of the basis matrices at ``t_end``."""
        return self.images[-1]

    def apply(self, rho0: np.ndarray, sample: int = -1) -> np.ndarray:
        """Image of a qubit-subspace initial matrix at the given sample.

        ``rho0`` is a 9x9 matrix supported on the qubit subspace; its 4x4
        qubit block supplies the expansion coefficients.
        """
        block = np.asarray(rho0)[np.ix_(QUBIT_INDICES, QUBIT_INDICES)]
        return np.einsum("ij,ijab->ab", block, self.images[sample])


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, ls: list[np.ndarray]) -> np.ndarray:
    """Right-hand side of the Lindblad master equation.

    Computes ``i(rho h - h rho) + 1/2 sum_k {2 L_k rho L_k^dag
    - [L_k^dag L_k rho + rho L_k^dag L_k]}``; the leading term equals the
    standard -i[h, rho].  ``h`` must be Hermitian.
    """
    if not hilbert.is_hermitian(h, tol=1e-12 * max(1.0, float(np.max(np.abs(h))))):
        raise ValueError("lindblad_rhs requires a Hermitian Hamiltonian")
    out = 1j * (rho @ h - h @ rho)
    for op in ls:
        op_dag = op.conj().T
        op2 = op_dag @ op
        out += op @ rho @ op_dag - 0.5 * (op2 @ rho + rho @ op2)
    return out


def _schrodinger_rhs_factory(params: DriveParams):
    x = models.drive_structure(params.gate)
    v = params.v
    omega_m, omega = params.omega_m, params.omega

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        out = (omega_m * math.cos(omega * t)) * (x @ psi)
        out[..., 8] += v * psi[..., 8]
        return -1j * out

    return rhs


def _lindblad_rhs_factory(params: DriveParams):
    x = models.drive_structure(params.gate)
    v = params.v
    collapse = models.collapse_operators(params.gamma) if params.gamma > 0 else []
    pairs = [(op, op.conj().T) for op in collapse]
    # 1/2 {sum L^dag L, rho} is elementwise: the total decay operator is diagonal.
    decay = 0.5 * params.gamma * (hilbert.RYDBERG_COUNT[:, None] + hilbert.RYDBERG_COUNT[None, :])
    omega_m, omega = params.omega_m, params.omega

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        h = (omega_m * math.cos(omega * t)) * x
        h[8, 8] += v
        out = 1j * (rho @ h - h @ rho)
        if pairs:
            for op, op_dag in pairs:
                out += op @ rho @ op_dag
            out -= decay * rho
        return out

    return rhs


def _rk4_run(rhs, y0: np.ndarray, grid: TimeGrid, *, hermitize: bool):
    """Fixed-step RK4 over the grid, returning (sample_times, samples)."""
    sample_steps = grid.sample_steps
    samples = np.empty((len(sample_steps),) + y0.shape, dtype=complex)
    sample_pos = 0
    y = np.array(y0, dtype=complex)
    dt = grid.dt
    half = 0.5 * dt
    sixth = dt / 6.0
    t = grid.t_start
    if sample_steps[0] == 0:
        samples[0] = y
        sample_pos = 1
    for step in range(1, grid.n_steps + 1):
        k1 = rhs(t, y)
        k2 = rhs(t + half, y + half * k1)
        k3 = rhs(t + half, y + half * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        if hermitize:
            y = 0.5 * (y + hilbert.dagger(y))
        t = grid.t_start + step * dt
        if sample_pos < len(sample_steps) and step == sample_steps[sample_pos]:
            samples[sample_pos] = y
            sample_pos += 1
    return grid.sample_times, samples


def propagate_state(params: DriveParams, psi0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Schrodinger propagation of a pure state under the gate Hamiltonian.

    Raises :class:`IntegratorHealthError` when the final norm drifts from
    unity by more than 1e-6 (a well-resolved run stays within 1e-8).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state norm is {norm:.12f}, expected 1")
    times, states = _rk4_run(_schrodinger_rhs_factory(params), psi0, grid, hermitize=False)
    drift = abs(np.linalg.norm(states[-1]) - 1.0)
    if drift > 1e-6:
        raise IntegratorHealthError(
            f"state norm drifted by {drift:.3e} (> 1e-6); reduce dt "
            f"(current dt = {grid.dt:.3e} s)"
        )
    return Trajectory(times=times, states=states, params=params, dt=grid.dt)


def propagate_density(params: DriveParams, rho0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Lindblad propagation of a density matrix.

    Every step re-Hermitizes; every sampled state is health-checked: trace
    drift beyond 1e-6 or an eigenvalue below -1e-6 raises
    :class:`IntegratorHealthError`.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    hilbert.check_density_matrix(rho0)
    times, states = _rk4_run(_lindblad_rhs_factory(params), rho0, grid, hermitize=True)
    traces = np.abs(np.einsum("sii->s", states) - 1.0)
    if np.max(traces) > 1e-6:
        raise IntegratorHealthError(
            f"density trace drifted by {np.max(traces):.3e} (> 1e-6); reduce dt"
        )
    min_eig = float(np.min(np.linalg.eigvalsh(states)))
    if min_eig < -1e-6:
        raise IntegratorHealthError(
            f"density matrix developed eigenvalue {min_eig:.3e} (< -1e-6); reduce dt"
        )
    return Trajectory(times=times, states=states, params=params, dt=grid.dt)


def propagate_process(params: DriveParams, grid: TimeGrid) -> ProcessMap:
    """Propagate the 16 qubit-subspace basis matrices in one batched run.

    The matrix units |q_i><q_j| are decomposed into Hermitian pairs so every
    integrated initial matrix is Hermitian; images of the units are
    recombined afterwards by linearity.
    """
    seeds = _process_seeds()
    times, samples = _rk4_run(_lindblad_rhs_factory(params), seeds, grid, hermitize=True)
    # Traceless seeds must stay traceless and the projectors trace-1; the
    # Lindblad increments are exactly traceless, so drift flags a broken run.
    trace_targets = np.concatenate([np.ones(4), np.zeros(12)])
    drift = np.max(np.abs(np.einsum("sbii->sb", samples) - trace_targets))
    if drift > 1e-6:
        raise IntegratorHealthError(
            f"process-basis trace drifted by {drift:.3e} (> 1e-6); reduce dt"
        )
    images = np.einsum("ijb,sbxy->sijxy", _recombination_coefficients(), samples)
    return ProcessMap(times=times, images=images, params=params, grid=grid)


def convergence_check(
    params: DriveParams,
    rho0: np.ndarray,
    grid: TimeGrid,
    observable,
) -> ConvergenceReport:
    """Run at dt and dt/2 and compare ``observable`` of the final state.

    ``observable`` maps a 9x9 density matrix to a float.  The check passes
    when the two values agree within 1e-6.  Health gates are skipped here:
    the point of the check is to measure the error of whatever grid it is
    handed, including deliberately coarse ones.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    rhs = _lindblad_rhs_factory(params)
    _, coarse = _rk4_run(rhs, rho0, grid, hermitize=True)
    _, fine = _rk4_run(rhs, rho0, grid.halved(), hermitize=True)
    value = float(observable(coarse[-1]))
    value_halved = float(observable(fine[-1]))
    delta = abs(value - value_halved)
    return ConvergenceReport(
        value=value,
        value_halved=value_halved,
        delta=delta,
        dt=grid.dt,
        passed=delta <= 1e-6,
    )
