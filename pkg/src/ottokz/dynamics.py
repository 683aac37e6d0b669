"""Single-mode open-system dynamics: Lindblad strokes, steady states, ramps.

States are 4x4 density matrices in the fixed basis |00>, |10>, |01>, |11>,
where the two slots are the occupations of the k and -k fermions.  Baths
couple through the four jump operators c_k, c_k^dag, c_-k, c_-k^dag with
independent nonnegative rates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import ModeHamiltonian, tim_mode

logger = logging.getLogger(__name__)

__all__ = [
    "BathSpec",
    "FixedDuration",
    "ToSteadyState",
    "DegenerateSteadyStateError",
    "SteadyStateNotReachedError",
    "jump_operators",
    "validate_density_matrix",
    "liouvillian_rhs",
    "liouvillian_matrix",
    "steady_state_direct",
    "evolve_dissipative",
    "evolve_unitary_ramp",
    "ramp_block_propagators",
    "apply_block_propagator",
    "energy",
    "ground_state_projector",
    "tim_hamiltonian4",
]

# Eigenvalues of a state may dip this far below zero before evolution
# routines raise; smaller dips are clipped with a logged warning.
POSITIVITY_FLOOR = -1e-10

HERMITICITY_TOL = 1e-9


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian null space has dimension > 1."""


class SteadyStateNotReachedError(RuntimeError):
    """Time evolution exhausted its step budget before converging."""


@dataclass(frozen=True)
class BathSpec:
    """Rates of the four mode-local jump operators.

    kappa1 multiplies c_k (loss), kappa2 multiplies c_k^dag (gain), kappa3
    and kappa4 are the same pair for the -k fermion.  ``label`` is free-form
    ("energizing" / "relaxing" by convention).
    """

    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    label: str = ""

    def __post_init__(self):
        rates = (self.kappa1, self.kappa2, self.kappa3, self.kappa4)
        if any(r < 0 for r in rates):
            raise ValueError(f"bath rates must be nonnegative, got {rates}")

    @classmethod
    def tim(cls, mu: float, mu_prime: float, label: str = "") -> "BathSpec":
        """Two-rate preset: kappa1 = kappa3 = mu, kappa2 = kappa4 = mu'."""
        return cls(mu, mu_prime, mu, mu_prime, label=label)

    @property
    def total_rate(self) -> float:
        return self.kappa1 + self.kappa2 + self.kappa3 + self.kappa4

    def rates(self) -> tuple[float, float, float, float]:
        return (self.kappa1, self.kappa2, self.kappa3, self.kappa4)


@dataclass(frozen=True)
class FixedDuration:
    """Integrate the dissipative stroke for a fixed time."""

    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("stroke duration must be positive")


@dataclass(frozen=True)
class ToSteadyState:
    """Run the dissipative stroke until the state is stationary.

    method "direct" solves the 16-dimensional linear system; "evolve"
    integrates in chunks until the residual drops below ``tol``.
    """

    tol: float = 1e-10
    method: str = "direct"
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.method not in ("direct", "evolve"):
            raise ValueError(f"unknown steady-state method {self.method!r}")


def jump_operators(sign: int = -1) -> list[np.ndarray]:
    """The four jump operators as explicit 4x4 matrices.

    ``sign`` is the fermionic phase picked up by the -k hop on top of an
    occupied k mode; either choice gives identical populations and energies
    because the operators enter the dissipator quadratically.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    c_k = np.zeros((4, 4), dtype=complex)
    c_k[0, 1] = 1.0  # |10> -> |00>
    c_k[2, 3] = 1.0  # |11> -> |01>
    c_mk = np.zeros((4, 4), dtype=complex)
    c_mk[0, 2] = 1.0  # |01> -> |00>
    c_mk[1, 3] = sign  # |11> -> |10>
    return [c_k, c_k.conj().T, c_mk, c_mk.conj().T]


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    """Raise if rho is not Hermitian, unit-trace and positive (to tolerance)."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho)} is not 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < POSITIVITY_FLOOR:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]}")


def _clip_positivity(rho: np.ndarray, where: str) -> np.ndarray:
    """Clip eigenvalues in [POSITIVITY_FLOOR, 0) to zero; raise below the floor.

    Dips beyond pure floating-point noise are logged; anything below the
    floor is an integration failure, never silently repaired.
    """
    w, v = np.linalg.eigh(rho)
    if w[0] >= 0.0:
        return rho
    if w[0] < POSITIVITY_FLOOR:
        raise RuntimeError(f"{where}: eigenvalue {w[0]} below positivity floor")
    if w[0] < -1e-13:
        logger.warning("%s: clipping eigenvalue %.3e to zero", where, w[0])
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def liouvillian_rhs(
    rho: np.ndarray,
    hamiltonian: np.ndarray,
    bath: BathSpec,
    sign: int = -1,
    check: bool = True,
) -> np.ndarray:
    """Right-hand side -i[H, rho] + sum_j kappa_j D[L_j](rho).

    The output is Hermitian and traceless by construction.
    """
    rho = np.asarray(rho, dtype=complex)
    if check and np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("liouvillian_rhs: rho is not Hermitian")
    h = np.asarray(hamiltonian, dtype=complex)
    out = -1j * (h @ rho - rho @ h)
    for kappa, op in zip(bath.rates(), jump_operators(sign)):
        if kappa == 0.0:
            continue
        op_dag = op.conj().T
        n_op = op_dag @ op
        out += kappa * (op @ rho @ op_dag - 0.5 * (n_op @ rho + rho @ n_op))
    return out


def liouvillian_matrix(
    hamiltonian: np.ndarray, bath: BathSpec, sign: int = -1
) -> np.ndarray:
    """16x16 superoperator acting on row-major vec(rho)."""
    h = np.asarray(hamiltonian, dtype=complex)
    eye = np.eye(4)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for kappa, op in zip(bath.rates(), jump_operators(sign)):
        if kappa == 0.0:
            continue
        n_op = op.conj().T @ op
        sup += kappa * (
            np.kron(op, op.conj())
            - 0.5 * np.kron(n_op, eye)
            - 0.5 * np.kron(eye, n_op.T)
        )
    return sup


def steady_state_direct(
    hamiltonian: np.ndarray, bath: BathSpec, sign: int = -1
) -> np.ndarray:
    """Stationary state from the null space of the Liouvillian.

    Raises DegenerateSteadyStateError when the null space is not
    one-dimensional (relative singular-value cutoff 1e-10).
    """
    if bath.total_rate == 0.0:
        raise DegenerateSteadyStateError("all bath rates vanish")
    sup = liouvillian_matrix(hamiltonian, bath, sign)
    _, svals, vh = np.linalg.svd(sup)
    scale = svals[0] if svals[0] > 0 else 1.0
    if svals[-2] / scale < 1e-10:
        raise DegenerateSteadyStateError(
            f"null space dimension > 1 (s[-2]/s[0] = {svals[-2] / scale:.2e})"
        )
    rho = vh[-1].conj().reshape(4, 4)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise DegenerateSteadyStateError("null vector is traceless")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    return _clip_positivity(rho, "steady_state_direct")


def _dissipative_dt(hamiltonian: np.ndarray, bath: BathSpec) -> float:
    omega = float(np.max(np.abs(np.linalg.eigvalsh(hamiltonian))))
    return 0.05 / max(omega, bath.total_rate, 1e-12)


def _rk4_superop(vec: np.ndarray, sup: np.ndarray, tau: float, dt_max: float) -> np.ndarray:
    """Fixed-step RK4 for d vec/dt = sup @ vec over duration tau."""
    dt = min(tau / 1000.0, dt_max)
    n_steps = max(2, int(np.ceil(tau / dt)))
    dt = tau / n_steps
    for _ in range(n_steps):
        k1 = sup @ vec
        k2 = sup @ (vec + 0.5 * dt * k1)
        k3 = sup @ (vec + 0.5 * dt * k2)
        k4 = sup @ (vec + dt * k3)
        vec = vec + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return vec


def evolve_dissipative(
    rho0: np.ndarray,
    hamiltonian: np.ndarray,
    bath: BathSpec,
    policy: FixedDuration | ToSteadyState,
    sign: int = -1,
) -> np.ndarray:
    """Dissipative stroke at constant Hamiltonian.

    With a FixedDuration policy the Lindblad equation is integrated with
    fixed-step RK4 (step: min(tau/1000, 0.05/max(spectral radius, total
    rate))).  With ToSteadyState the stationary state comes either from the
    direct null-space solve (default) or from chunked time evolution until
    the residual Frobenius norm drops below the policy tolerance.
    """
    validate_density_matrix(rho0)
    rho = np.asarray(rho0, dtype=complex).copy()

    if isinstance(policy, FixedDuration):
        sup = liouvillian_matrix(hamiltonian, bath, sign)
        vec = _rk4_superop(rho.reshape(16), sup, policy.tau, _dissipative_dt(hamiltonian, bath))
        out = vec.reshape(4, 4)
        out = 0.5 * (out + out.conj().T)
        return _clip_positivity(out, "evolve_dissipative")

    if not isinstance(policy, ToSteadyState):
        raise TypeError(f"unsupported stroke policy {policy!r}")

    if policy.method == "direct":
        out = steady_state_direct(hamiltonian, bath, sign)
        res = float(np.linalg.norm(liouvillian_rhs(out, hamiltonian, bath, sign=sign)))
        if res > max(policy.tol, 1e-9):
            raise SteadyStateNotReachedError(
                f"direct solve residual {res:.2e} exceeds tolerance {policy.tol:.2e}"
            )
        return out

    # Time-evolution route; kept as an independent oracle for the direct solve.
    if bath.total_rate == 0.0:
        raise DegenerateSteadyStateError("all bath rates vanish")
    sup = liouvillian_matrix(hamiltonian, bath, sign)
    dt_max = _dissipative_dt(hamiltonian, bath)
    chunk = min(10.0 / bath.total_rate, 500.0)
    vec = rho.reshape(16)
    steps_done = 0
    res = np.inf
    while steps_done < policy.max_steps:
        vec = _rk4_superop(vec, sup, chunk, dt_max)
        steps_done += max(2, int(np.ceil(chunk / min(chunk / 1000.0, dt_max))))
        res = float(np.linalg.norm((sup @ vec).reshape(4, 4)))
        if res < policy.tol:
            out = vec.reshape(4, 4)
            out = 0.5 * (out + out.conj().T)
            return _clip_positivity(out / np.trace(out).real, "evolve_dissipative")
    raise SteadyStateNotReachedError(
        f"residual {res:.2e} after {steps_done} steps (tol {policy.tol:.2e})"
    )


# ---------------------------------------------------------------------------
# unitary ramp strokes
# ---------------------------------------------------------------------------

_GAUSS_LO = 0.5 - np.sqrt(3.0) / 6.0
_GAUSS_HI = 0.5 + np.sqrt(3.0) / 6.0


def _ramp_step_count(h_start: float, h_end: float, tau: float, eta: float) -> tuple[int, float]:
    omega_max = 2.0 * np.sqrt((max(abs(h_start), abs(h_end)) + 1.0) ** 2 + 1.0)
    dt = min(tau / 1000.0, eta / omega_max)
    n_steps = max(2, int(np.ceil(tau / dt)))
    return n_steps, tau / n_steps


def ramp_block_propagators(
    ks: np.ndarray,
    h_start: float,
    h_end: float,
    tau: float,
    eta: float = 0.5,
    batch: int = 1024,
) -> np.ndarray:
    """Propagators of the coupled |00>/|11> blocks for a linear field ramp.

    Returns an array of shape (len(ks), 2, 2).  Each step applies the exact
    exponential of the fourth-order Magnus generator built from two-point
    Gauss-Legendre samples of H(t), so the result is unitary to machine
    precision regardless of step count and the spectrum of any state it is
    applied to is preserved exactly.  ``eta`` bounds the rotation angle per
    step through dt <= eta / (max spectral radius along the ramp).
    """
    if tau <= 0:
        raise ValueError("ramp duration must be positive")
    ks = np.asarray(ks, dtype=float)
    cos_k = np.cos(ks)[None, :]
    b_k = 2.0 * np.sin(ks)[None, :]
    n_steps, dt = _ramp_step_count(h_start, h_end, tau, eta)
    h_dot = (h_end - h_start) / tau

    m = ks.shape[0]
    u = np.zeros((m, 2, 2), dtype=complex)
    u[:, 0, 0] = 1.0
    u[:, 1, 1] = 1.0

    # Generator per step: -i (vx sx + vy sy + vz sz); the commutator
    # correction of the two Gauss samples enters through vy alone.
    vx = dt * b_k
    vy = (h_dot * dt**3 / 3.0) * b_k
    step = np.empty((min(batch, n_steps), m, 2, 2), dtype=complex)
    for start in range(0, n_steps, batch):
        n_here = min(batch, n_steps - start)
        t_mid = (start + np.arange(n_here))[:, None] * dt + 0.5 * dt
        d_mid = 2.0 * (h_start + h_dot * t_mid + cos_k)
        vz = dt * d_mid
        theta = np.sqrt(vx * vx + vy * vy + vz * vz)
        sinc = np.sin(theta) / np.where(theta > 0.0, theta, 1.0)
        cos_t = np.cos(theta)
        s = step[:n_here]
        s[:, :, 0, 0] = cos_t - 1j * sinc * vz
        s[:, :, 1, 1] = cos_t + 1j * sinc * vz
        s[:, :, 0, 1] = -1j * sinc * (vx - 1j * vy)
        s[:, :, 1, 0] = -1j * sinc * (vx + 1j * vy)
        for i in range(n_here):
            u = s[i] @ u
    return u


def apply_block_propagator(u_block: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """Apply the embedded 4x4 propagator diag(u on {0,3}, identity on {1,2}).

    ``u_block`` has shape (m, 2, 2); ``rhos`` has shape (m, 4, 4).
    """
    m = rhos.shape[0]
    u4 = np.zeros((m, 4, 4), dtype=complex)
    u4[:, 1, 1] = 1.0
    u4[:, 2, 2] = 1.0
    u4[:, 0, 0] = u_block[:, 0, 0]
    u4[:, 0, 3] = u_block[:, 0, 1]
    u4[:, 3, 0] = u_block[:, 1, 0]
    u4[:, 3, 3] = u_block[:, 1, 1]
    return u4 @ rhos @ u4.conj().transpose(0, 2, 1)


def evolve_unitary_ramp(
    rho0: np.ndarray,
    k: float,
    h_start: float,
    h_end: float,
    tau: float,
    eta: float = 0.5,
) -> np.ndarray:
    """Unitary stroke: evolve one mode through a linear field ramp.

    The singly occupied populations and their mutual coherence are constants
    of the motion (both levels sit at zero energy); only the |00>/|11> block
    rotates.
    """
    if tau <= 0:
        raise ValueError("ramp duration must be positive")
    validate_density_matrix(rho0)
    u = ramp_block_propagators(np.array([k]), h_start, h_end, tau, eta=eta)
    out = apply_block_propagator(u, np.asarray(rho0, dtype=complex)[None, :, :])[0]
    return 0.5 * (out + out.conj().T)


def energy(rho: np.ndarray, hamiltonian: np.ndarray) -> float:
    """Re Tr(H rho); asserts the imaginary part is numerical noise."""
    tr = complex(np.trace(np.asarray(hamiltonian) @ np.asarray(rho)))
    if abs(tr.imag) > 1e-10:
        raise AssertionError(f"Tr(H rho) has imaginary part {tr.imag:.3e}")
    return tr.real


def ground_state_projector(mode: ModeHamiltonian) -> np.ndarray:
    """Projector onto the 4x4 ground eigenvector of one mode."""
    _, v = np.linalg.eigh(mode.matrix4())
    g = v[:, 0]
    return np.outer(g, g.conj())


def tim_hamiltonian4(h: float, k: float) -> np.ndarray:
    """Convenience: 4x4 Ising mode Hamiltonian at field h, momentum k."""
    return tim_mode(h, k).matrix4()
