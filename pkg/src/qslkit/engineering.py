"""Hamiltonian design that maximizes the speed limit of a target state.

For fixed ``rho0`` and channels, ``T*`` grows as the amplitude ``A`` shrinks,
and minimizing ``A`` over Hermitian ``H`` is equivalent to minimizing the
convex quadratic

    F(H) = Tr(H^2 rho0) - Tr(H rho0 H rho0) + Tr(G H),
    G    = i [rho0, sum_j D^+[M_j] rho0].

Its minimizers solve the linear stationarity equation
``H rho0 + rho0 H - 2 rho0 H rho0 + G = 0``.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError
from .operators import PureState, adjoint_dissipator, as_matrix, from_coefficients, hermitian_basis

log = logging.getLogger(__name__)

SVD_CUTOFF = 1e-10


def _check(psi0, channels, h=None):
    d = psi0.dim
    for j, m in enumerate(channels):
        if np.shape(m) != (d, d):
            raise DimensionError(f"channel {j} has shape {np.shape(m)}, state dimension is {d}")
    if h is not None and np.shape(h) != (d, d):
        raise DimensionError(f"Hamiltonian has shape {np.shape(h)}, state dimension is {d}")


def _adjoint_total(rho0, channels):
    out = np.zeros_like(rho0)
    for m in channels:
        out += adjoint_dissipator(as_matrix(m), rho0)
    return out


def drift_term(psi0, channels):
    """``G = i [rho0, sum_j D^+[M_j] rho0]`` (Hermitian)."""
    _check(psi0, channels)
    rho0 = psi0.rho
    adj = _adjoint_total(rho0, channels)
    return 1j * (rho0 @ adj - adj @ rho0)


def cost(h, psi0, channels):
    """The quadratic design cost ``F(H)``."""
    _check(psi0, channels, h)
    rho0 = psi0.rho
    h = as_matrix(h)
    hr = h @ rho0
    value = np.trace(h @ hr) - np.trace(hr @ hr) + np.trace(drift_term(psi0, channels) @ h)
    return float(value.real)


def cost_gradient(h, psi0, channels):
    """Matrix derivative ``dF/dH`` in the transposed convention.

    ``(H rho0 + rho0 H)^T - 2 (rho0 H rho0)^T + (i [rho0, D^+ rho0])^T``, so
    that ``dF = Tr(grad^T dH)``.
    """
    _check(psi0, channels, h)
    rho0 = psi0.rho
    h = as_matrix(h)
    g = drift_term(psi0, channels)
    return (h @ rho0 + rho0 @ h).T - 2.0 * (rho0 @ h @ rho0).T + g.T


def stationarity_residual(h, psi0, channels):
    """Left-hand side ``H rho0 + rho0 H - 2 rho0 H rho0 + G``."""
    _check(psi0, channels, h)
    rho0 = psi0.rho
    h = as_matrix(h)
    return h @ rho0 + rho0 @ h - 2.0 * rho0 @ h @ rho0 + drift_term(psi0, channels)


@dataclass(frozen=True, eq=False)
class EngineeringProblem:
    psi0: PureState
    channels: tuple
    basis: list = None

    def __post_init__(self):
        chans = tuple(as_matrix(m) for m in self.channels)
        _check(self.psi0, chans)
        object.__setattr__(self, "channels", chans)
        if self.basis is None:
            if self.psi0.dim < 2:
                raise DomainError("Hamiltonian engineering needs dimension >= 2")
            object.__setattr__(self, "basis", hermitian_basis(self.psi0.dim))
        else:
            for b in self.basis:
                if np.shape(b) != (self.psi0.dim, self.psi0.dim):
                    raise DimensionError(
                        f"basis element of shape {np.shape(b)} for state dimension {self.psi0.dim}"
                    )

    @classmethod
    def from_model(cls, model, psi0, basis=None):
        model.check_state(psi0)
        return cls(psi0, model.channels, basis)

    @property
    def dim(self):
        return self.psi0.dim

    @property
    def scale(self):
        """Magnitude of the drift, used to judge residuals."""
        return 1.0 + float(np.linalg.norm(drift_term(self.psi0, self.channels)))


@dataclass(frozen=True, eq=False)
class EngineeringSolution:
    u: np.ndarray
    h_opt: np.ndarray
    nullspace: list
    residual_norm: float
    cost_value: float
    converged: bool = True
    iterations: int = 0
    singular_values: np.ndarray = field(default=None, repr=False)

    @property
    def nullspace_dim(self):
        return len(self.nullspace)


def _real_stack(m):
    flat = np.asarray(m).reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def solve_optimal(problem, *, cutoff=SVD_CUTOFF):
    """Minimum-norm solution of the stationarity equation by SVD.

    Singular directions below ``cutoff`` times the largest singular value
    form the reported nullspace: Hamiltonian directions that commute with
    ``rho0`` and leave ``F`` unchanged.
    """
    psi0, channels, basis = problem.psi0, problem.channels, problem.basis
    rho0 = psi0.rho
    g = drift_term(psi0, channels)
    cols = [_real_stack(b @ rho0 + rho0 @ b - 2.0 * rho0 @ b @ rho0) for b in basis]
    lin = np.column_stack(cols)
    rhs = -_real_stack(g)

    u_mat, s, vt = np.linalg.svd(lin, full_matrices=False)
    keep = s > cutoff * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    coef = vt[keep].T @ ((u_mat[:, keep].T @ rhs) / s[keep])
    nullspace = [v.copy() for v in vt[~keep]]

    h_opt = from_coefficients(coef, basis)
    residual = float(np.linalg.norm(stationarity_residual(h_opt, psi0, channels)))
    value = cost(h_opt, psi0, channels)
    zero = cost(np.zeros_like(rho0), psi0, channels)
    if value > zero + 1e-12 * problem.scale:
        raise ArithmeticError(f"solver returned F(H_opt) = {value} above F(0) = {zero}")
    return EngineeringSolution(
        u=coef,
        h_opt=h_opt,
        nullspace=nullspace,
        residual_norm=residual,
        cost_value=value,
        singular_values=s,
    )


def brute_force_minimize(problem, iterations=20000, step=1.0, *, gtol=1e-12):
    """Gradient descent on basis coefficients with Armijo backtracking.

    Starts from ``u = 0`` and uses the matrix gradient projected onto the
    basis, ``dF/du_i = Tr(grad^T B_i)``. Failing to converge within
    ``iterations`` is flagged on the result and warned about.
    """
    if iterations < 1:
        raise DomainError(f"iterations must be >= 1, got {iterations}")
    psi0, channels, basis = problem.psi0, problem.channels, problem.basis
    stack = np.asarray(basis)

    def f(u):
        return cost(np.tensordot(u, stack, axes=1), psi0, channels)

    def grad(u):
        gm = cost_gradient(np.tensordot(u, stack, axes=1), psi0, channels)
        return np.einsum("ab,kab->k", gm, stack).real

    u = np.zeros(len(basis))
    fu = f(u)
    tol = gtol * problem.scale
    converged = False
    it = 0
    for it in range(1, iterations + 1):
        gu = grad(u)
        gg = float(gu @ gu)
        if np.sqrt(gg) < tol:
            converged = True
            break
        t = step
        while True:
            trial = u - t * gu
            ft = f(trial)
            if ft <= fu - 0.5 * t * gg or t < 1e-16:
                break
            t *= 0.5
        u, fu = trial, ft
    if not converged:
        msg = f"gradient descent stopped after {iterations} iterations without converging"
        log.warning(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    h = np.tensordot(u, stack, axes=1)
    return EngineeringSolution(
        u=u,
        h_opt=h,
        nullspace=[],
        residual_norm=float(np.linalg.norm(stationarity_residual(h, psi0, channels))),
        cost_value=fu,
        converged=converged,
        iterations=it,
    )
