"""Explicit speed-limit bounds for pure initial states of Markovian systems.

For an initial state ``psi0`` and radius ``lam = sqrt(1 - cos Theta_T)`` the
escape time from the relative-purity ball around ``rho0`` obeys

    T >= T* = 2 lam / A + (2 E / A**2) ln(E / (E + A lam))

with the amplitude ``A = sqrt(2) ||sum_j i[H_j, rho0] + sum_j D^+[M_j] rho0||_F``
and the excess ``E = sum_j (||M_j psi0||**2 - |<psi0|M_j|psi0>|**2)``.
The weaker comparison bound is ``T_DC = sqrt(2) lam**2 / A``.
"""

import math
from dataclasses import asdict, dataclass
from functools import cmp_to_key

import numpy as np

from .errors import DimensionError, DomainError

SQRT2 = math.sqrt(2.0)
K_MAX = 1.0 / SQRT2
#: Slack on ``A >= sqrt(2) E`` before it is treated as a violation.
K_SLACK = 1e-9
BASE_TOL = 1e-12


def _check_lambda(lam):
    if not (0.0 < lam <= 1.0):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")


def tolerance(model):
    """Zero threshold for ``A`` and ``E``, scaled by the generator size."""
    return BASE_TOL * (1.0 + model.spectral_scale)


def _drift_matrix(model, psi0):
    """``sum_j i[H_j, rho0] + sum_j D^+[M_j] rho0`` from rank-one pieces."""
    model.check_state(psi0)
    psi = psi0.amplitudes
    x = np.zeros((model.dim, model.dim), dtype=np.complex128)
    h_psi = np.zeros_like(psi)
    for h in model.hamiltonians:
        h_psi += h @ psi
    decay = np.zeros_like(psi)
    for m in model.channels:
        md_psi = np.conj(m).T @ psi
        x += np.outer(md_psi, np.conj(md_psi))
        decay += np.conj(m).T @ (m @ psi)
    x += 1j * (np.outer(h_psi, np.conj(psi)) - np.outer(psi, np.conj(h_psi)))
    x -= 0.5 * (np.outer(decay, np.conj(psi)) + np.outer(psi, np.conj(decay)))
    return x


def amplitude(model, psi0):
    """The amplitude ``A`` for all Hamiltonian terms and channels of ``model``."""
    return SQRT2 * float(np.linalg.norm(_drift_matrix(model, psi0), "fro"))


def excess(model, psi0):
    """The excess ``E``: summed channel variances in ``psi0``."""
    model.check_state(psi0)
    psi = psi0.amplitudes
    total = 0.0
    for m in model.channels:
        m_psi = m @ psi
        total += float(np.vdot(m_psi, m_psi).real) - float(abs(np.vdot(psi, m_psi))) ** 2
    # the variance is nonnegative; rounding can leave -1e-17
    return max(total, 0.0)


def lambda_from_theta(theta):
    if not (0.0 < theta <= math.pi / 2 + 1e-15):
        raise DomainError(f"Theta_T must lie in (0, pi/2], got {theta}")
    return math.sqrt(1.0 - math.cos(min(theta, math.pi / 2)))


def theta_from_lambda(lam):
    _check_lambda(lam)
    return math.acos(1.0 - lam * lam)


def t_star(a, e, lam, *, tol_a=BASE_TOL, tol_e=BASE_TOL):
    """Speed limit ``T*`` from amplitude ``a``, excess ``e`` and radius ``lam``.

    Returns ``math.inf`` when ``a < tol_a`` (stationary initial state) and the
    closed-system limit ``2 lam / a`` when ``e < tol_e``.
    """
    if a < 0 or e < 0:
        raise DomainError(f"amplitude and excess must be nonnegative, got A={a}, E={e}")
    _check_lambda(lam)
    if a < tol_a:
        return math.inf
    if e < tol_e:
        return 2.0 * lam / a
    # ln(E / (E + A lam)) written as -log1p(A lam / E) for small E
    return 2.0 * lam / a - (2.0 * e / (a * a)) * math.log1p(a * lam / e)


def t_dc(a, lam):
    """Comparison bound ``sqrt(2) lam**2 / a``; infinite when ``a <= 0``."""
    _check_lambda(lam)
    if a <= 0:
        return math.inf
    return SQRT2 * lam * lam / a


def bound_ratio(k, lam):
    """``T*/T_DC`` as a function of ``k = E/A`` and ``lam`` alone."""
    _check_lambda(lam)
    if not (0.0 <= k <= K_MAX + K_SLACK):
        raise DomainError(f"k must lie in [0, 1/sqrt(2)], got {k}")
    k = min(k, K_MAX)
    if k == 0.0:
        return SQRT2 / lam
    return SQRT2 / lam - (SQRT2 * k / (lam * lam)) * math.log1p(lam / k)


@dataclass(frozen=True)
class QslReport:
    theta_T: float
    lam: float
    amplitude: float
    excess: float
    k: float
    t_star: float
    t_dc: float
    ratio: float
    closed_system: bool
    stationary: bool

    def as_dict(self):
        return asdict(self)


def qsl_report(model, psi0, lam):
    """Evaluate ``A``, ``E``, both bounds and their ratio for one state."""
    _check_lambda(lam)
    a = amplitude(model, psi0)
    e = excess(model, psi0)
    tol = tolerance(model)
    stationary = a < tol
    closed = e < tol
    if stationary:
        k = 0.0
    else:
        k = 0.0 if closed else e / a
        if k > K_MAX + K_SLACK:
            raise ArithmeticError(f"k = {k} violates A >= sqrt(2) E")
    return QslReport(
        theta_T=theta_from_lambda(lam),
        lam=lam,
        amplitude=a,
        excess=e,
        k=min(k, K_MAX),
        t_star=t_star(a, e, lam, tol_a=tol, tol_e=tol),
        t_dc=math.inf if stationary else t_dc(a, lam),
        ratio=bound_ratio(min(k, K_MAX), lam),
        closed_system=closed,
        stationary=stationary,
    )


def _compare_desc(x, y, rel_tol=1e-12):
    (_, tx), (_, ty) = x, y
    if tx == ty or (math.isfinite(tx) and math.isfinite(ty) and math.isclose(tx, ty, rel_tol=rel_tol)):
        return 0
    return -1 if tx > ty else 1


def rank_states(model, states, lam):
    """Sort states by ``T*``, most robust first.

    Returns ``(index, t_star)`` pairs. Stationary states (infinite ``T*``)
    lead; values equal to a relative 1e-12 count as ties and keep input order.
    """
    if not states:
        raise DomainError("rank_states needs at least one state")
    dims = {s.dim for s in states}
    if len(dims) > 1:
        raise DimensionError(f"states have mixed dimensions {sorted(dims)}")
    scored = [(i, qsl_report(model, s, lam).t_star) for i, s in enumerate(states)]
    return sorted(scored, key=cmp_to_key(_compare_desc))


def gamma_sweep(model, psi0, lam, gammas):
    """``T*`` with channels rescaled to ``sqrt(gamma) M'`` for each ``gamma``."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise DomainError("gamma grid is empty")
    if any(g <= 0 for g in gammas) or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise DomainError("gamma grid must be positive and strictly ascending")
    return [(g, qsl_report(model.scaled_channels(g), psi0, lam).t_star) for g in gammas]
