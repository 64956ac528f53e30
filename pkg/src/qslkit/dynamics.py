"""Fixed-step RK4 integration of the Lindblad equation and escape times."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, IntegrationError
from .operators import overlap, spectral_norm

#: Overlap tolerance for a located crossing of ``1 - lam**2``.
CROSSING_TOL = 1e-8
STORE_EVERY = 10


class _Generator:
    """Right-hand side ``-i(Heff rho - rho Heff^+) + sum_j M_j rho M_j^+``."""

    def __init__(self, model):
        self.dim = model.dim
        k = np.zeros((model.dim, model.dim), dtype=np.complex128)
        with np.errstate(over="ignore", invalid="ignore"):
            for m in model.channels:
                k += np.conj(m).T @ m
            self.heff = model.hamiltonian - 0.5j * k
        if not np.all(np.isfinite(self.heff)):
            raise IntegrationError("generator overflows double precision; rescale the model")
        self.heff_dag = np.conj(self.heff).T
        self.channels = [(m, np.conj(m).T) for m in model.channels]

    def __call__(self, rho):
        out = -1j * (self.heff @ rho - rho @ self.heff_dag)
        for m, md in self.channels:
            out += m @ rho @ md
        return out

    def step(self, rho, h, project=True):
        # overflow surfaces as the IntegrationError below, not as warnings
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = self(rho)
            k2 = self(rho + 0.5 * h * k1)
            k3 = self(rho + 0.5 * h * k2)
            k4 = self(rho + h * k3)
            new = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(new)):
            raise IntegrationError(f"non-finite state after a step of size {h}; reduce the step")
        if project:
            new = 0.5 * (new + np.conj(new).T)
            tr = np.trace(new).real
            if not tr > 0:
                raise IntegrationError(f"trace collapsed to {tr} after a step of size {h}")
            new /= tr
        return new


def default_step(model):
    """``0.01 / (sum ||H_j||_2 + sum ||M_j||_2**2 + 1)``."""
    return 0.01 / (model.spectral_scale + 1.0)


def default_t_max(model):
    """Ten times the slowest channel time scale (or Hamiltonian period scale)."""
    rates = [spectral_norm(m) ** 2 for m in model.channels]
    rates = [r for r in rates if r > 0]
    if rates:
        return 10.0 / min(rates)
    h = sum(spectral_norm(x) for x in model.hamiltonians)
    return 10.0 / h if h > 0 else 10.0


def _check_rho(model, rho):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (model.dim, model.dim):
        raise DimensionError(f"state has shape {rho.shape}, model dimension is {model.dim}")
    return rho


def rk4_step(model, rho, h, *, project=True):
    """One classical RK4 step of size ``h``.

    With ``project`` the result is re-Hermitized and renormalized to unit trace.
    """
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    return _Generator(model).step(_check_rho(model, rho), h, project)


@dataclass
class Trajectory:
    times: np.ndarray
    overlaps: np.ndarray
    #: sample index -> density matrix, every ``stride``-th sample
    states: dict = field(default_factory=dict)
    stride: int = STORE_EVERY


def _grid(t_end, h):
    n = max(1, math.ceil(t_end / h - 1e-9))
    times = np.arange(n + 1) * h
    times[-1] = t_end
    return times


def evolve(model, psi0, t_end, h=None, *, store_every=STORE_EVERY):
    """Integrate from ``rho0 = |psi0><psi0|`` and sample ``Tr(rho0 rho_t)``.

    Samples sit at ``0, h, 2h, ...`` with the last one moved onto ``t_end``.
    """
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    model.check_state(psi0)
    h = default_step(model) if h is None else h
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    gen = _Generator(model)
    times = _grid(t_end, h)
    rho0 = psi0.rho
    rho = rho0.copy()
    overlaps = np.empty(len(times))
    overlaps[0] = overlap(rho0, rho)
    states = {0: rho.copy()}
    for i in range(1, len(times)):
        rho = gen.step(rho, times[i] - times[i - 1])
        overlaps[i] = overlap(rho0, rho)
        if store_every and i % store_every == 0:
            states[i] = rho.copy()
    return Trajectory(times, overlaps, states, store_every)


@dataclass(frozen=True)
class EscapeResult:
    escaped: bool
    time: float
    lam: float
    t_max: float


def escape_time(model, psi0, lam, t_max=None, h=None, *, tol=CROSSING_TOL):
    """First time ``Tr(rho0 rho_t)`` drops to ``1 - lam**2``.

    A crossing is bracketed between consecutive samples, then located by
    bisection on the step length, re-integrating each trial from the last
    sample before the crossing. Later re-entries into the ball are ignored.
    """
    if not (0.0 < lam <= 1.0):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    t_max = default_t_max(model) if t_max is None else t_max
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    model.check_state(psi0)
    h = default_step(model) if h is None else h
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")

    target = 1.0 - lam * lam
    gen = _Generator(model)
    rho0 = psi0.rho
    rho = rho0.copy()
    times = _grid(t_max, h)
    for i in range(1, len(times)):
        dt = times[i] - times[i - 1]
        nxt = gen.step(rho, dt)
        if overlap(rho0, nxt) <= target:
            return EscapeResult(True, float(times[i - 1] + _bisect(gen, rho0, rho, dt, target, tol)), lam, t_max)
        rho = nxt
    return EscapeResult(False, math.nan, lam, t_max)


def _bisect(gen, rho0, rho, dt, target, tol):
    # shrink the bracket well past the overlap tolerance: the result feeds
    # T >= T* comparisons
    lo, hi = 0.0, dt
    ov_hi = overlap(rho0, gen.step(rho, hi))
    while hi - lo > 1e-14 or abs(ov_hi - target) > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        ov = overlap(rho0, gen.step(rho, mid))
        if ov <= target:
            hi, ov_hi = mid, ov
        else:
            lo = mid
    return hi
