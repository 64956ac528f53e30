"""The open-system model: Hamiltonian terms plus Lindblad channels."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError
from .operators import HERMITIAN_TOL, as_matrix, dagger, spectral_norm


def _frozen(m):
    m = as_matrix(m).copy()
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Generators of ``d rho/dt = -i sum_j [H_j, rho] + sum_j D[M_j] rho``.

    Hamiltonians are in angular-frequency units, channels in sqrt-rate units.
    An empty Hamiltonian or channel list is allowed.
    """

    dim: int
    hamiltonians: tuple = ()
    channels: tuple = ()
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"model dimension must be a positive integer, got {self.dim}")
        hs = tuple(_frozen(h) for h in self.hamiltonians)
        ms = tuple(_frozen(m) for m in self.channels)
        for kind, ops in (("Hamiltonian", hs), ("channel", ms)):
            for j, op in enumerate(ops):
                if op.shape != (self.dim, self.dim):
                    raise DimensionError(
                        f"{kind} {j} has shape {op.shape}, model dimension is {self.dim}"
                    )
        for j, h in enumerate(hs):
            dev = np.max(np.abs(h - dagger(h)))
            if dev > HERMITIAN_TOL:
                raise DomainError(f"Hamiltonian {j} is not Hermitian (deviation {dev:.3g})")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "hamiltonians", hs)
        object.__setattr__(self, "channels", ms)
        object.__setattr__(self, "labels", dict(self.labels))

    @property
    def hamiltonian(self):
        """Sum of all Hamiltonian terms."""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for h in self.hamiltonians:
            out += h
        return out

    @property
    def spectral_scale(self):
        """``sum ||H_j||_2 + sum ||M_j||_2**2``, the generator magnitude."""
        return sum(spectral_norm(h) for h in self.hamiltonians) + sum(
            spectral_norm(m) ** 2 for m in self.channels
        )

    def with_hamiltonians(self, *hamiltonians):
        return SystemModel(self.dim, hamiltonians, self.channels, self.labels)

    def with_channels(self, *channels):
        return SystemModel(self.dim, self.hamiltonians, channels, self.labels)

    def scaled_channels(self, gamma):
        """Copy with every channel ``M'`` replaced by ``sqrt(gamma) M'``."""
        if gamma < 0:
            raise DomainError(f"decoherence strength must be nonnegative, got {gamma}")
        root = np.sqrt(gamma)
        return self.with_channels(*(root * m for m in self.channels))

    def check_state(self, psi0):
        if psi0.dim != self.dim:
            raise DimensionError(f"state has dimension {psi0.dim}, model has {self.dim}")
