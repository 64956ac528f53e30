"""Dense complex operator algebra for small open quantum systems.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Basis conventions
follow the two-level atom picture: ``|0> = [1, 0]`` is the excited state,
``|1> = [0, 1]`` the ground state, and the lowering operator is
``sigma_- = |1><0|``.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, DomainError

#: Largest qubit count accepted by the collective-operator constructors.
MAX_QUBITS = 12

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_FLOOR = -1e-8
NORM_TOL = 1e-12


def _square(*mats):
    dims = set()
    for m in mats:
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        dims.add(m.shape[0])
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def as_matrix(x):
    """Return ``x`` as a finite complex128 2-D array."""
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got {m.ndim} dimensions")
    if m.size == 0:
        raise DimensionError("empty matrix")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def dagger(x):
    return np.conj(x).T


def frobenius_norm(x):
    """sqrt(Tr(X^dagger X)); works for rectangular input."""
    return float(np.linalg.norm(np.asarray(x), "fro"))


def spectral_norm(x):
    """Largest singular value of ``x``."""
    x = np.asarray(x)
    if not np.any(x):
        return 0.0
    return float(np.linalg.norm(x, 2))


def commutator(a, b):
    _square(a, b)
    return a @ b - b @ a


def anticommutator(a, b):
    _square(a, b)
    return a @ b + b @ a


def dissipator(m, rho):
    """Lindblad dissipator ``M rho M^+ - {M^+ M, rho}/2``."""
    _square(m, rho)
    md = dagger(m)
    mdm = md @ m
    return m @ rho @ md - 0.5 * (mdm @ rho + rho @ mdm)


def adjoint_dissipator(m, x):
    """Heisenberg-picture dissipator ``M^+ X M - {M^+ M, X}/2``."""
    _square(m, x)
    md = dagger(m)
    mdm = md @ m
    return md @ x @ m - 0.5 * (mdm @ x + x @ mdm)


def relative_purity_angle(rho0, rhot):
    """Angle ``arccos Tr(rho0 rhot)`` in [0, pi/2].

    The overlap is clamped to [0, 1] first, which absorbs rounding noise
    from integrated trajectories.
    """
    _square(rho0, rhot)
    overlap = np.real(np.sum(rho0.T * rhot))
    return float(np.arccos(np.clip(overlap, 0.0, 1.0)))


def overlap(rho0, rhot):
    """Real part of Tr(rho0 rhot), i.e. cos of the relative-purity angle."""
    _square(rho0, rhot)
    return float(np.real(np.sum(rho0.T * rhot)))


# --- constructors ---------------------------------------------------------

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_LADDER = {
    # |0><1| raises the ground state |1> to the excited state |0>
    "plus": np.array([[0, 1], [0, 0]], dtype=np.complex128),
    "minus": np.array([[0, 0], [1, 0]], dtype=np.complex128),
}


def pauli(axis):
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise DomainError(f"unknown Pauli axis {axis!r}; use 'x', 'y' or 'z'") from None


def ladder(kind):
    try:
        return _LADDER[kind].copy()
    except KeyError:
        raise DomainError(f"unknown ladder operator {kind!r}; use 'plus' or 'minus'") from None


def identity(d):
    if int(d) != d or d < 1:
        raise DomainError(f"identity dimension must be a positive integer, got {d}")
    return np.eye(int(d), dtype=np.complex128)


def projector(i, j, d):
    """Matrix unit ``|i><j|`` in dimension ``d`` (0-based indices)."""
    if d < 1 or not (0 <= i < d and 0 <= j < d):
        raise DomainError(f"projector indices ({i}, {j}) out of range for dimension {d}")
    p = np.zeros((d, d), dtype=np.complex128)
    p[i, j] = 1.0
    return p


def tensor(*ops):
    if not ops:
        raise DomainError("tensor needs at least one operand")
    return reduce(np.kron, ops)


def _check_qubits(n, max_qubits):
    if int(n) != n or n < 1:
        raise DomainError(f"number of qubits must be a positive integer, got {n}")
    if n > max_qubits:
        raise DomainError(f"{n} qubits exceeds the memory cap of {max_qubits}")
    return int(n)


def local_operator(op, site, n):
    """Embed a single-qubit ``op`` at ``site`` of an ``n``-qubit register."""
    n = _check_qubits(n, MAX_QUBITS)
    if int(site) != site or not 0 <= site < n:
        raise DomainError(f"site {site} outside a register of {n} qubits")
    eye = np.eye(2, dtype=np.complex128)
    return tensor(*(op if k == site else eye for k in range(n)))


def _collective(op, n):
    # diagonal or one-hot structure keeps this cheap even at 12 qubits
    out = np.zeros((2**n, 2**n), dtype=np.complex128)
    for site in range(n):
        out += local_operator(op, site, n)
    return out


def collective_lowering(n, *, max_qubits=MAX_QUBITS):
    """Sum of sigma_- over ``n`` qubits."""
    return _collective(_LADDER["minus"], _check_qubits(n, max_qubits))


def collective_dephasing(n, *, max_qubits=MAX_QUBITS):
    """Sum of sigma_z over ``n`` qubits."""
    return _collective(_PAULI["z"], _check_qubits(n, max_qubits))


def hermitian_basis(d):
    """Generalized Gell-Mann matrices for dimension ``d``.

    Returns ``d**2 - 1`` traceless Hermitian matrices normalized to
    ``Tr(B_i B_j) = 2 delta_ij``. Ordering: for each ``k = 2..d`` the
    symmetric/antisymmetric pairs ``(j, k)`` for ``j < k`` and then the
    ``(k-1)``-th diagonal generator. For ``d = 2`` this gives the Pauli
    matrices, for ``d = 3`` the usual eight Gell-Mann matrices in order.
    """
    if int(d) != d or d < 2:
        raise DomainError(f"Hermitian basis needs dimension >= 2, got {d}")
    d = int(d)
    basis = []
    for k in range(1, d):
        for j in range(k):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1.0
            asym = np.zeros((d, d), dtype=np.complex128)
            asym[j, k] = -1j
            asym[k, j] = 1j
            basis.extend((sym, asym))
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        basis.append(np.diag(diag * np.sqrt(2.0 / (k * (k + 1)))).astype(np.complex128))
    return basis


def gell_mann(i):
    """The ``i``-th (1-based) 3x3 Gell-Mann matrix."""
    if int(i) != i or not 1 <= i <= 8:
        raise DomainError(f"Gell-Mann index must be in 1..8, got {i}")
    return hermitian_basis(3)[int(i) - 1]


def from_coefficients(u, basis):
    """``sum_i u_i B_i`` for real coefficients ``u``."""
    u = np.asarray(u, dtype=float)
    if len(u) != len(basis):
        raise DimensionError(f"{len(u)} coefficients for a basis of {len(basis)}")
    return np.tensordot(u, np.asarray(basis), axes=1)


def is_hermitian(x, tol=HERMITIAN_TOL):
    return bool(np.max(np.abs(x - dagger(x)), initial=0.0) <= tol)


# --- states ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector; ``rho`` gives the projector |psi><psi|."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size == 0:
            raise DimensionError("state vector is empty")
        if not np.all(np.isfinite(amps)):
            raise DomainError("state vector has non-finite entries")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state vector has norm {norm!r}, expected 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise DomainError("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, index, d):
        v = np.zeros(d, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self):
        return self.amplitudes.size

    @property
    def rho(self):
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())

    def __repr__(self):
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"


def check_density_matrix(rho):
    """Validate ``rho`` as a density matrix and return it as complex128.

    Hermiticity and unit trace are checked to 1e-10, positivity down to an
    eigenvalue floor of -1e-8.
    """
    rho = as_matrix(rho)
    _square(rho)
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > HERMITIAN_TOL:
        raise DomainError(f"density matrix is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"density matrix has trace {tr:.12g}")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lam_min < PSD_FLOOR:
        raise DomainError(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return rho
