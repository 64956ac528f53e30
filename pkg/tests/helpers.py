"""Random instances shared by the test modules."""

import numpy as np

from qslkit import PureState, SystemModel


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_operator(rng, d, scale=1.0):
    return scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)


def random_state(rng, d):
    return PureState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_model(rng, d, n_channels=None, unit_scale=True):
    """Random Hamiltonian plus one or two random channels, generator size ~1."""
    n_channels = rng.integers(1, 3) if n_channels is None else n_channels
    h = random_hermitian(rng, d, rng.uniform(0.0, 1.0))
    chans = [random_operator(rng, d) for _ in range(n_channels)]
    model = SystemModel(d, [h], chans)
    if unit_scale:
        s = model.spectral_scale
        model = SystemModel(d, [h / s], [m / np.sqrt(s) for m in chans])
    return model


def liouvillian(model):
    """Column-stacked superoperator of the master equation, built from krons."""
    d = model.dim
    eye = np.eye(d)
    h = model.hamiltonian
    out = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for m in model.channels:
        mdm = m.conj().T @ m
        out += np.kron(m.conj(), m) - 0.5 * np.kron(eye, mdm) - 0.5 * np.kron(mdm.T, eye)
    return out


def exact_state(model, rho0, t):
    from scipy.linalg import expm

    d = model.dim
    vec = expm(liouvillian(model) * t) @ rho0.reshape(-1, order="F")
    return vec.reshape(d, d, order="F")


def amplitude_oracle(model, psi0):
    """``A`` through the adjoint superoperator acting on vec(rho0)."""
    d = model.dim
    # i[H, .] + D^+ is exactly the Hilbert-Schmidt adjoint of the generator
    adjoint = liouvillian(model).conj().T
    x = (adjoint @ psi0.rho.reshape(-1, order="F")).reshape(d, d, order="F")
    return float(np.sqrt(2) * np.linalg.norm(x))
