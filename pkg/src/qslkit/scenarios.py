"""Named example systems with their closed-form reference values.

Builders return :class:`Scenario` objects. The ``reference`` record holds
values derived from the operator definitions; where a published closed form
differs from the definitions it is kept alongside under ``printed_*`` keys
for comparison, never used as the reference.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import t_star
from .errors import DomainError
from .model import SystemModel
from .operators import (
    MAX_QUBITS,
    PureState,
    collective_dephasing,
    collective_lowering,
    identity,
    ladder,
    pauli,
    projector,
    tensor,
)


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: SystemModel
    psi0: PureState
    reference: dict = field(default_factory=dict)
    #: auxiliary operators or coefficients (comparison Hamiltonians etc.)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.model.check_state(self.psi0)

    def reference_t_star(self, lam):
        """``T*`` from the stored reference amplitude and excess."""
        ref = self.reference
        return t_star(ref["amplitude"], ref["excess"], lam)


def _qubit_state(theta, phi):
    return PureState([math.cos(theta), np.exp(1j * phi) * math.sin(theta)])


def two_level_dephasing(omega=1.0, gamma=1.0, theta=0.0, phi=0.0):
    """``H = omega sigma_z``, ``M = sqrt(gamma) sigma_x`` on ``[cos t, e^{i p} sin t]``."""
    if omega < 0 or gamma < 0:
        raise DomainError("omega and gamma must be nonnegative")
    if not (0.0 <= theta < math.pi / 2) or not (0.0 <= phi < 2 * math.pi):
        raise DomainError(f"angles out of range: theta={theta}, phi={phi}")
    s2 = math.sin(2 * theta) ** 2
    amp_sq_quarter = (
        gamma**2 * (math.cos(2 * theta) ** 2 + s2 * math.sin(phi) ** 2)
        + omega**2 * s2
        + omega * gamma * s2 * math.sin(2 * phi)
    )
    reference = {
        "amplitude": 2.0 * math.sqrt(max(amp_sq_quarter, 0.0)),
        "excess": gamma - gamma * s2 * math.cos(phi) ** 2,
    }
    if omega == 0 and theta == 0 and gamma > 0:
        reference["escape_time"] = lambda lam: -math.log(1 - 2 * lam * lam) / (2 * gamma)
        reference["t_star_closed_form"] = lambda lam: lam / gamma - math.log(2 * lam + 1) / (2 * gamma)
    if gamma == 0 and omega > 0 and math.sin(2 * theta) != 0:
        reference["t_star_closed_form"] = lambda lam: lam / (omega * abs(math.sin(2 * theta)))
    model = SystemModel(
        2,
        [omega * pauli("z")],
        [math.sqrt(gamma) * pauli("x")],
        {"scenario": "two-level-dephasing"},
    )
    params = {"omega": omega, "gamma": gamma, "theta": theta, "phi": phi}
    return Scenario("two-level-dephasing", model, _qubit_state(theta, phi), reference, {"params": params})


def two_level_decay(omega=1.0, gamma=1.0):
    """``H = omega sigma_z``, ``M = sqrt(gamma) sigma_-`` acting on ``|+>``."""
    if omega < 0 or gamma < 0:
        raise DomainError("omega and gamma must be nonnegative")
    reference = {
        "amplitude": math.sqrt(64 * omega**2 + 4 * gamma**2) / 4,
        "excess": gamma / 4,
        "printed_amplitude": math.sqrt(48 * omega**2 + 11 * gamma**2) / 4,
        "printed_excess": gamma / 16,
    }
    model = SystemModel(
        2, [omega * pauli("z")], [math.sqrt(gamma) * ladder("minus")], {"scenario": "two-level-decay"}
    )
    psi0 = PureState.normalized([1.0, 1.0])
    return Scenario("two-level-decay", model, psi0, reference, {"params": {"omega": omega, "gamma": gamma}})


BELL_LABELS = ("Phi+", "Phi-", "Psi+", "Psi-")


def bell_states():
    """``Phi+, Phi-, Psi+, Psi-`` in that order."""
    s = 1 / math.sqrt(2)
    return [
        PureState([s, 0, 0, s]),
        PureState([s, 0, 0, -s]),
        PureState([0, s, s, 0]),
        PureState([0, s, -s, 0]),
    ]


def bell_scenarios(gamma=1.0, collective=True):
    """The four Bell states under collective or local spontaneous decay."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    sm, eye = ladder("minus"), identity(2)
    root = math.sqrt(gamma)
    if collective:
        channels = [root * (tensor(sm, eye) + tensor(eye, sm))]
        refs = [(math.sqrt(5) * gamma, gamma)] * 2 + [(4 * gamma, 2 * gamma), (0.0, 0.0)]
        name = "bell-collective"
    else:
        channels = [root * tensor(sm, eye), root * tensor(eye, sm)]
        # the joint norm of the summed adjoint dissipators; the published
        # sqrt(5) gamma is the sum of the two per-channel amplitudes
        refs = [(2 * gamma, gamma)] * 4
        name = "bell-local"
    model = SystemModel(4, [], channels, {"scenario": name})
    out = []
    for label, psi, (a, e) in zip(BELL_LABELS, bell_states(), refs):
        ref = {"amplitude": a, "excess": e}
        if collective and label in ("Phi+", "Phi-"):
            ref["t_star_closed_form"] = lambda lam, g=gamma: (
                2 * lam / (math.sqrt(5) * g) - 2 / (5 * g) * math.log(1 + math.sqrt(5) * lam)
            )
            ref["printed_t_star"] = lambda lam, g=gamma: (
                2 * lam / (math.sqrt(5) * g) - 2 / (5 * g) * math.log(1 + lam)
            )
        elif collective and label == "Psi+":
            ref["t_star_closed_form"] = lambda lam, g=gamma: lam / (2 * g) - math.log(1 + 2 * lam) / (4 * g)
        elif not collective:
            ref["printed_amplitude"] = math.sqrt(5) * gamma
        out.append(Scenario(f"{name}:{label}", model, psi, ref, {"label": label, "params": {"gamma": gamma}}))
    return out


def ghz_state(n):
    v = np.zeros(2**n, dtype=np.complex128)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return PureState(v)


def product_plus_state(n):
    return PureState(np.full(2**n, 2 ** (-n / 2), dtype=np.complex128))


def ensemble_scenarios(n, gamma=1.0):
    """``|+>^N`` and GHZ under collective dephasing ``sqrt(gamma) sum_j sigma_z``, ``H = 0``."""
    if int(n) != n or not 1 <= n <= MAX_QUBITS:
        raise DomainError(f"N must be an integer in 1..{MAX_QUBITS}, got {n}")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    n = int(n)
    model = SystemModel(2**n, [], [math.sqrt(gamma) * collective_dephasing(n)], {"scenario": "ensemble"})
    product = Scenario(
        f"ensemble:product:{n}",
        model,
        product_plus_state(n),
        {"amplitude": gamma * math.sqrt(6 * n * n - 2 * n), "excess": gamma * n},
        {"label": "product", "params": {"n": n, "gamma": gamma}},
    )
    ghz = Scenario(
        f"ensemble:ghz:{n}",
        model,
        ghz_state(n),
        {"amplitude": 2 * gamma * n * n, "excess": gamma * n * n},
        {"label": "ghz", "params": {"n": n, "gamma": gamma}},
    )
    return product, ghz


def qubit_engineering(gamma=1.0):
    """Target ``[1/2, sqrt(3)/2]`` under ``sqrt(gamma) sigma_-`` with no Hamiltonian."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    model = SystemModel(2, [], [math.sqrt(gamma) * ladder("minus")], {"scenario": "qubit-engineering"})
    psi0 = PureState([0.5, math.sqrt(3) / 2])
    extras = {
        "params": {"gamma": gamma},
        "optimal_u2": -math.sqrt(3) / 16 * gamma,
        "comparison": {"zero": np.zeros((2, 2), dtype=np.complex128), "sigma_z": pauli("z")},
    }
    return Scenario("qubit-engineering", model, psi0, {}, extras)


def qutrit_ladder(gamma=1.0):
    """Ladder decay ``|E> -> |S> -> |G>`` on ``[1/2, 1/sqrt(2), 1/2]``."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    jump = math.sqrt(gamma) * (projector(1, 0, 3) + projector(2, 1, 3))
    model = SystemModel(3, [], [jump], {"scenario": "qutrit-ladder"})
    psi0 = PureState([0.5, 1 / math.sqrt(2), 0.5])
    u = np.zeros(8)
    u[1] = -3 * gamma / (8 * math.sqrt(2))
    u[6] = -gamma / (8 * math.sqrt(2))
    extras = {
        "params": {"gamma": gamma},
        "published_u": u,
        "comparison": {
            "zero": np.zeros((3, 3), dtype=np.complex128),
            "S_z": np.diag([1.0, 0.0, -1.0]).astype(np.complex128),
        },
    }
    return Scenario("qutrit-ladder", model, psi0, {"amplitude": math.sqrt(7) / 4 * gamma, "excess": gamma / 4}, extras)


def _one(builder):
    return lambda **kw: [builder(**kw)]


#: CLI identifier -> builder returning a list of scenarios
REGISTRY = {
    "two-level-dephasing": _one(two_level_dephasing),
    "two-level-decay": _one(two_level_decay),
    "bell-collective": lambda gamma=1.0: bell_scenarios(gamma, collective=True),
    "bell-local": lambda gamma=1.0: bell_scenarios(gamma, collective=False),
    "ensemble": lambda n=2, gamma=1.0: list(ensemble_scenarios(n, gamma)),
    "qubit-engineering": _one(qubit_engineering),
    "qutrit-ladder": _one(qutrit_ladder),
}


def build(name, **params):
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown scenario {name!r}; choose from {', '.join(REGISTRY)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise DomainError(f"scenario {name!r}: {exc}") from None
