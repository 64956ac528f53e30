"""Model files, state lists, JSON reports and CSV tables.

Model file format: one ``key = value`` per line, ``#`` starts a comment.

======================  ==================================================
``dimension``           Hilbert-space dimension (required, first use wins)
``hamiltonian``         operator expression; repeatable
``channel``             operator expression; repeatable
``hamiltonian_matrix``  explicit matrix, JSON rows of ``[re, im]`` pairs
``channel_matrix``      as above for a channel
``state``               comma-separated scalar expressions (amplitudes)
``lambda``              default radius
``label.<name>``        free-form metadata
======================  ==================================================

State-list files hold lines ``state <label> = <amplitudes>``.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bounds import QslReport
from ..errors import ModelError, ParseError
from ..model import SystemModel
from ..operators import NORM_TOL, PureState
from .parser import parse_operator, parse_scalar

#: Amplitude vectors within this distance of unit norm are renormalized.
NORM_SLACK = 1e-6


@dataclass
class ModelSpec:
    dimension: int
    #: expression strings or explicit complex matrices
    hamiltonians: list = field(default_factory=list)
    channels: list = field(default_factory=list)
    initial_state: list = None
    lam: float = None
    metadata: dict = field(default_factory=dict)

    def operators(self, kind):
        exprs = self.hamiltonians if kind == "hamiltonian" else self.channels
        out = []
        for j, e in enumerate(exprs):
            try:
                out.append(parse_operator(e, self.dimension) if isinstance(e, str) else _matrix(e, self.dimension))
            except ParseError as exc:
                raise ModelError(f"{kind} {j}: {exc}\n{exc.caret()}") from None
        return out

    def build(self):
        """Evaluate all expressions into ``(SystemModel, PureState)``."""
        model = SystemModel(
            self.dimension,
            self.operators("hamiltonian"),
            self.operators("channel"),
            dict(self.metadata),
        )
        if self.initial_state is None:
            raise ModelError("model has no initial state")
        return model, normalize_state(self.initial_state, self.dimension)


def _matrix(m, dim):
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise ModelError(f"explicit matrix has shape {m.shape}, expected ({dim}, {dim})")
    return m


def normalize_state(amplitudes, dim):
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if amps.size != dim:
        raise ModelError(f"state has {amps.size} amplitudes, dimension is {dim}")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > NORM_SLACK:
        raise ModelError(f"state norm {norm:.9g} is not within {NORM_SLACK} of 1")
    # amplitudes already normalized to working precision are kept bit-exact
    return PureState(amps if abs(norm - 1.0) <= NORM_TOL else amps / norm)


def _parse_amplitudes(text):
    return [parse_scalar(part.strip()) for part in _split_top(text)]


def _split_top(text):
    """Split on commas outside parentheses."""
    parts, depth, start = [], 0, 0
    for k, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:k])
            start = k + 1
    parts.append(text[start:])
    return parts


def _parse_matrix_json(text):
    rows = json.loads(text)
    m = np.array(rows, dtype=float)
    if m.ndim != 3 or m.shape[2] != 2:
        raise ValueError("expected rows of [re, im] pairs")
    return m[..., 0] + 1j * m[..., 1]


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            if "=" not in line:
                raise ModelError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            yield lineno, key, value


def parse_model_text(text, source="<model>"):
    spec = ModelSpec(dimension=0)
    seen_dim = False
    for lineno, key, value in _lines(text):
        where = f"{source}:{lineno}: {key}"
        try:
            if key == "dimension":
                if seen_dim:
                    raise ModelError(f"{where}: dimension given twice")
                spec.dimension = int(value)
                if spec.dimension < 1:
                    raise ValueError("dimension must be positive")
                seen_dim = True
            elif key in ("hamiltonian", "channel"):
                getattr(spec, key + "s").append(value)
            elif key in ("hamiltonian_matrix", "channel_matrix"):
                getattr(spec, key.split("_")[0] + "s").append(_parse_matrix_json(value))
            elif key == "state":
                spec.initial_state = _parse_amplitudes(value)
            elif key == "lambda":
                spec.lam = float(value)
            elif key.startswith("label."):
                spec.metadata[key[len("label."):]] = value
            else:
                raise ModelError(f"{where}: unknown key")
        except ModelError as exc:
            if str(exc).startswith(source):
                raise
            raise ModelError(f"{where}: {exc}") from None
        except (ValueError, TypeError) as exc:
            raise ModelError(f"{where}: {exc}") from None
    if not seen_dim:
        raise ModelError(f"{source}: missing 'dimension'")
    # validate expressions eagerly so errors carry the file name
    try:
        spec.operators("hamiltonian")
        spec.operators("channel")
    except ModelError as exc:
        raise ModelError(f"{source}: {exc}") from None
    return spec


def read_model_spec(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc}") from None
    return parse_model_text(text, str(path))


def load_model(path):
    """Read a model file and return ``(SystemModel, PureState)``."""
    spec = read_model_spec(path)
    try:
        return spec.build()
    except ModelError as exc:
        raise ModelError(f"{path}: {exc}") from None


def _complex_text(z):
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"({z.real!r}{sign}{abs(z.imag)!r}i)"


def _matrix_json(m):
    m = np.asarray(m, dtype=np.complex128)
    return json.dumps([[[float(z.real), float(z.imag)] for z in row] for row in m])


def format_model(spec):
    lines = [f"dimension = {spec.dimension}"]
    for kind in ("hamiltonian", "channel"):
        for e in getattr(spec, kind + "s"):
            if isinstance(e, str):
                lines.append(f"{kind} = {e}")
            else:
                lines.append(f"{kind}_matrix = {_matrix_json(e)}")
    if spec.initial_state is not None:
        lines.append("state = " + ", ".join(_complex_text(z) for z in spec.initial_state))
    if spec.lam is not None:
        lines.append(f"lambda = {spec.lam!r}")
    for key, value in spec.metadata.items():
        lines.append(f"label.{key} = {value}")
    return "\n".join(lines) + "\n"


def write_model(spec, path):
    Path(path).write_text(format_model(spec))


def spec_from_system(model, psi0, lam=None, metadata=None):
    """A :class:`ModelSpec` with explicit matrices reproducing ``model`` exactly."""
    return ModelSpec(
        dimension=model.dim,
        hamiltonians=[np.array(h) for h in model.hamiltonians],
        channels=[np.array(m) for m in model.channels],
        initial_state=list(psi0.amplitudes),
        lam=lam,
        metadata=dict(metadata if metadata is not None else model.labels),
    )


def read_states(path):
    """Read ``state <label> = amplitudes`` lines into ``[(label, PureState)]``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc}") from None
    out = []
    for lineno, key, value in _lines(text):
        parts = key.split()
        if not parts or parts[0] != "state" or len(parts) > 2:
            raise ModelError(f"{path}:{lineno}: expected 'state <label> = amplitudes'")
        label = parts[1] if len(parts) == 2 else f"state{len(out)}"
        try:
            amps = _parse_amplitudes(value)
            out.append((label, normalize_state(amps, len(amps))))
        except ModelError as exc:
            raise ModelError(f"{path}:{lineno}: {label}: {exc}") from None
    if not out:
        raise ModelError(f"{path}: no states found")
    return out


def write_states(states, path):
    lines = [f"state {label} = " + ", ".join(_complex_text(z) for z in psi.amplitudes) for label, psi in states]
    Path(path).write_text("\n".join(lines) + "\n")


# --- reports ---------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)  # 'inf' / 'nan' strings keep JSON strict
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()] if x.dtype.kind != "c" else [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _float(x):
    return float(x) if isinstance(x, str) else x


def report_to_dict(report):
    return {"kind": "qsl_report", **_jsonable(report.as_dict())}


def report_from_dict(data):
    fields = {k: v for k, v in data.items() if k != "kind"}
    for key in ("theta_T", "lam", "amplitude", "excess", "k", "t_star", "t_dc", "ratio"):
        fields[key] = _float(fields[key])
    return QslReport(**fields)


def solution_to_dict(solution, basis_name="generalized-gell-mann"):
    return {
        "kind": "engineering_solution",
        "basis": basis_name,
        "u": _jsonable(np.asarray(solution.u, dtype=float)),
        "h_opt": _jsonable(np.asarray(solution.h_opt)),
        "nullspace": [_jsonable(np.asarray(v, dtype=float)) for v in solution.nullspace],
        "nullspace_dim": len(solution.nullspace),
        "residual_norm": _jsonable(solution.residual_norm),
        "cost_value": _jsonable(solution.cost_value),
        "converged": bool(solution.converged),
    }


def dumps(data):
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def write_report(report, path):
    """Serialize a :class:`QslReport`, an engineering solution or a plain dict."""
    if isinstance(report, QslReport):
        data = report_to_dict(report)
    elif hasattr(report, "h_opt"):
        data = solution_to_dict(report)
    else:
        data = report
    Path(path).write_text(dumps(data))


def load_report(path):
    data = json.loads(Path(path).read_text())
    if data.get("kind") == "qsl_report":
        return report_from_dict(data)
    return data


# --- CSV -------------------------------------------------------------------


def format_number(x, digits=7):
    """Fixed 7-significant-digit rendering used by every table."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{digits}g}"
    return str(x)


def write_csv(columns, path):
    """Write ``{name: values}`` (all of equal length) with a header row."""
    columns = dict(columns)
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in zip(*columns.values()):
            writer.writerow([format_number(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(v)
    return cols
