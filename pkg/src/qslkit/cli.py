"""Command-line entry point ``qslkit``.

Exit codes: 0 success, 2 malformed model or input file, 3 argument outside
its mathematical domain, 4 numerical failure, 5 engineering residual above
tolerance.
"""

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds, dynamics, engineering, scenarios
from .errors import DomainError, IntegrationError, ModelError, QslError
from .model import SystemModel
from .modelio import files
from .modelio.parser import parse_operator
from .operators import PureState

log = logging.getLogger("qslkit")

EXIT_OK, EXIT_MODEL, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_RESIDUAL = 0, 2, 3, 4, 5
RESIDUAL_TOL = 1e-9

fmt = files.format_number


class ResidualError(QslError):
    pass


def _threads():
    try:
        return max(1, int(os.environ.get("QSLKIT_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items):
    """Ordered map, parallel when QSLKIT_THREADS > 1."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _emit(args, data, lines):
    if getattr(args, "json", False):
        sys.stdout.write(files.dumps(data))
    else:
        for line in lines:
            print(line)


def _table(args, columns):
    if args.out:
        files.write_csv(columns, args.out)
    else:
        import csv

        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(columns)
        for row in zip(*columns.values()):
            writer.writerow([fmt(v) for v in row])


def _parse_range(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise DomainError(f"range must look like A:B:N, got {text!r}") from None
    if n < 1:
        raise DomainError("range needs at least one point")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


def _load(args):
    spec = files.read_model_spec(args.model)
    model, psi0 = spec.build()
    return spec, model, psi0


def _radius(args, spec=None):
    lam = getattr(args, "lam", None)
    theta = getattr(args, "theta", None)
    if lam is not None and theta is not None:
        raise DomainError("give only one of --lambda and --theta")
    if theta is not None:
        return bounds.lambda_from_theta(theta)
    if lam is None and spec is not None:
        lam = spec.lam
    if lam is None:
        raise DomainError("a radius is required: pass --lambda or --theta")
    if not (0.0 < lam <= 1.0):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    return lam


def _report_lines(r):
    t_star = "infinity (stationary)" if r.stationary else fmt(r.t_star)
    return [
        f"A      = {fmt(r.amplitude)}",
        f"E      = {fmt(r.excess)}",
        f"k      = {fmt(r.k)}",
        f"lambda = {fmt(r.lam)}",
        f"T*     = {t_star}",
        f"T_DC   = {'infinity' if math.isinf(r.t_dc) else fmt(r.t_dc)}",
        f"ratio  = {fmt(r.ratio)}",
        f"closed_system = {fmt(r.closed_system)}",
        f"stationary    = {fmt(r.stationary)}",
    ]


# --- subcommands -------------------------------------------------------------


def cmd_qsl(args):
    spec, model, psi0 = _load(args)
    report = bounds.qsl_report(model, psi0, _radius(args, spec))
    if args.report:
        files.write_report(report, args.report)
    _emit(args, files.report_to_dict(report), _report_lines(report))
    return EXIT_OK


def _hamiltonian_runs(args, model, psi0):
    """Resolve ``--hamiltonian`` choices into labelled models."""
    choices = args.hamiltonian or ["model"]
    runs = {}
    for choice in choices:
        if choice == "model":
            runs["model"] = model
        elif choice == "opt":
            sol = engineering.solve_optimal(engineering.EngineeringProblem.from_model(model, psi0))
            runs["opt"] = model.with_hamiltonians(sol.h_opt)
        else:
            try:
                h = parse_operator(choice, model.dim)
            except ModelError as exc:
                raise ModelError(f"--hamiltonian {choice!r}: {exc}") from None
            runs[choice] = model.with_hamiltonians(h)
    return runs


def cmd_simulate(args):
    _, model, psi0 = _load(args)
    runs = _hamiltonian_runs(args, model, psi0)
    step = args.step or min(dynamics.default_step(m) for m in runs.values())
    trajs = _map(lambda m: dynamics.evolve(m, psi0, args.tmax, step), runs.values())
    columns = {"time": trajs[0].times}
    single = len(runs) == 1
    for label, tr in zip(runs, trajs):
        columns["overlap" if single else f"overlap[{label}]"] = tr.overlaps
    if args.json:
        sys.stdout.write(files.dumps(columns))
    else:
        _table(args, columns)
    if args.plot:
        from .plotting import plot_curves

        curves = {label: tr.overlaps for label, tr in zip(runs, trajs)}
        plot_curves(trajs[0].times, curves, args.plot, "t", r"$\cos\Theta_t$")
    if args.out and not args.json:
        for label, tr in zip(runs, trajs):
            print(f"{label}: min overlap {fmt(tr.overlaps.min())} over [0, {fmt(args.tmax)}]")
    return EXIT_OK


def cmd_escape(args):
    spec, model, psi0 = _load(args)
    lam = _radius(args, spec)
    runs = _hamiltonian_runs(args, model, psi0)
    results = {}
    lines = []
    for label, m in runs.items():
        res = dynamics.escape_time(m, psi0, lam, args.tmax, args.step)
        rep = bounds.qsl_report(m, psi0, lam)
        ok = (not res.escaped) or res.time >= rep.t_star - 1e-9
        if not ok:
            log.warning("escape time %s below T* %s: integrator misuse?", res.time, rep.t_star)
        results[label] = {
            "escaped": res.escaped,
            "time": res.time,
            "t_max": res.t_max,
            "t_star": rep.t_star,
            "t_dc": rep.t_dc,
            "bound_holds": ok,
        }
        prefix = "" if len(runs) == 1 else f"{label}: "
        if res.escaped:
            lines.append(f"{prefix}T = {fmt(res.time)}  (T* = {fmt(rep.t_star)}, T_DC = {fmt(rep.t_dc)})")
            if not ok:
                lines.append(f"{prefix}WARNING: T < T*; reduce --step")
        else:
            lines.append(f"{prefix}not escaped within tmax = {fmt(res.t_max)}")
    data = {"lambda": lam, "runs": results} if len(runs) > 1 else {"lambda": lam, **results[next(iter(runs))]}
    _emit(args, data, lines)
    return EXIT_OK


def cmd_rank(args):
    spec, model, _ = _load(args)
    lam = _radius(args, spec)
    labelled = files.read_states(args.states)
    order = bounds.rank_states(model, [psi for _, psi in labelled], lam)
    rows = [{"rank": r + 1, "label": labelled[i][0], "index": i, "t_star": t} for r, (i, t) in enumerate(order)]
    lines = [f"{row['rank']}. {row['label']}  T* = {'infinity' if math.isinf(row['t_star']) else fmt(row['t_star'])}" for row in rows]
    _emit(args, {"lambda": lam, "ranking": rows}, lines)
    return EXIT_OK


def cmd_ratio_grid(args):
    if not (0 <= args.kmax <= bounds.K_MAX + 1e-6):
        raise DomainError(f"--kmax must lie in [0, 1/sqrt(2)], got {args.kmax}")
    if not (0 < args.lmax <= 1):
        raise DomainError(f"--lmax must lie in (0, 1], got {args.lmax}")
    if args.n < 2:
        raise DomainError("--n must be at least 2")
    ks = np.linspace(0.0, min(args.kmax, bounds.K_MAX), args.n)
    lams = args.lmax * np.arange(1, args.n + 1) / args.n
    cells = [(k, lam) for k in ks for lam in lams]
    ratios = _map(lambda c: bounds.bound_ratio(*c), cells)
    columns = {"k": [c[0] for c in cells], "lambda": [c[1] for c in cells], "ratio": ratios}
    if args.json:
        sys.stdout.write(files.dumps(columns))
    else:
        _table(args, columns)
    if args.plot:
        from .plotting import plot_ratio_grid

        plot_ratio_grid(columns["k"], columns["lambda"], ratios, args.plot)
    return EXIT_OK


def cmd_scan(args):
    spec, model, psi0 = _load(args)
    values = _parse_range(args.range)

    if args.param == "theta":
        if model.dim != 2:
            raise DomainError("theta scans need a two-level model")

        def point(theta):
            state = PureState([math.cos(theta), np.exp(1j * args.phi) * math.sin(theta)])
            return bounds.qsl_report(model, state, _radius(args, spec))

    elif args.param == "gamma":

        def point(gamma):
            if gamma <= 0:
                raise DomainError(f"gamma must be positive, got {gamma}")
            return bounds.qsl_report(model.scaled_channels(gamma), psi0, _radius(args, spec))

    else:

        def point(lam):
            return bounds.qsl_report(model, psi0, lam)

    reports = _map(point, values)
    columns = {
        args.param: values,
        "amplitude": [r.amplitude for r in reports],
        "excess": [r.excess for r in reports],
        "k": [r.k for r in reports],
        "t_star": [r.t_star for r in reports],
        "t_dc": [r.t_dc for r in reports],
        "ratio": [r.ratio for r in reports],
    }
    if args.json:
        sys.stdout.write(files.dumps(columns))
    else:
        _table(args, columns)
    if args.plot:
        from .plotting import plot_curves

        if args.param == "gamma":
            plot_curves(values, {"ratio": columns["ratio"]}, args.plot, r"$\gamma$", r"$T_*/T_{DC}$", logx=True)
        else:
            plot_curves(values, {"T*": columns["t_star"]}, args.plot, args.param, r"$T_*$")
    return EXIT_OK


def _slope(ns, ts):
    ns, ts = np.asarray(ns, dtype=float), np.asarray(ts, dtype=float)
    return float(np.polyfit(np.log(ns), np.log(ts), 1)[0])


def ensemble_table(nmax, gamma, lam):
    rows = {"N": [], "A_product": [], "E_product": [], "t_star_product": [], "A_ghz": [], "E_ghz": [], "t_star_ghz": []}

    def one(n):
        prod, ghz = scenarios.ensemble_scenarios(n, gamma)
        return n, bounds.qsl_report(prod.model, prod.psi0, lam), bounds.qsl_report(ghz.model, ghz.psi0, lam)

    for n, rp, rg in _map(one, range(1, nmax + 1)):
        rows["N"].append(n)
        rows["A_product"].append(rp.amplitude)
        rows["E_product"].append(rp.excess)
        rows["t_star_product"].append(rp.t_star)
        rows["A_ghz"].append(rg.amplitude)
        rows["E_ghz"].append(rg.excess)
        rows["t_star_ghz"].append(rg.t_star)
    return rows


def cmd_ensemble_scaling(args):
    if not 1 <= args.nmax <= 12:
        raise DomainError(f"--nmax must lie in 1..12, got {args.nmax}")
    lam = _radius(args)
    rows = ensemble_table(args.nmax, args.gamma, lam)
    if args.json:
        sys.stdout.write(files.dumps(rows))
    else:
        _table(args, rows)
    if args.nmax >= 3 and not args.json:
        ns = rows["N"][1:]
        msg = (
            f"log-log slope over N = 2..{args.nmax}: product {fmt(_slope(ns, rows['t_star_product'][1:]))}, "
            f"GHZ {fmt(_slope(ns, rows['t_star_ghz'][1:]))}"
        )
        print(msg, file=sys.stderr if not args.out else sys.stdout)
    if args.plot:
        from .plotting import plot_curves

        curves = {"product": rows["t_star_product"], "GHZ": rows["t_star_ghz"]}
        plot_curves(rows["N"], curves, args.plot, "N", r"$T_*$", logx=True, logy=True)
    return EXIT_OK


def cmd_optimize(args):
    _, model, psi0 = _load(args)
    problem = engineering.EngineeringProblem.from_model(model, psi0)
    sol = engineering.solve_optimal(problem)
    a_before = bounds.amplitude(model, psi0)
    a_after = bounds.amplitude(model.with_hamiltonians(sol.h_opt), psi0)
    data = files.solution_to_dict(sol)
    data.update({"amplitude_before": a_before, "amplitude_after": a_after})
    if args.report:
        files.write_report(data, args.report)
    u, h_opt = _chop(sol.u), _chop(sol.h_opt)
    lines = ["u = [" + ", ".join(fmt(x) for x in u) + "]", "H_opt ="]
    for row in h_opt:
        lines.append("  [" + ", ".join(_cfmt(z) for z in row) + "]")
    lines += [
        f"nullspace dimension = {sol.nullspace_dim}",
        f"F(H_opt) = {fmt(sol.cost_value)}",
        f"A before = {fmt(a_before)}",
        f"A after  = {fmt(a_after)}",
        f"residual = {fmt(sol.residual_norm)}",
    ]
    _emit(args, data, lines)
    if sol.residual_norm > RESIDUAL_TOL * problem.scale:
        raise ResidualError(f"stationarity residual {sol.residual_norm:.3g} exceeds tolerance")
    return EXIT_OK


def _chop(x, rel=1e-14):
    """Zero out rounding debris for display."""
    x = np.array(x)
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    small = np.abs(x.real) <= rel * scale
    x.real[small] = 0.0
    if np.iscomplexobj(x):
        x.imag[np.abs(x.imag) <= rel * scale] = 0.0
    return x


def _cfmt(z):
    re_, im = fmt(float(z.real) + 0.0), fmt(abs(float(z.imag)))
    return f"{re_}{'-' if z.imag < 0 else '+'}{im}i"


def cmd_scenario(args):
    params = {}
    for key in ("omega", "gamma", "theta", "phi", "n"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    built = scenarios.build(args.name, **params)
    lam = args.lam if args.lam is not None else 0.1
    if not (0 < lam <= 1):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    out, lines = [], []
    for sc in built:
        rep = bounds.qsl_report(sc.model, sc.psi0, lam)
        entry = {"name": sc.name, "report": files.report_to_dict(rep)}
        ref = {k: v for k, v in sc.reference.items() if not callable(v)}
        entry["reference"] = ref
        out.append(entry)
        t = "infinity (stationary)" if rep.stationary else fmt(rep.t_star)
        line = f"{sc.name}: A = {fmt(rep.amplitude)}, E = {fmt(rep.excess)}, T* = {t}"
        if "amplitude" in ref:
            line += f"  [reference A = {fmt(ref['amplitude'])}, E = {fmt(ref['excess'])}]"
        lines.append(line)
    if args.write_model:
        if len(built) == 1:
            targets = [(args.write_model, built[0])]
        else:
            stem, ext = os.path.splitext(args.write_model)
            targets = [(f"{stem}-{sc.name.split(':')[-1]}{ext or '.model'}", sc) for sc in built]
        for path, sc in targets:
            files.write_model(files.spec_from_system(sc.model, sc.psi0, lam, {"name": sc.name}), path)
            lines.append(f"wrote {path}")
    _emit(args, {"lambda": lam, "scenarios": out}, lines)
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="qslkit", description="Explicit quantum speed limits for open systems.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def radius(sp, required=False):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--lambda", dest="lam", type=float, help="radius sqrt(1 - cos Theta_T)")
        g.add_argument("--theta", type=float, help="target angle Theta_T in (0, pi/2]")

    s = sub.add_parser("qsl", help="speed-limit report for a model file")
    s.add_argument("--model", required=True)
    radius(s)
    s.add_argument("--json", action="store_true")
    s.add_argument("--report", help="also write the JSON report to this path")
    s.set_defaults(func=cmd_qsl)

    s = sub.add_parser("simulate", help="integrate the master equation, emit cos Theta_t")
    s.add_argument("--model", required=True)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--step", type=float)
    s.add_argument("--hamiltonian", action="append", help="'model', 'opt' or an expression; repeatable")
    s.add_argument("--out")
    s.add_argument("--plot")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("escape", help="first exit time from the lambda ball")
    s.add_argument("--model", required=True)
    radius(s)
    s.add_argument("--tmax", type=float)
    s.add_argument("--step", type=float)
    s.add_argument("--hamiltonian", action="append")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_escape)

    s = sub.add_parser("rank", help="order states by robustness")
    s.add_argument("--model", required=True)
    s.add_argument("--states", required=True)
    radius(s)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("ratio-grid", help="T*/T_DC over a (k, lambda) grid")
    s.add_argument("--kmax", type=float, default=0.7071)
    s.add_argument("--lmax", type=float, default=1.0)
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--out")
    s.add_argument("--plot")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_ratio_grid)

    s = sub.add_parser("scan", help="bounds along theta, gamma or lambda")
    s.add_argument("--model", required=True)
    s.add_argument("--param", choices=("theta", "gamma", "lambda"), required=True)
    s.add_argument("--range", required=True, help="A:B:N")
    radius(s)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--out")
    s.add_argument("--plot")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("ensemble-scaling", help="T* of |+>^N and GHZ versus N")
    s.add_argument("--nmax", type=int, default=10)
    s.add_argument("--gamma", type=float, default=1.0)
    radius(s)
    s.add_argument("--out")
    s.add_argument("--plot")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_ensemble_scaling)

    s = sub.add_parser("optimize", help="Hamiltonian that maximizes T*")
    s.add_argument("--model", required=True)
    s.add_argument("--json", action="store_true")
    s.add_argument("--report")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("scenario", help="built-in worked examples")
    s.add_argument("name", choices=sorted(scenarios.REGISTRY))
    s.add_argument("--omega", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--phi", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--write-model")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_scenario)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ResidualError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (IntegrationError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QslError as exc:  # dimension mismatches come from bad model files
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
