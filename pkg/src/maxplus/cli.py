"""Command-line front end.

Every subcommand prints one JSON report (or a text rendering of it) and
exits with 0 (ok), 2 (no witness found) or 1 (error).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import mlp, spectral, stochastic
from .core import MaxPlusError, classify_matrix, mat_power, rank1, resolve_tol
from .matrix_io import load_model_json, matrix_to_json, read_matrix

EXIT_OK, EXIT_ERROR, EXIT_NO_WITNESS = 0, 1, 2


class NoWitness(Exception):
    def __init__(self, result):
        self.result = result


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def _summary(s: spectral.SpectralSummary):
    return {
        "rho_max": _num(s.rho_max),
        "type": s.type_label,
        "critical_nodes": list(s.critical_nodes),
        "critical_arcs": [list(a) for a in sorted(s.critical_graph.arcs)],
        "critical_components": [list(c) for c in s.critical_components],
        "cyclicity": s.cyclicity,
        "c_A": list(s.c_A),
        "kappa": s.kappa,
    }


def cmd_spectral(args, tol):
    A = read_matrix(args.A)
    out = _summary(spectral.critical_summary(A, tol))
    cls = classify_matrix(A)
    out.update(in_Mk=cls.in_Mk, primitive=cls.primitive, primitivity_index=cls.primitivity_index)
    return out


def cmd_power(args, tol):
    return {"n": args.n, "power": matrix_to_json(mat_power(read_matrix(args.A), args.n))}


def cmd_rank(args, tol):
    dec = rank1(read_matrix(args.A), tol)
    if dec is None:
        return {"rank1": False, "a": None, "b": None}
    return {"rank1": True, "a": matrix_to_json(dec[0]), "b": matrix_to_json(dec[1])}


def cmd_aplus(args, tol):
    return {"a_plus": matrix_to_json(spectral.a_plus(read_matrix(args.A), tol))}


def cmd_reduce(args, tol):
    B = read_matrix(args.B) if args.B else None
    r = mlp.reduce_pair(read_matrix(args.A), B, tol)
    rep = mlp.reducedness(r.A_bar, tol)
    return {
        "c_A": list(r.c_A), "kappa": r.kappa,
        "conjugator": matrix_to_json(r.conjugator),
        "A_bar": matrix_to_json(r.A_bar),
        "B_hat": None if r.B_hat is None else matrix_to_json(r.B_hat),
        "reduced": rep.reduced, "strictly_reduced": rep.strictly_reduced,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def cmd_genericity(args, tol):
    rep = mlp.genericity_report(read_matrix(args.A), read_matrix(args.B), args.exhaustive, tol)
    return {
        "e1_ok": rep.e1_ok,
        "gc_strongly_connected": rep.gc_strongly_connected,
        "a_bar_strictly_reduced": rep.a_bar_strictly_reduced,
        "eqANB_ok": rep.eqANB_ok,
        "crossing_N": rep.crossing_N,
        "eqANB_matrix": matrix_to_json(rep.eqANB_matrix),
        "all_ok": rep.all_ok,
        "exhaustive_forms_checked": rep.exhaustive_forms_checked,
        "exhaustive_forms_vanishing": rep.exhaustive_forms_vanishing,
        "violations": _jsonable(rep.violations),
    }


def _cert(cert: mlp.MlpCertificate, names: List[str]):
    return {
        "word": list(cert.word),
        "word_names": [names[i] for i in cert.word],
        "product": matrix_to_json(cert.product),
        "a": matrix_to_json(cert.decomposition[0]),
        "b": matrix_to_json(cert.decomposition[1]),
    }


def cmd_construct(args, tol):
    A, B = read_matrix(args.A), read_matrix(args.B)
    res = mlp.construct_scs1cyc1(A, B, args.m_max, args.p_max, tol)
    if not res.found:
        raise NoWitness({"best_critical_nodes": res.best_critical_nodes,
                         "best_mp": None if res.best_mp is None else list(res.best_mp)})
    cert = mlp.mlp_construct(A, B, args.m_max, args.p_max, tol)
    out = {"m": res.m, "p": res.p, "M": matrix_to_json(res.M)}
    out.update(_cert(cert, ["A", "B"]))
    return out


def cmd_search(args, tol):
    gens = [read_matrix(p) for p in args.matrices]
    cert = mlp.mlp_certificate_search(gens, args.depth, args.nodes, tol)
    if cert is None:
        raise NoWitness({"depth": args.depth, "nodes": args.nodes})
    return _cert(cert, [Path(p).name for p in args.matrices])


def cmd_neighborhood(args, tol):
    cert = mlp.rank1_neighborhood(read_matrix(args.A), tol)
    rep = mlp.verify_neighborhood(cert, args.trials, args.seed, tol, args.threads)
    return {
        "l": cert.l, "epsilon": _num(cert.epsilon), "gap": _num(cert.gap), "M": _num(cert.M),
        "N_inner": cert.N_inner, "n": cert.n,
        "trials": rep.trials, "rank1_count": rep.rank1_count, "passed": rep.passed,
        "failures": _jsonable(rep.failures),
    }


def _vec(values):
    return None if values is None else [float(v) for v in values]


def cmd_simulate(args, tol):
    model = load_model_json(args.model)
    x0 = _vec(args.x0) or [0.0] * model.k
    traj = stochastic.simulate(model, x0, args.n, args.seed)
    return {"states": matrix_to_json(traj.states), "word": traj.word, "seed": traj.seed}


def _estimate(e: stochastic.LyapunovEstimate):
    return {"point_estimate": _num(e.point_estimate), "std_error": _num(e.std_error),
            "n": e.horizon, "replicas": e.replicas}


def cmd_lyapunov(args, tol):
    model = load_model_json(args.model)
    if args.sweep:
        if not isinstance(model, stochastic.StochasticModel):
            raise MaxPlusError("--sweep needs a model with explicit generators")
        grid = json.loads(Path(args.sweep).read_text())
        rows = stochastic.lyapunov_sweep(model.generators, grid, args.n, args.replicas,
                                         args.seed, args.threads)
        return {"sweep": [{"p": p.tolist(), **_estimate(e)} for p, e in rows]}
    return _estimate(stochastic.lyapunov(model, args.n, args.replicas, args.seed, args.threads))


def cmd_couple(args, tol):
    model = load_model_json(args.model)
    st = stochastic.coupling_analysis(model, args.replicas, args.cap, args.seed,
                                      _vec(args.x0), _vec(args.y0), tol, args.threads)
    times = st.coupled_times
    return {
        "coupling_times": st.coupling_times,
        "fraction_coupled": st.fraction_coupled,
        "mean_coupling_time": float(np.mean(times)) if times else None,
        "cap": st.cap,
        "merge_ok": st.merge_ok,
        "merge_violations": _jsonable(st.merge_violations[:10]),
    }


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands re-accept the flags without overriding values given earlier
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        flags = argparse.ArgumentParser(add_help=False)
        flags.add_argument("--tol", type=float, default=d(None),
                           help="equality tolerance (default: $TROPICAL_TOL or 1e-9)")
        flags.add_argument("--format", choices=("json", "text"), default=d("json"))
        flags.add_argument("--threads", type=int, default=d(1))
        return flags

    common = global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="maxplus", parents=[global_flags(suppress=False)],
                                     description="Max-plus matrix products and the memory loss property.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    add("spectral", cmd_spectral, "rho_max, critical graph, type, c_A, kappa").add_argument("A")
    p = add("power", cmd_power, "max-plus power A^n")
    p.add_argument("A")
    p.add_argument("n", type=int)
    add("rank", cmd_rank, "rank-1 test and decomposition").add_argument("A")
    add("aplus", cmd_aplus, "A+ for rho_max(A) <= 0").add_argument("A")
    p = add("reduce", cmd_reduce, "reduced pair (A_bar, B_hat)")
    p.add_argument("A")
    p.add_argument("B", nargs="?")
    p = add("genericity", cmd_genericity, "genericity diagnostics for (A, B)")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--exhaustive", action="store_true")
    p = add("construct", cmd_construct, "constructive certificate from A^m B A^p")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--p-max", type=int, default=None)
    p = add("search", cmd_search, "breadth-first certificate search")
    p.add_argument("matrices", nargs="+")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--nodes", type=int, default=200_000)
    p = add("neighborhood", cmd_neighborhood, "rank-1 neighborhood and its sampled verification")
    p.add_argument("A")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p = add("simulate", cmd_simulate, "simulate x(n+1) = A(n) x(n)")
    p.add_argument("model")
    p.add_argument("--x0", type=float, nargs="+")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p = add("lyapunov", cmd_lyapunov, "Lyapunov exponent estimate")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep")
    p = add("couple", cmd_couple, "coupling times and merge check")
    p.add_argument("model")
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--cap", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", type=float, nargs="+")
    p.add_argument("--y0", type=float, nargs="+")
    return parser


def _inputs(args) -> dict:
    skip = {"func", "format", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _render_text(report: dict) -> str:
    lines = [f"command: {report['command']}", f"status: {report['status']}"]
    if report.get("message"):
        lines.append(f"message: {report['message']}")
    for key, val in (report.get("result") or {}).items():
        lines.append(f"{key}: {json.dumps(val)}")
    return "\n".join(lines)


def run_cli(argv: Optional[List[str]] = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"command": args.command, "inputs": _inputs(args), "status": "ok", "result": None}
    code = EXIT_OK
    try:
        tol = resolve_tol(args.tol)
        report["result"] = args.func(args, tol)
    except NoWitness as exc:
        report["status"] = "no-witness"
        report["result"] = exc.result
        code = EXIT_NO_WITNESS
    except mlp.NoWitnessError as exc:
        report["status"] = "no-witness"
        report["message"] = str(exc)
        code = EXIT_NO_WITNESS
    except (MaxPlusError, OSError, ValueError, KeyError) as exc:
        report["status"] = "error"
        report["message"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_ERROR
    if args.format == "json":
        print(json.dumps(report), file=stdout)
    else:
        print(_render_text(report), file=stdout)
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
