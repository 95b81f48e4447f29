"""Command line front end.

Every command prints one key-sorted JSON report to stdout and exits 0 when
its checks pass, 1 when they do not and 2 on bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CircuitParseError, parse_angle, parse_circuit
from .dualrail import LogicalState
from .fock import PhotonicState, apply_mode_unitary
from .fusion import (
    FusionError,
    beamsplitter_budget,
    expected_chain_success,
    grow_chain,
    spared_photons,
)
from .gates import GATE_CATALOG, HybridOpSpec, evaluate_hybrid, make_standard_specs
from .optimizer import OptimizerConfig, check_result, optimize

SEED_ENV = "LOFUSION_SEED"
DIGITS = 12

log = logging.getLogger("lofusion")


class InputError(Exception):
    pass


def _num(x: float) -> float:
    v = float(f"{float(x):.{DIGITS}g}")
    return 0.0 if v == 0 else v


def clean(obj):
    """Round floats to 12 significant digits and make everything JSON-native."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _digest(payload) -> str:
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- input resolution -----------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _amplitudes(raw, where: str) -> np.ndarray:
    try:
        vals = [complex(a[0], a[1]) if isinstance(a, list) else complex(a) for a in raw]
    except (TypeError, ValueError, IndexError):
        raise InputError(f"bad amplitude list in {where}") from None
    return np.array(vals, dtype=np.complex128)


def load_spec_file(path: str) -> HybridOpSpec:
    """JSON: {"num_qubits": n, "pairs": [{"input": [...], "target": [...]}, ...]}.

    Amplitudes are numbers or [re, im] pairs over the little-endian basis.
    """
    try:
        data = json.loads(_read(path))
        n = int(data["num_qubits"])
        pairs = data["pairs"]
        inputs = tuple(LogicalState(_amplitudes(p["input"], path)) for p in pairs)
        targets = tuple(LogicalState(_amplitudes(p["target"], path)) for p in pairs)
        return HybridOpSpec(
            num_qubits=n,
            inputs=inputs,
            targets=targets,
            description=str(data.get("description", path)),
            ancilla_modes=int(data.get("ancilla_modes", 0)),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed spec file {path}: {exc}") from None
    except ValueError as exc:
        raise InputError(f"invalid spec in {path}: {exc}") from None


def resolve_spec(name: str):
    specs = make_standard_specs()
    for key in (name, f"{name}_spec"):
        if key in specs:
            return key, specs[key], None
    if os.path.isfile(name):
        return name, load_spec_file(name), _read(name)
    raise InputError(f"unknown spec {name!r}; known: {', '.join(sorted(specs))}")


def resolve_unitary(target: str):
    if target in GATE_CATALOG:
        return np.asarray(GATE_CATALOG[target](), dtype=np.complex128), None
    if os.path.isfile(target):
        text = _read(target)
        try:
            return parse_circuit(text).unitary(), text
        except CircuitParseError as exc:
            raise InputError(f"{target}: {exc}") from None
    raise InputError(f"{target!r} is neither a catalog gate ({', '.join(GATE_CATALOG)}) nor a file")


def _occupation(text: str):
    try:
        occ = tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"bad occupation {text!r}; expected e.g. 1,0,1,0") from None
    if any(x < 0 for x in occ):
        raise InputError("occupation counts must be >= 0")
    return occ


# -- commands ---------------------------------------------------------------


def cmd_verify(args):
    u, circuit_text = resolve_unitary(args.target)
    spec_key, spec, spec_text = resolve_spec(args.spec)
    ev = evaluate_hybrid(u, spec, fidelity_atol=args.atol)
    checks = {"unit_fidelity": ev.success is not None}
    if args.expect_success is not None:
        checks["expected_success"] = (
            ev.success is not None and abs(ev.success - args.expect_success) <= args.success_tol
        )
    results = {
        "spec": spec_key,
        "modes": u.shape[0],
        "fidelity": ev.fidelity,
        "success": ev.success,
        "success_surrogate": ev.success_surrogate,
        "alpha": ev.alpha,
        "branch_norms": ev.branch_norms,
        "effective_matrix": ev.effective_matrix,
        "checks": checks,
    }
    return results, {"circuit": circuit_text, "spec": spec_text}, all(checks.values())


def cmd_fuse(args):
    try:
        out = grow_chain(args.n, args.mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    expected = expected_chain_success(args.n, args.mode)
    checks = {
        "chain_cluster": out.is_chain_cluster(),
        "expected_success": abs(out.cumulative_success - expected) <= 1e-9,
    }
    results = {
        "n": args.n,
        "mode": args.mode,
        "cumulative_success": out.cumulative_success,
        "expected_success": expected,
        "steps": [{"gate": g, "modes": list(m), "probability": p} for g, m, p in out.steps],
        "checks": checks,
    }
    return results, {}, all(checks.values())


def cmd_resources(args):
    try:
        spared = spared_photons(args.n, args.s)
        seq = beamsplitter_budget(args.n, "sequential")
        glob = beamsplitter_budget(args.n, "global")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    results = {
        "n": args.n,
        "s": args.s,
        "spared_photons": spared,
        "beamsplitters_sequential": seq,
        "beamsplitters_global": glob,
    }
    return results, {}, True


def cmd_optimize(args):
    spec_key, spec, spec_text = resolve_spec(args.spec)
    try:
        config = OptimizerConfig(
            restarts=args.restarts,
            max_iterations=args.max_iterations,
            seed=args.seed,
            tolerance=args.tolerance,
            threads=args.threads,
            ancilla_modes=args.ancilla_modes,
            form=args.form,
            target=args.target,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = optimize(spec, config)
    checks = {"feasible": res.feasible, "reproduced": res.feasible and check_result(res, spec, args.tolerance)}
    if args.min_success is not None:
        checks["min_success"] = res.feasible and res.success >= args.min_success
    results = {
        "spec": spec_key,
        "modes": res.params.num_modes,
        "success": res.success,
        "fidelity": res.fidelity,
        "feasible": res.feasible,
        "best_restart": res.best_restart,
        "restarts_run": len(res.traces),
        "params": {
            "thetas": res.params.thetas,
            "phis": res.params.phis,
            "phases": res.params.phases,
        },
        "checks": checks,
    }
    if args.traces:
        results["traces"] = [
            {
                "restart": t.index,
                "success": t.success,
                "fidelity": t.fidelity,
                "feasible": t.feasible,
                "iterations": t.iterations,
                "stages": [{"weight": w, "success": s, "fidelity": f} for w, s, f in t.stages],
            }
            for t in res.traces
        ]
    return results, {"spec": spec_text}, all(checks.values())


def cmd_simulate(args):
    u, circuit_text = resolve_unitary(args.circuit)
    occ = _occupation(args.occupation)
    if len(occ) != u.shape[0]:
        raise InputError(f"occupation has {len(occ)} modes, circuit has {u.shape[0]}")
    if sum(occ) == 0:
        raise InputError("occupation holds no photons")
    out = apply_mode_unitary(u, PhotonicState.fock(occ))
    amps = [
        {"occupation": list(k), "amplitude": a, "probability": abs(a) ** 2}
        for k, a in out.amplitudes.items()
    ]
    norm = out.norm2()
    checks = {"normalized": abs(norm - 1.0) <= 1e-10}
    results = {"modes": u.shape[0], "input": list(occ), "output": amps, "norm2": norm, "checks": checks}
    return results, {"circuit": circuit_text}, all(checks.values())


# -- argument parsing -------------------------------------------------------


def _expr(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lofusion", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="evaluate a gate or circuit file on a hybrid spec")
    v.add_argument("target", help="catalog gate name or circuit file")
    v.add_argument("spec", help="standard spec name or spec JSON file")
    v.add_argument("--atol", type=float, default=1e-9, help="fidelity tolerance")
    v.add_argument("--expect-success", type=_expr, default=None)
    v.add_argument("--success-tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fuse", help="grow a chain cluster by sequential fusion")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--mode", choices=("single", "bell"), default="single")
    f.set_defaults(func=cmd_fuse)

    r = sub.add_parser("resources", help="spared photons and splitter counts")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--s", type=_expr, required=True, help="per-step success probability")
    r.set_defaults(func=cmd_resources)

    o = sub.add_parser("optimize", help="search for a unit-fidelity, high-success unitary")
    o.add_argument("--spec", required=True)
    o.add_argument("--restarts", type=int, default=20)
    o.add_argument("--max-iterations", type=int, default=300, help="per inner solve")
    o.add_argument("--seed", type=int, default=default_seed, help=f"default ${SEED_ENV} or 0")
    o.add_argument("--threads", type=int, default=1)
    o.add_argument("--tolerance", type=float, default=1e-6)
    o.add_argument("--ancilla-modes", type=int, default=None)
    o.add_argument("--form", choices=("log", "linear"), default="log")
    o.add_argument("--target", type=float, default=None, help="stop once a run reaches this")
    o.add_argument("--min-success", type=float, default=None)
    o.add_argument("--no-traces", dest="traces", action="store_false")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", help="evolve a Fock state through a circuit")
    s.add_argument("circuit", help="circuit file or catalog gate name")
    s.add_argument("occupation", help="comma-separated photon counts, e.g. 1,0,1,0")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        seed = _default_seed()
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser(seed)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        results, files, ok = args.func(args)
    except (InputError, FusionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    options = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    report = {
        "command": args.command,
        "arguments": options,
        "input_digest": _digest({"arguments": options, "files": files}),
        "results": results,
        "passed": ok,
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }
    sys.stdout.write(dump_report(report))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
