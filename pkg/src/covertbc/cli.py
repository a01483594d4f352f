"""Command-line surface.

Subcommands: validate, capacity, boundary, gamma, sweep, verify-taylor.
Machine-readable JSON goes to stdout and is deterministic under a fixed
--seed; human progress/timing lines go to stderr. Exit codes: 0 success,
1 computation/condition failure, 2 unreadable or malformed input.

The environment variable COVERT_THREADS caps optimizer parallelism.
"""
import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .backend import BACKEND
from .errors import ModelFormatError, ZeroCapacity
from .model import BcWardenModel, Channel, load_model
from .optimize import OptimizerConfig, gamma_star, pareto_boundary, sweep
from .rates import single_user_capacity
from .taylor import (
    fd_divergence_hessian_check,
    fd_mi_derivative_check,
    first_order_region_check,
    random_structured_joint,
)
from .validate import check_conditions, find_degrading_channel

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


@dataclass
class RunResult:
    """Envelope for command output: echoes inputs, carries the payload."""

    command: str
    inputs: dict
    outputs: dict
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _emit(result: RunResult, started: float) -> None:
    print(result.to_json())
    print(f"[covertbc] {result.command} finished in {time.monotonic() - started:.2f}s "
          f"(backend: {BACKEND})", file=sys.stderr)


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=getattr(args, "seed", 0))


def cmd_validate(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    report = check_conditions(model)
    cert = find_degrading_channel(model.p1, model.p2)
    result = RunResult(
        command="validate",
        inputs={"model": str(args.model)},
        outputs={"conditions": report.to_dict(), "degradation": cert.to_dict()},
        diagnostics={"warnings": [] if report.all_hold and cert.feasible else
                     (["conditions violated"] if not report.all_hold else [])
                     + ([] if cert.feasible else ["degradation: infeasible"])},
    )
    _emit(result, started)
    return EXIT_OK if report.all_hold and cert.feasible else EXIT_FAIL


def cmd_capacity(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    marginal = model.p1 if args.user == 1 else model.p2
    warnings = []
    try:
        value, pmf = single_user_capacity(marginal, model.q, model.x0)
        argmax = pmf.probs.tolist()
    except ZeroCapacity:
        value, argmax = 0.0, None
        warnings.append("degenerate channel: all divergence terms vanish, capacity 0")
    result = RunResult(
        command="capacity",
        inputs={"model": str(args.model), "user": args.user},
        outputs={"user": args.user, "capacity": value, "argmax_pmf": argmax},
        diagnostics={"warnings": warnings},
    )
    _emit(result, started)
    return EXIT_OK


def _front_payload(front) -> dict:
    return {
        "points": [[p.l1, p.l2] for p in front.points],
        "params": [
            {
                "nu": prm.nu,
                "ptilde_x_a": prm.ptilde_x_a.probs.tolist(),
                "pu_b": prm.pu_b.probs.tolist(),
                "px_given_u_b": prm.px_given_u_b.matrix.tolist(),
            }
            for prm in front.params
        ],
        "meta": front.meta,
    }


def cmd_boundary(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    front = pareto_boundary(model, _config(args), points=args.points)
    fmt = args.format
    if args.out and fmt is None:
        fmt = "csv" if str(args.out).lower().endswith(".csv") else "json"
    fmt = fmt or "json"

    if args.out:
        if fmt == "csv":
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\r\n")
                writer.writerow(["L1", "L2"])
                for p in front.points:
                    writer.writerow([repr(p.l1), repr(p.l2)])
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(_front_payload(front), fh, indent=2, sort_keys=True)
                fh.write("\n")
    result = RunResult(
        command="boundary",
        inputs={"model": str(args.model), "points": args.points, "seed": args.seed,
                "out": str(args.out) if args.out else None, "format": fmt},
        outputs={"points": [[p.l1, p.l2] for p in front.points]}
        if args.out else _front_payload(front),
        diagnostics={"warnings": [], "n_points": len(front.points)},
    )
    _emit(result, started)
    return EXIT_OK


def cmd_gamma(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    l1 = l2 = 0.0
    try:
        l1, _ = single_user_capacity(model.p1, model.q, model.x0)
    except ZeroCapacity:
        pass
    try:
        l2, _ = single_user_capacity(model.p2, model.q, model.x0)
    except ZeroCapacity:
        pass
    try:
        gamma = gamma_star(model, _config(args))
    except ZeroCapacity:
        result = RunResult("gamma", {"model": str(args.model), "seed": args.seed},
                           {"gamma_star": None, "l1_star": l1, "l2_star": l2},
                           {"warnings": ["both single-user capacities are zero"]})
        _emit(result, started)
        return EXIT_FAIL
    result = RunResult(
        command="gamma",
        inputs={"model": str(args.model), "seed": args.seed},
        outputs={"gamma_star": gamma, "l1_star": l1, "l2_star": l2},
        diagnostics={"warnings": []},
    )
    _emit(result, started)
    return EXIT_OK


def _eval_entry(entry, name: str, value: float) -> float:
    """Evaluate a family-file matrix entry: a number or an arithmetic
    expression in the sweep parameter (no builtins, no scripting)."""
    if isinstance(entry, (int, float)):
        return float(entry)
    if isinstance(entry, str):
        try:
            return float(eval(entry, {"__builtins__": {}}, {name: value}))  # noqa: S307
        except Exception as exc:
            raise ModelFormatError(f"cannot evaluate entry {entry!r}: {exc}") from exc
    raise ModelFormatError(f"matrix entries must be numbers or strings, got {type(entry)}")


def load_family(path):
    """Family file: base model plus a parametrized post-channel.

    JSON keys: x0, P1, Q, W (entries may be expressions in the parameter),
    param (the parameter name), values (list of parameter values). The weak
    receiver is P2 = P1 @ W(value).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read family file {path}: {exc}") from exc
    for key in ("x0", "P1", "Q", "W", "param", "values"):
        if key not in obj:
            raise ModelFormatError(f"family file missing key {key!r}")
    name = obj["param"]
    p1 = np.asarray(obj["P1"], dtype=np.float64)
    q = np.asarray(obj["Q"], dtype=np.float64)
    x0 = int(obj["x0"])
    w_template = obj["W"]
    values = [float(v) for v in obj["values"]]

    def family(value: float) -> BcWardenModel:
        w = np.array([[_eval_entry(e, name, value) for e in row] for row in w_template])
        sums = w.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-9:
            raise ModelFormatError(f"W({name}={value}) is not row-stochastic")
        p2 = p1 @ (w / sums[:, None])
        return BcWardenModel(Channel(p1), Channel(p2), Channel(q), x0)

    return family, values


def cmd_sweep(args) -> int:
    started = time.monotonic()
    family, values = load_family(args.family)
    rows = sweep(family, values, _config(args))
    out_rows = []
    for r in rows:
        out_rows.append({
            "param": r.param,
            "condition": None if r.error else int(r.condition_holds),
            "gamma_star": None if r.error else r.gamma_star,
            "l1_star": None if r.error else r.l1_star,
            "l2_star": None if r.error else r.l2_star,
            "sup_ratio": None if r.error or math.isinf(r.sup_ratio) else r.sup_ratio,
            "error": r.error,
        })
    result = RunResult(
        command="sweep",
        inputs={"family": str(args.family), "seed": args.seed},
        outputs={"rows": out_rows},
        diagnostics={"warnings": [r["error"] for r in out_rows if r["error"]]},
    )
    _emit(result, started)
    return EXIT_OK


def cmd_verify_taylor(args) -> int:
    started = time.monotonic()
    model = load_model(args.model)
    rng = np.random.default_rng(args.seed)
    grad_rel, mu2_fd, hess_rel, final_rels = [], [], [], []
    monotone_all = True
    h_grad, h_hess = 1e-4, 1e-3
    for _ in range(args.joints):
        sj = random_structured_joint(model, rng)
        for channel in (model.p1, model.p2):
            for which, wrt in (("u", "mu1"), ("x", "mu1"), ("x", "mu2")):
                fd, formula, err = fd_mi_derivative_check(sj, channel, wrt=wrt,
                                                          which=which, h=h_grad)
                grad_rel.append(err / max(abs(formula), 1e-12))
            fd, _, _ = fd_mi_derivative_check(sj, channel, wrt="mu2", which="u", h=h_grad)
            mu2_fd.append(abs(fd))
        hc = fd_divergence_hessian_check(sj, model.q, h=h_hess)
        hess_rel.append(hc.max_rel_err)
        eta1, eta2 = rng.uniform(0.3, 1.0, size=2)
        rep = first_order_region_check(model, sj, eta1, eta2)
        monotone_all = monotone_all and rep.monotone
        final_rels.append(rep.final_rel)

    passed = bool(
        max(grad_rel) <= 1e-2
        and max(mu2_fd) <= 10.0 * h_grad
        and max(hess_rel) <= 5e-2
        and monotone_all
        and max(final_rels) <= 1e-2
    )
    result = RunResult(
        command="verify-taylor",
        inputs={"model": str(args.model), "joints": args.joints, "seed": args.seed},
        outputs={
            "passed": passed,
            "max_rel_err_first_derivatives": float(max(grad_rel)),
            "max_abs_fd_dI_dmu2": float(max(mu2_fd)),
            "max_rel_err_hessian": float(max(hess_rel)),
            "first_order": {"monotone_all": bool(monotone_all),
                            "max_final_rel": float(max(final_rels))},
        },
        diagnostics={"warnings": [] if passed else ["verification failed"]},
    )
    _emit(result, started)
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertbc",
        description="Covert-capacity region tools for degraded broadcast "
                    "channels with a warden.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check model conditions and degradedness")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("capacity", help="single-user covert capacity")
    p.add_argument("model")
    p.add_argument("--user", type=int, choices=(1, 2), required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("boundary", help="Pareto boundary of the rate region")
    p.add_argument("model")
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (.csv or .json)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("gamma", help="time-sharing improvement coefficient")
    p.add_argument("model")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("sweep", help="condition bit and gamma* across a family")
    p.add_argument("family")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-taylor", help="finite-difference verification report")
    p.add_argument("model")
    p.add_argument("--joints", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_taylor)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ZeroCapacity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
