"""Batch driver: decomposition checks, optical simulations, the
chained-interferometer solve, and the comparison report.

Exit codes: 0 every check passed, 1 a verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import optical
from .optical import (
    ChainParameters,
    deterministic_ts_gate,
    chained_ts_gate,
    heralded_ts_gate,
    kerr_cs_gate,
    naive_postselected_chain_probability,
    postselected_cs_gate,
    solve_chain_reflectivities,
    verify_chain_parameters,
)
from .report import build_report
from .toffoli import build_n_ts_circuit, expected_flipped_component, oracle_n_toffoli_sign, verify_decomposition

PASS, FAIL, USAGE = 0, 1, 2


def _emit(text: str, args) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _format_fraction(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return f"{float(value):.9f}"


def cmd_verify_toffoli(args) -> int:
    circuit = build_n_ts_circuit(args.n)
    oracle = oracle_n_toffoli_sign(args.n, expected_flipped_component(args.n))
    report = verify_decomposition(circuit, oracle, args.n)
    ok = (abs(report.fidelity_to_oracle - 1.0) < args.tol
          and report.qubit_subspace_leakage < args.tol
          and report.two_qudit_gate_count == 2 * args.n - 1)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2), args)
    else:
        _emit(report.to_text(), args)
    return PASS if ok else FAIL


def _realization_summary(realization, residuals: dict) -> dict:
    pattern = realization.sign_pattern()
    return {
        "construction": realization.name,
        "success_probability": _format_fraction(realization.success_probability),
        "success_probability_float": float(realization.success_probability),
        "flipped_component": list(realization.flipped_component),
        "transfer_scale": pattern.scale,
        "max_off_diagonal": pattern.max_off_diagonal,
        "magnitude_spread": pattern.magnitude_spread,
        **residuals,
    }


def _summary_text(summary: dict) -> str:
    lines = [f"construction:        {summary['construction']}"]
    lines.append(f"success probability: {summary['success_probability']}")
    flipped = ",".join(map(str, summary["flipped_component"]))
    lines.append(f"flipped component:   |{flipped}>")
    lines.append(f"transfer scale:      {summary['transfer_scale']:.12f}")
    lines.append(f"max off-diagonal:    {summary['max_off_diagonal']:.3e}")
    lines.append(f"magnitude spread:    {summary['magnitude_spread']:.3e}")
    for key, value in summary.items():
        if key in ("construction", "success_probability", "success_probability_float",
                   "flipped_component", "transfer_scale", "max_off_diagonal",
                   "magnitude_spread"):
            continue
        lines.append(f"{key + ':':21s}{value}")
    return "\n".join(lines)


def cmd_simulate_optical(args) -> int:
    tol = args.tol
    if args.which == "kerr":
        realization = kerr_cs_gate()
        expected = np.diag([1, 1, 1, -1]).astype(complex)
        residual = float(np.max(np.abs(realization.transfer - expected)))
        summary = _realization_summary(realization, {"residual_vs_diag(1,1,1,-1)": residual})
        ok = residual < tol
    elif args.which == "heralded":
        cs = Fraction(args.cs_success)
        realization = heralded_ts_gate(cs_success=cs)
        expected_total = cs * cs * Fraction(1, 2)
        ok = realization.success_probability == expected_total
        pattern = realization.sign_pattern()
        ok = ok and abs(pattern.scale - 1 / np.sqrt(2)) < tol and pattern.flipped == (0, 0, 1)
        summary = _realization_summary(realization, {
            "cs_success": _format_fraction(cs),
            "filter_success": _format_fraction(realization.filter_success),
        })
    elif args.which == "postselected-cs":
        realization = postselected_cs_gate()
        probs = realization.coincidence_probabilities()
        ok = (np.max(np.abs(probs - 1 / 9)) < tol
              and realization.flipped_component == (1, 1))
        summary = _realization_summary(realization, {
            "coincidence_probabilities": [float(p) for p in probs],
            "naive_chain_total": _format_fraction(naive_postselected_chain_probability()),
        })
    elif args.which == "chained":
        if args.params_file:
            with open(args.params_file) as fh:
                params = ChainParameters.from_json(fh.read())
            solved = False
        else:
            result = solve_chain_reflectivities(seed=args.seed, n_starts=args.starts)
            params = result.params
            solved = True
            if not result.converged:
                summary = {"construction": "post-selected T-S, chained interferometers",
                           "solver_converged": False,
                           "best_residual": result.residual}
                _emit(json.dumps(summary, indent=2) if args.format == "json"
                      else f"solver failed to converge; best residual {result.residual:.3e}", args)
                return FAIL
        verification = verify_chain_parameters(params)
        realization = chained_ts_gate(params)
        summary = _realization_summary(realization, {
            "solved_here": solved,
            "parameters": params.to_dict(),
            "target_gap_vs_1/72": verification.target_gap,
        })
        ok = verification.meets(probability_tol=max(tol, 1e-9))
    else:  # pragma: no cover - argparse restricts choices
        return USAGE
    text = json.dumps(summary, indent=2) if args.format == "json" else _summary_text(summary)
    _emit(text, args)
    return PASS if ok else FAIL


def cmd_report_all(args) -> int:
    params = None
    if args.params_file:
        with open(args.params_file) as fh:
            params = ChainParameters.from_json(fh.read())
    report = build_report(chain_params=params)
    _emit(json.dumps(report.to_dict(), indent=2) if args.format == "json"
          else report.to_text(), args)
    return PASS if report.all_ok else FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qudit-toffoli",
        description="Verify qudit-assisted Toffoli constructions and their optical realizations.")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--out", help="write output to this file instead of stdout")
    parser.add_argument("--tol", type=float, default=1e-10,
                        help="verification tolerance (default 1e-10)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_toffoli = sub.add_parser("verify-toffoli", help="check the n-control construction")
    p_toffoli.add_argument("--n", type=int, required=True, help="number of controls (>= 2)")
    p_toffoli.set_defaults(func=cmd_verify_toffoli)

    p_optical = sub.add_parser("simulate-optical", help="simulate one optical construction")
    p_optical.add_argument("which", choices=("kerr", "heralded", "postselected-cs", "chained"))
    p_optical.add_argument("--cs-success", default="1/4",
                           help="heralded C-S success probability as a fraction (default 1/4)")
    p_optical.add_argument("--params-file",
                           help="verify this reflectivity file instead of solving")
    p_optical.add_argument("--seed", type=int, default=20070, help="solver multistart seed")
    p_optical.add_argument("--starts", type=int, default=16, help="solver restarts")
    p_optical.set_defaults(func=cmd_simulate_optical)

    p_report = sub.add_parser("report-all", help="full comparison table")
    p_report.add_argument("--params-file", help="reflectivity file for the chained gate "
                          "(default: the committed solution)")
    p_report.set_defaults(func=cmd_report_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify-toffoli" and args.n < 2:
        parser.error("--n must be at least 2")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
