"""Command-line interface.

Subcommands: ``estimate`` (one adaptive run), ``campaign`` (Monte Carlo
batch from a config file), ``scaling`` (campaign plus power-law fit),
``validate-perturbation`` (closed form versus quadrature oracle CSV) and
``models-table`` (outcome-probability tables for both back-ends).

Exit status: 0 on success, 1 on validation/usage errors, 2 on runtime
errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from .campaign import CampaignSpec, read_summary_csv, run_campaign
from .errors import PhasimError
from .estimator import ProtocolConfig, run_protocol
from .models import (
    DetectorConfig,
    DyadicPhase,
    Parity,
    classical_outcome_prob,
    default_detector,
    noon_outcome_prob,
)
from .perturbation import (
    DEFAULT_NODES_PER_PERIOD,
    first_order_full,
    quadrature_oracle,
    sample_validity_regime,
)

TWO_PI = 2.0 * math.pi


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with status 2
        raise _UsageError(message)


def parse_phase_literal(text: str) -> float:
    """Phase from '<float>', '<float>pi' or 'dyadic:<bits>' (MSB finest)."""
    text = text.strip()
    if text.startswith("dyadic:"):
        bits = text[len("dyadic:") :]
        if not bits or any(c not in "01" for c in bits):
            raise ValueError(f"bad dyadic phase literal {text!r}")
        return DyadicPhase(tuple(int(c) for c in bits)).to_phase()
    if text.endswith("pi"):
        head = text[:-2]
        return (float(head) if head not in ("", "+", "-") else float(head + "1")) * math.pi
    return float(text)


def parse_config(path: str) -> dict[str, str]:
    """Flat key-value config with dotted section keys and # comments."""
    source = Path(path)
    if not source.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(source.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _detector_from_config(values: dict[str, str]) -> DetectorConfig | None:
    if not any(key.startswith("detector.") for key in values):
        return None
    n = int(values.get("detector.n", "2"))
    delta = float(values.get("detector.delta", "0.5"))
    detuning = float(values.get("detector.detuning", "1.0"))
    return DetectorConfig(
        omega_s=float(values.get("detector.omega_s", "1e-3")),
        omega_d=float(values.get("detector.omega_d", "1e-3")),
        detunings=tuple((detuning, detuning + delta) for _ in range(2 * (n - 1))),
        delta=delta,
        t=float(values.get("detector.t", "100.0")),
        n=n,
        gamma=float(values.get("detector.gamma", "0.0")),
    )


def campaign_spec_from_config(values: dict[str, str]) -> CampaignSpec:
    if "output_dir" not in values:
        raise ValueError("config must set output_dir")
    protocol = ProtocolConfig(
        k_max=int(values.get("protocol.k", "4")),
        repeats=int(values.get("protocol.m", "1")),
        model=values.get("protocol.model", "ideal"),
        detector=_detector_from_config(values),
        feedback_grid=int(values.get("protocol.feedback_grid", "256")),
        interleave=values.get("protocol.interleave", "false").lower() == "true",
    )
    k_sweep = None
    if "k_sweep" in values:
        k_sweep = tuple(int(tok) for tok in values["k_sweep"].split(",") if tok.strip())
    return CampaignSpec(
        protocol=protocol,
        trials=int(values.get("trials", "100")),
        output_dir=values["output_dir"],
        k_sweep=k_sweep,
        root_seed=int(values.get("root_seed", "0")),
        workers=int(values.get("workers", "1")),
    )


def _cmd_estimate(args) -> int:
    cfg = ProtocolConfig(
        k_max=args.K,
        repeats=args.M,
        model=args.model,
        feedback_grid=args.feedback_grid,
    )
    result = run_protocol(parse_phase_literal(args.phase), cfg, args.seed)
    print(f"estimate: {result.estimate!r}")
    print(f"sharpness: {result.sharpness!r}")
    print(f"holevo_variance: {result.holevo_variance!r}")
    print(f"n_resources: {result.n_resources}")
    print("outcomes: " + "".join(str(int(u)) for _, _, u in result.outcome_log))
    return 0


def _cmd_campaign(args) -> int:
    spec = campaign_spec_from_config(parse_config(args.config))
    result = run_campaign(spec)
    print(f"wrote {Path(spec.output_dir) / 'summary.csv'}")
    for point in result.points:
        print(
            f"K={point.k_max} N={point.n_resources} "
            f"V_H={point.holevo_variance:.6g} stderr={point.stderr:.3g}"
        )
    return 0


def _cmd_scaling(args) -> int:
    spec = campaign_spec_from_config(parse_config(args.config))
    result = run_campaign(spec)
    if math.isnan(result.slope):
        raise ValueError("scaling fit needs at least 3 usable sweep points")
    print(f"wrote {Path(spec.output_dir) / 'summary.csv'}")
    print(f"slope: {result.slope!r}")
    print(f"intercept: {result.intercept!r}")
    print(f"slope_ci: [{result.slope_ci[0]!r}, {result.slope_ci[1]!r}]")
    return 0


def _cmd_validate_perturbation(args) -> int:
    rows = []
    worst = 0.0
    for set_id, (params, x) in enumerate(sample_validity_regime(args.seed, args.sets)):
        closed = first_order_full(params, x)
        oracle = quadrature_oracle(params, x, nodes_per_period=args.budget)
        rel = abs(closed - oracle) / abs(oracle)
        worst = max(worst, rel)
        rows.append([set_id, closed.real, closed.imag, oracle.real, oracle.imag, rel])
    out = Path(args.out)
    with open(out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["set_id", "cf_re", "cf_im", "oracle_re", "oracle_im", "rel_err"])
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    print(f"wrote {out}")
    print(f"worst_rel_err: {worst!r}")
    return 0


def _cmd_models_table(args) -> int:
    detector = default_detector(args.n)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["phi", "ideal_even", "ideal_odd", "classical_even", "classical_odd"])
    for i in range(args.grid):
        phi = TWO_PI * i / args.grid
        ideal_even = noon_outcome_prob(args.n, phi, args.feedback, Parity.EVEN)
        classical_even = classical_outcome_prob(detector, phi, args.feedback, Parity.EVEN)
        writer.writerow(
            [
                repr(phi),
                repr(ideal_even),
                repr(1.0 - ideal_even),
                repr(classical_even),
                repr(1.0 - classical_even),
            ]
        )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="phasim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="run one adaptive estimation")
    p.add_argument("--phase", required=True, help="true phase: float, '<f>pi' or 'dyadic:bits'")
    p.add_argument("--K", type=int, required=True, help="largest probe exponent")
    p.add_argument("--M", type=int, default=1, help="repeats per probe size")
    p.add_argument("--model", default="ideal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feedback-grid", type=int, default=256)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("campaign", help="run a Monte Carlo campaign from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("scaling", help="campaign plus scaling-exponent fit")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser(
        "validate-perturbation",
        help="compare the closed-form amplitude against the quadrature oracle",
    )
    p.add_argument("--sets", type=int, default=10)
    p.add_argument("--seed", type=int, default=414)
    p.add_argument("--budget", type=int, default=DEFAULT_NODES_PER_PERIOD)
    p.add_argument("--out", default="perturbation_validation.csv")
    p.set_defaults(func=_cmd_validate_perturbation)

    p = sub.add_parser("models-table", help="dump outcome probabilities for both back-ends")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--feedback", type=float, default=0.0)
    p.set_defaults(func=_cmd_models_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, PhasimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to status 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
