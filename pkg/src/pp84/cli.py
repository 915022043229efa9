"""Command-line frontend.

Exit codes: 0 success, 1 usage error (bad flags, missing or malformed
payload), 2 parameter values outside their allowed ranges.  Output goes
to standard output unless ``--output`` is given; CSV numbers carry nine
significant digits and lines end in LF.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import string
import sys
from typing import Optional, Sequence

import numpy as np

from . import analytics as A
from .alphabet import PREP_LABELS, Basis, EncodingOp, PrepState
from .attacks import AttackParams, IncoherentTwoAncilla, NoAttack, ProjectiveInterceptResend
from .protocol import (ControlBasis, DetectionOutcome, Mode, RunBatch, RunConfig, RunRecord,
                       SessionMode, loss_anomaly_test, qdc_sessions, run_bb84_baseline,
                       run_session)
from .stats import (ComparisonReport, SessionStats, agreement, compare, estimate_detection,
                    mutual_information_from_counts, mutual_information_stderr)

TRANSCRIPT_HEADER = ("run", "prep", "mode", "alice_basis", "alice_outcome", "alice_op",
                     "bob_outcome", "detection", "lost_fwd", "lost_bwd")
CURVES_HEADER = ("x", "d", "i_ab", "i_ae", "i_ae_bound")
EFFICIENCY_HEADER = ("P", "pp84_eff", "bb84_eff")
QDC_HEADER = ("stream", "delivered", "aborted", "bits_delivered", "abort_run", "runs",
              "bob_bits")
BB84_HEADER = ("qubits", "received", "sifted", "errors", "error_rate", "stderr", "efficiency")

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


# -- transcripts ---------------------------------------------------------

_MODE_NAMES = ("encoding", "control")
_OUTCOME_LABELS = (("0", "1"), ("+", "-"))


def transcript_rows(b: RunBatch):
    """One CSV row per run; absent fields are empty strings."""
    pbasis = b.prep // 2
    for i in range(len(b)):
        mode = int(b.mode[i])
        basis = int(b.alice_basis[i])
        yield (
            int(b.run[i]),
            PREP_LABELS[b.prep[i]],
            _MODE_NAMES[mode] if mode >= 0 else "",
            Basis(basis).name if basis >= 0 else "",
            _OUTCOME_LABELS[basis][b.alice_outcome[i]] if basis >= 0 else "",
            str(EncodingOp(int(b.alice_op[i]))) if b.alice_op[i] >= 0 else "",
            _OUTCOME_LABELS[pbasis[i]][b.bob_outcome[i]] if b.bob_outcome[i] >= 0 else "",
            str(DetectionOutcome(int(b.detection[i]))),
            int(b.lost_fwd[i]),
            int(b.lost_bwd[i]),
        )


def read_transcript(text: str) -> list[RunRecord]:
    """Parse transcript CSV back into run records (without Eve's data)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != TRANSCRIPT_HEADER:
        raise ValueError(f"unexpected header {header}")
    ops = {str(op): op for op in EncodingOp}
    detections = {str(d): d for d in DetectionOutcome}
    out = []
    for row in reader:
        run, prep, mode, basis, a_out, op, bob, det, lf, lb = row
        out.append(RunRecord(
            int(run), PrepState.from_label(prep),
            Mode(_MODE_NAMES.index(mode)) if mode else None,
            Basis[basis] if basis else None, a_out or None,
            ops[op] if op else None, bob or None, detections[det],
            lf == "1", lb == "1"))
    return out


# -- argument handling ---------------------------------------------------

def _add_common(p: argparse.ArgumentParser, attacks=("none", "projective", "incoherent")):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attack", choices=attacks, default="none")
    p.add_argument("--transmission", "--loss", dest="transmission", type=float, default=1.0,
                   metavar="P", help="per-pass transmission probability P")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None)


def _add_protocol(p: argparse.ArgumentParser):
    p.add_argument("--control-prob", type=float, default=0.5)
    p.add_argument("--control-basis", choices=[c.value for c in ControlBasis],
                   default=ControlBasis.RANDOM.value)
    for flag in ("F", "x", "y", "Fp", "xp", "yp"):
        p.add_argument(f"--{flag}", type=float, default=None)
    p.add_argument("--interleaved", action="store_true",
                   help="incoherent attack: measure the first ancilla before Alice acts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pp84", description="PP84 two-way QKD/QDC simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a QKD or QDC session")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--mode", choices=("qkd", "qdc"), default="qkd")
    p.add_argument("--payload", default=None, help="QDC payload as hex")

    p = sub.add_parser("curves", help="information vs detection for the balanced attack")
    p.add_argument("--points", type=int, default=91)
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("thresholds", help="security thresholds on the detection probability")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("efficiency", help="lossy efficiency of PP84 and BB84")
    p.add_argument("--points", type=int, default=20, help="grid P = k/points, k = 1..points")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("qdc-send", help="send a payload over one or more QDC sessions")
    _add_common(p)
    _add_protocol(p)
    p.add_argument("--payload", required=True)
    p.add_argument("--sessions", type=int, default=1)

    p = sub.add_parser("bb84-baseline", help="one-way BB84 with sifting")
    _add_common(p, attacks=("none", "projective"))
    p.add_argument("--qubits", "--runs", dest="qubits", type=int, default=100000)
    return parser


def parse_payload(text: str) -> list[int]:
    """Hex string to bits, most significant bit of each digit first."""
    t = text.strip().lower()
    if t.startswith("0x"):
        t = t[2:]
    if not t:
        raise UsageError("payload is empty")
    if any(c not in string.hexdigits for c in t):
        raise UsageError(f"payload {text!r} is not hexadecimal")
    value = int(t, 16)
    return [int(c) for c in format(value, f"0{4 * len(t)}b")]


def bits_to_hex(bits: Sequence[int]) -> str:
    bits = [int(b) for b in bits]
    if len(bits) % 4 or any(b < 0 for b in bits):
        return ""
    return "".join(format(int("".join(map(str, bits[i:i + 4])), 2), "x")
                   for i in range(0, len(bits), 4))


def _attack(args):
    kind = args.attack
    if kind == "none":
        return NoAttack()
    if kind == "projective":
        return ProjectiveInterceptResend()
    f = 1.0 if args.F is None else args.F
    x = math.pi / 4 if args.x is None else args.x
    y = math.pi / 2 if args.y is None else args.y
    params = AttackParams(
        f, x, y,
        f if args.Fp is None else args.Fp,
        x if args.xp is None else args.xp,
        y if args.yp is None else args.yp)
    return IncoherentTwoAncilla(params, interleaved=args.interleaved)


def _config(args, mode: SessionMode) -> RunConfig:
    return RunConfig(control_prob=args.control_prob, attack=_attack(args),
                     transmission_prob=args.transmission, mode=mode, seed=args.seed,
                     control_basis=ControlBasis(args.control_basis))


# -- analytic expectations for the simulate report -----------------------

def analytic_report(config: RunConfig, stats: SessionStats) -> list[ComparisonReport]:
    attack = config.attack
    reports = []
    if stats.applicable_checks:
        if isinstance(attack, NoAttack):
            d = 0.0
        elif isinstance(attack, ProjectiveInterceptResend):
            d = 0.375
        else:
            q = attack.params
            d = A.p_d_average(q.f_fwd, q.x, q.y, q.f_bwd, q.x_prime, q.y_prime)
        reports.append(compare("detection", d, *estimate_detection(stats)))

    z_tab, x_tab = stats.joint_ab[0], stats.joint_ab[1]
    bob = None  # (Z correct rate, X correct rate)
    eve_rate = None
    if isinstance(attack, NoAttack):
        bob = (1.0, 1.0)
    elif isinstance(attack, ProjectiveInterceptResend):
        bob, eve_rate = (0.75, 0.75), 1.0
    elif attack.params.f_fwd == 1.0 and attack.params.f_bwd == 1.0:
        q = attack.params
        bob = (1.0, (1 + math.cos(q.x) * math.cos(q.x_prime)) / 2)
        eve_rate = (1 + math.sin(q.x) * math.sin(q.x_prime)) / 2
    if bob is not None and z_tab.sum() and x_tab.sum():
        reports.append(compare("bob_correct_rate_z", bob[0], *agreement(z_tab)))
        reports.append(compare("bob_correct_rate_x", bob[1], *agreement(x_tab)))
        i_exp = 1 - 0.5 * (A.binary_entropy(bob[0]) + A.binary_entropy(bob[1]))
        i_emp = 0.5 * (mutual_information_from_counts(z_tab) + mutual_information_from_counts(x_tab))
        se = 0.5 * math.hypot(mutual_information_stderr(z_tab), mutual_information_stderr(x_tab))
        reports.append(compare("i_ab", i_exp, i_emp, se))
    eve_tab = stats.joint_ae.sum(axis=0)
    if eve_rate is not None and eve_tab.sum():
        reports.append(compare("eve_correct_rate", eve_rate, *agreement(eve_tab)))
        reports.append(compare("i_ae", 1 - A.binary_entropy(eve_rate),
                               mutual_information_from_counts(eve_tab),
                               mutual_information_stderr(eve_tab)))
    return reports


# -- subcommands ---------------------------------------------------------

def cmd_simulate(args) -> str:
    mode = SessionMode(args.mode)
    if mode is SessionMode.QDC:
        if args.payload is None:
            raise UsageError("--mode qdc needs --payload")
        if args.runs is not None:
            raise UsageError("--runs does not apply to QDC; the payload sets the length")
        payload = parse_payload(args.payload)
        config = _config(args, mode)
        result = run_session(config, payload=payload, stream=0)
    else:
        if args.payload is not None:
            raise UsageError("--payload is only valid with --mode qdc")
        runs = 10000 if args.runs is None else args.runs
        if runs < 1:
            raise ValueError("--runs must be positive")
        config = _config(args, mode)
        result = run_session(config, runs=runs, stream=0)

    if args.format == "csv":
        return _csv_text(TRANSCRIPT_HEADER, transcript_rows(result.transcript))
    out = {
        "seed": config.seed,
        "mode": mode.value,
        "attack": repr(config.attack),
        "control_prob": config.control_prob,
        "transmission": config.transmission_prob,
        "stats": result.stats.to_dict(),
        "report": [r.to_dict() for r in analytic_report(config, result.stats)],
    }
    losses = loss_anomaly_test(result.stats)
    out["loss_test"] = {"verdict": losses.verdict,
                        "z": None if math.isnan(losses.z) else losses.z}
    if mode is SessionMode.QDC:
        out["qdc"] = {"delivered": result.delivered, "aborted": result.aborted,
                      "bits_delivered": result.bits_delivered,
                      "payload_bits": result.payload_bits, "abort_run": result.abort_run,
                      "bob_bits": "".join(map(str, result.bob_bits.tolist()))}
    return _json_text(out)


def cmd_curves(args) -> str:
    if args.points < 2:
        raise ValueError("--points must be at least 2")
    rows = [(fmt(p.x), fmt(p.d), fmt(p.i_ab), fmt(p.i_ae), fmt(p.i_ae_bound))
            for p in A.curve(args.points)]
    return _csv_text(CURVES_HEADER, rows)


def cmd_thresholds(args) -> str:
    inc = A.security_threshold("incoherent")
    bound = A.security_threshold("bound")
    if args.format == "json":
        return _json_text({"incoherent": {"d": inc.d, "x": inc.x},
                           "bound": {"d": bound.d, "x": bound.x},
                           "bb84_reference": A.BB84_THRESHOLD_REFERENCE})
    rows = [("incoherent", fmt(inc.d), fmt(inc.x)), ("bound", fmt(bound.d), fmt(bound.x)),
            ("bb84_reference", fmt(A.BB84_THRESHOLD_REFERENCE), "")]
    return _csv_text(("curve", "d", "x"), rows)


def cmd_efficiency(args) -> str:
    if args.points < 1:
        raise ValueError("--points must be at least 1")
    grid = [k / args.points for k in range(1, args.points + 1)]
    cross = A.efficiency_crossover()
    if args.format == "json":
        return _json_text({"crossover": cross,
                           "grid": [{"P": p, "pp84_eff": A.pp84_efficiency(p),
                                     "bb84_eff": A.bb84_efficiency(p)} for p in grid]})
    print(f"crossover P={fmt(cross)}", file=sys.stderr)
    rows = [(fmt(p), fmt(A.pp84_efficiency(p)), fmt(A.bb84_efficiency(p))) for p in grid]
    return _csv_text(EFFICIENCY_HEADER, rows)


def cmd_qdc_send(args) -> str:
    payload = parse_payload(args.payload)
    if args.sessions < 1:
        raise ValueError("--sessions must be positive")
    config = _config(args, SessionMode.QDC)
    s = qdc_sessions(config, payload, range(args.sessions))
    rate, se = s.success_rate()
    rows = []
    for k in range(args.sessions):
        bits = s.bob_bits[k][:s.bits_delivered[k]]
        rows.append((int(s.streams[k]), int(s.delivered[k]), int(s.aborted[k]),
                     int(s.bits_delivered[k]),
                     "" if s.abort_run[k] < 0 else int(s.abort_run[k]), int(s.runs[k]),
                     "".join(map(str, bits.tolist()))))
    if args.format == "json":
        return _json_text({"payload": args.payload, "payload_bits": len(payload),
                           "sessions": args.sessions, "success_rate": rate, "stderr": se,
                           "results": [dict(zip(QDC_HEADER, r)) for r in rows]})
    if args.sessions == 1:
        k = 0
        status = "delivered" if s.delivered[0] else ("aborted" if s.aborted[0] else "incomplete")
        msg = f"{status}: {s.bits_delivered[0]}/{len(payload)} bits"
        if s.aborted[k]:
            msg += f", detection at run {s.abort_run[k]}"
        if s.delivered[k]:
            msg += f", bob={bits_to_hex(s.bob_bits[k]) or rows[0][-1]}"
        print(msg, file=sys.stderr)
    else:
        print(f"delivered {int(s.delivered.sum())}/{args.sessions} "
              f"(rate {fmt(rate)} +/- {fmt(se)})", file=sys.stderr)
    return _csv_text(QDC_HEADER, rows)


def cmd_bb84(args) -> str:
    if args.qubits < 1:
        raise ValueError("--qubits must be positive")
    if not 0.0 < args.transmission <= 1.0:
        raise ValueError("--transmission must lie in (0, 1]")
    attack = ProjectiveInterceptResend() if args.attack == "projective" else NoAttack()
    st = run_bb84_baseline(args.qubits, attack, seed=args.seed, stream=0,
                           transmission_prob=args.transmission)
    rate, se = st.error_rate() if st.sifted else (math.nan, math.nan)
    if args.format == "json":
        expected = 0.25 if args.attack == "projective" else 0.0
        report = [compare("sifted_error_rate", expected, rate, se).to_dict()] if st.sifted else []
        return _json_text({"qubits": st.qubits, "received": st.received, "sifted": st.sifted,
                           "errors": st.errors, "classical_bits": st.classical_bits,
                           "efficiency": st.efficiency, "report": report})
    return _csv_text(BB84_HEADER, [(st.qubits, st.received, st.sifted, st.errors, fmt(rate),
                                    fmt(se), fmt(st.efficiency))])


COMMANDS = {"simulate": cmd_simulate, "curves": cmd_curves, "thresholds": cmd_thresholds,
            "efficiency": cmd_efficiency, "qdc-send": cmd_qdc_send, "bb84-baseline": cmd_bb84}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pp84: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"pp84: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.output:
        with open(args.output, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
