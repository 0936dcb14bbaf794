"""Command-line scenario runner.

Subcommands: run-honest, attack, snapshot, restore, selftest.  Every run
prints exactly one JSON document to stdout with sorted keys, so a fixed
seed and config reproduce the output byte for byte.  Wall-clock timing
goes to stderr, never into the document.

Exit codes: 0 on success, 1 when a scenario's empirical rate disagrees
with its analytic prediction by more than four standard deviations (or a
selftest check fails), 2 for usage errors, 3 for file and parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .adversary import (
    ACCOUNT_ID,
    STRATEGIES,
    AttackStats,
    clone_qubit,
    run_attack,
    run_honest,
)
from .protocol import (
    AcceptancePolicy,
    Bank,
    QuantumCheque,
    SchemeParams,
    encode_amount,
    sign_cheque,
)
from .qowf import prepare_amount_state
from .sim import Owner, World, haar_random_qubit
from .stats import within_sigma
from .swaptest import swap_test
from .teleport import encode_qubit, prepare_ghz, recover_qubit

__all__ = ["main", "build_parser"]

REPORT_FORMAT = "qcheque-report"
REPORT_VERSION = 1
SCENARIO_FORMAT = "qcheque-scenario"
SCENARIO_VERSION = 1

SNAPSHOT_AMOUNT_UNITS = 42


class CliFileError(Exception):
    """A file could not be read, parsed or validated; maps to exit 3."""


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _build_params(args) -> SchemeParams:
    policy = AcceptancePolicy(mode=args.policy, kappa1=args.kappa1, kappa2=args.kappa2)
    return SchemeParams(
        ghz_triples=args.l,
        auth_qubits=args.n,
        key_bits=args.key_bits,
        serial_bits=args.serial_bits,
        policy=policy,
        allow_insecure_key_bits=args.key_bits < 64,
    )


def _config_doc(args, params: SchemeParams, strategy: str | None) -> dict:
    return {
        "params": params.to_json(),
        "trials": args.trials,
        "seed": args.seed,
        "strategy": strategy,
    }


def _report(command: str, config_doc: dict, stats: AttackStats) -> tuple[dict, int]:
    agrees = within_sigma(
        stats.empirical_rate, stats.analytic_rate, stats.analytic_sigma, z=4.0
    )
    doc = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "library_version": __version__,
        "command": command,
        "config": config_doc,
        "stats": stats.to_json(),
        "within_4_sigma": agrees,
        "status": "PASS" if agrees else "FAIL",
    }
    return doc, 0 if agrees else 1


def cmd_run_honest(args) -> int:
    params = _build_params(args)
    stats = run_honest(params, args.trials, args.seed)
    doc, code = _report("run-honest", _config_doc(args, params, None), stats)
    _emit(_dump(doc), args.out)
    return code


def cmd_attack(args) -> int:
    params = _build_params(args)
    stats = run_attack(args.strategy, params, args.trials, args.seed)
    doc, code = _report("attack", _config_doc(args, params, args.strategy), stats)
    _emit(_dump(doc), args.out)
    return code


def _scenario_doc(args, params: SchemeParams) -> dict:
    world = World(seed=args.seed)
    bank = Bank()
    book, _ = bank.gen_account(world, ACCOUNT_ID, params)
    cheque = sign_cheque(world, book, encode_amount(SNAPSHOT_AMOUNT_UNITS))
    return {
        "format": SCENARIO_FORMAT,
        "version": SCENARIO_VERSION,
        "config": {"params": params.to_json(), "seed": args.seed},
        "world": world.to_json(),
        "bank": bank.to_json(),
        "cheque": cheque.to_json(),
    }


def cmd_snapshot(args) -> int:
    params = _build_params(args)
    doc = _scenario_doc(args, params)
    with open(args.snapshot, "w", encoding="utf-8") as fh:
        fh.write(_dump(doc))
    world_doc = doc["world"]
    summary = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "library_version": __version__,
        "command": "snapshot",
        "config": doc["config"],
        "snapshot_path": args.snapshot,
        "qubits": sum(len(g["qubits"]) for g in world_doc["groups"]),
        "accounts": len(doc["bank"]["records"]),
        "status": "PASS",
    }
    _emit(_dump(summary), args.out)
    return 0


def _load_scenario(path: str) -> tuple[dict, World, Bank, QuantumCheque]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliFileError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliFileError(
            f"{path}: parse error at byte offset {exc.pos}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or doc.get("format") != SCENARIO_FORMAT:
        raise CliFileError(f"{path}: not a scenario snapshot")
    if doc.get("version") != SCENARIO_VERSION:
        raise CliFileError(
            f"{path}: unsupported scenario version {doc.get('version')!r}, "
            f"expected {SCENARIO_VERSION}"
        )
    try:
        world = World.from_json(doc["world"])
        bank = Bank.from_json(doc["bank"])
        cheque = QuantumCheque.from_json(doc["cheque"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CliFileError(f"{path}: invalid snapshot contents: {exc}") from exc
    world.check_partition()
    return doc, world, bank, cheque


def cmd_restore(args) -> int:
    doc, world, bank, cheque = _load_scenario(args.snapshot)
    if args.out:
        rebuilt = {
            "format": SCENARIO_FORMAT,
            "version": SCENARIO_VERSION,
            "config": doc["config"],
            "world": world.to_json(),
            "bank": bank.to_json(),
            "cheque": cheque.to_json(),
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(_dump(rebuilt))
    summary = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "library_version": __version__,
        "command": "restore",
        "snapshot_path": args.snapshot,
        "accounts": len(bank.to_json()["records"]),
        "live_qubits": world.qubit_count,
        "transcript_messages": len(bank.transcript),
        "cheque_serial": str(cheque.serial),
        "status": "PASS",
    }
    sys.stdout.write(_dump(summary))
    return 0


# ----------------------------------------------------------------------
# selftest
# ----------------------------------------------------------------------


def _check_teleport_roundtrip() -> None:
    world = World(seed=101)
    triple = prepare_ghz(world, 1)
    amount = encode_amount(7)
    nonce = amount  # any bits will do for a smoke check
    payload = prepare_amount_state(world, nonce, amount, 1)
    encode_qubit(world, payload, triple)
    recover_qubit(world, triple.bank_qubit, triple.cheque_qubit)
    world.discard(triple.bank_qubit)
    target = prepare_amount_state(world, nonce, amount, 1)
    outcome = swap_test(world, [triple.cheque_qubit], [target])
    if not outcome.passed:
        raise AssertionError("recovered state failed its swap test")
    world.discard(triple.cheque_qubit)
    world.discard(target)
    world.check_partition()


def _check_cloner_shrink() -> None:
    world = World(seed=103)
    amps = haar_random_qubit(world.rng)
    q = world.allocate(Owner.ALICE, amps)
    result = clone_qubit(world, q)
    want = (2.0 / 3.0) * np.outer(amps, amps.conj()) + (1.0 / 6.0) * np.eye(2)
    for handle in (result.original, result.copy):
        got = world.reduced_density([handle])
        if float(np.max(np.abs(got - want))) > 1e-9:
            raise AssertionError("clone is not the optimal shrunk state")


def _check_honest_small(seed: int) -> None:
    params = SchemeParams(ghz_triples=2, auth_qubits=2)
    stats = run_honest(params, trials=40, seed=seed)
    if stats.empirical_rate != 1.0:
        raise AssertionError(f"honest acceptance {stats.empirical_rate}, wanted 1.0")


def _check_replay_rejected(seed: int) -> None:
    params = SchemeParams(ghz_triples=2, auth_qubits=2)
    stats = run_attack("replay", params, trials=20, seed=seed)
    if stats.successes != 0:
        raise AssertionError(f"{stats.successes} replays slipped past the ledger")


def _check_snapshot_stable(seed: int) -> None:
    world = World(seed=seed)
    bank = Bank()
    book, _ = bank.gen_account(world, ACCOUNT_ID, SchemeParams(ghz_triples=2, auth_qubits=2))
    sign_cheque(world, book, encode_amount(5))
    once = _dump(world.to_json())
    twice = _dump(World.from_json(json.loads(once)).to_json())
    if once != twice:
        raise AssertionError("world snapshot does not round-trip byte-identically")
    bank_once = _dump(bank.to_json())
    bank_twice = _dump(Bank.from_json(json.loads(bank_once)).to_json())
    if bank_once != bank_twice:
        raise AssertionError("bank snapshot does not round-trip byte-identically")


def cmd_selftest(args) -> int:
    checks = [
        ("teleport-roundtrip", _check_teleport_roundtrip),
        ("cloner-shrink", _check_cloner_shrink),
        ("honest-small", lambda: _check_honest_small(args.seed)),
        ("replay-rejected", lambda: _check_replay_rejected(args.seed)),
        ("snapshot-roundtrip", lambda: _check_snapshot_stable(args.seed)),
    ]
    results = []
    for name, check in checks:
        try:
            check()
            results.append({"name": name, "passed": True})
        except AssertionError as exc:
            results.append({"name": name, "passed": False, "detail": str(exc)})
    all_passed = all(r["passed"] for r in results)
    doc = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "library_version": __version__,
        "command": "selftest",
        "config": {"seed": args.seed},
        "checks": results,
        "status": "PASS" if all_passed else "FAIL",
    }
    _emit(_dump(doc), args.out)
    return 0 if all_passed else 1


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcheque",
        description="Simulate and stress-test an entanglement-backed cheque scheme.",
    )
    parser.add_argument("--version", action="version", version=f"qcheque {__version__}")

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--l", type=int, default=8, metavar="N",
                        help="entangled triples (and amount registers) per cheque")
    scheme.add_argument("--n", type=int, default=8, metavar="N",
                        help="authentication register width in qubits")
    scheme.add_argument("--key-bits", type=int, default=256, metavar="BITS",
                        help="shared key and nonce length; values under 64 are "
                             "permitted here for key-guessing experiments")
    scheme.add_argument("--serial-bits", type=int, default=128, metavar="BITS",
                        help="serial number length")
    scheme.add_argument("--policy", choices=("strict", "threshold"), default="strict",
                        help="how swap-test verdicts aggregate")
    scheme.add_argument("--kappa1", type=float, default=0.91, metavar="K",
                        help="authentication acceptance threshold")
    scheme.add_argument("--kappa2", type=float, default=0.91, metavar="K",
                        help="amount-register acceptance threshold")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--trials", type=int, default=1000, metavar="N",
                     help="independent protocol sessions to sample")
    run.add_argument("--seed", type=int, default=2026, metavar="SEED",
                     help="root seed; fixed seed means byte-identical output")
    run.add_argument("--out", default=None, metavar="PATH",
                     help="also write the report document here")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-honest", parents=[scheme, run],
                       help="sign and deposit honestly, report the acceptance rate")
    p.set_defaults(func=cmd_run_honest)

    p = sub.add_parser("attack", parents=[scheme, run],
                       help="run an adversary strategy and compare with analytics")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("snapshot", parents=[scheme],
                       help="persist a freshly signed scenario to a file")
    p.add_argument("--seed", type=int, default=2026, metavar="SEED")
    p.add_argument("--snapshot", required=True, metavar="PATH",
                   help="where to write the scenario document")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="also write the summary report here")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("restore", help="load a scenario file and validate it")
    p.add_argument("--snapshot", required=True, metavar="PATH",
                   help="scenario document to load")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="re-save the restored scenario here (byte-identical)")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("selftest", help="run quick internal consistency checks")
    p.add_argument("--seed", type=int, default=7, metavar="SEED")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="also write the report document here")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return args.func(args)
    except CliFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        elapsed = time.perf_counter() - started
        print(f"elapsed: {elapsed:.3f}s", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
