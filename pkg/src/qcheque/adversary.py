"""Adversary harness: strategies that try to beat the cheque scheme.

Each strategy runs `trials` independent protocol sessions, one freshly
seeded world per trial, so a (strategy, params, trials, seed) tuple pins
down every sample drawn.  Alongside the empirical success rate each run
reports an analytic prediction and its standard error, computed without
peeking at the sampled verdicts.  The acceptance tests hold the two
columns to four standard deviations of each other.

The strategies:

replay
    Deposit an honestly signed cheque, then submit the very same cheque
    again.  The ledger refuses the second deposit deterministically.
clone-double-spend
    Universally clone every cheque register, deposit the counterfeit
    first, then try the genuine original.  The prediction comes from an
    oracle session in which the averaged post-recovery clone states are
    extracted as density matrices, with no sampling.
tamper-amount
    Forward the genuine registers untouched but lie about the classical
    amount field.  Predicted from the overlap between the states the two
    amounts derive to.
forge-key-guess
    Fabricate a cheque from a genuine cheque's classical fields without
    knowing the shared key, guessing it uniformly instead.  The run also
    counts how often the guess happened to be exactly right.
local-tamper
    Flip every amount qubit with an X gate while the cheque is in
    transit, leaving all classical fields honest.

A note on the cloner: both output qubits of `clone_qubit` reduce to
(2/3) rho + (1/6) I for input rho, the optimal input-independent copy.
It is realised as a five-rotation, six-CNOT circuit on the input plus
two work qubits, so it runs through the ordinary two-qubit gate API.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .bits import BitString
from .protocol import (
    Bank,
    QuantumCheque,
    SchemeParams,
    encode_amount,
    sign_cheque,
)
from .qowf import (
    amount_state_amplitudes,
    auth_state_amplitudes,
    prepare_amount_state,
    prepare_auth_state,
)
from .sim import HADAMARD, PAULI_X, Owner, QubitHandle, World
from .stats import binomial_sigma, sigma_of_mean, wilson_interval

__all__ = [
    "ACCOUNT_ID",
    "STRATEGIES",
    "CloneResult",
    "AttackStats",
    "clone_qubit",
    "local_tamper",
    "run_honest",
    "run_attack",
]

ACCOUNT_ID = "alice"

# Trial worlds are seeded [seed, trial]; the analytic oracle world gets a
# lane no trial index can reach.
_ORACLE_LANE = 2**32

STRATEGIES = (
    "replay",
    "clone-double-spend",
    "tamper-amount",
    "forge-key-guess",
    "local-tamper",
)

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


_PREP_FIRST = _ry(math.acos(1.0 / math.sqrt(5.0)))
_PREP_MACHINE = _ry(math.acos(math.sqrt(5.0) / 3.0))
_PREP_SECOND = _ry(math.acos(2.0 / math.sqrt(5.0)))


@dataclass(frozen=True)
class CloneResult:
    """The three qubits a cloning run leaves behind.

    `original` and `copy` are interchangeable clones; `machine` is the
    work qubit that stays entangled with both and should be accounted
    for (or discarded) by the caller.
    """

    original: QubitHandle
    copy: QubitHandle
    machine: QubitHandle


def clone_qubit(world: World, q: QubitHandle) -> CloneResult:
    """Run the optimal universal cloner on a qubit the adversary holds."""
    if q.owner is Owner.BANK:
        raise ValueError("vault qubits are in bank custody, not the adversary's")
    copy = world.allocate(Owner.ADVERSARY)
    machine = world.allocate(Owner.ADVERSARY)
    world.apply_gate(_PREP_FIRST, [copy])
    world.apply_gate(_CNOT, [copy, machine])
    world.apply_gate(_PREP_MACHINE, [machine])
    world.apply_gate(_CNOT, [machine, copy])
    world.apply_gate(_PREP_SECOND, [copy])
    world.apply_gate(_CNOT, [q, copy])
    world.apply_gate(_CNOT, [q, machine])
    world.apply_gate(_CNOT, [copy, q])
    world.apply_gate(_CNOT, [machine, q])
    return CloneResult(original=q, copy=copy, machine=machine)


def local_tamper(world: World, cheque: QuantumCheque, gate=PAULI_X, indices=None) -> None:
    """Apply a single-qubit gate to chosen amount registers of a cheque.

    `indices` are 1-based register positions; by default every amount
    register is hit.  Authentication qubits are never touched.
    """
    count = len(cheque.amount_qubits)
    chosen = range(1, count + 1) if indices is None else indices
    for i in chosen:
        if not 1 <= i <= count:
            raise ValueError(f"cheque has no amount register {i}")
        world.apply_gate(gate, [cheque.amount_qubits[i - 1]])


@dataclass(frozen=True)
class AttackStats:
    """Outcome summary of one experiment run."""

    strategy: str
    trials: int
    successes: int
    failure_histogram: dict
    empirical_rate: float
    wilson_low: float
    wilson_high: float
    analytic_rate: float
    analytic_sigma: float
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "trials": self.trials,
            "successes": self.successes,
            "failure_histogram": dict(sorted(self.failure_histogram.items())),
            "empirical_rate": self.empirical_rate,
            "wilson_95": [self.wilson_low, self.wilson_high],
            "analytic_rate": self.analytic_rate,
            "analytic_sigma": self.analytic_sigma,
            "extras": self.extras,
        }


def _finish(strategy, trials, successes, failures, analytic_rate, analytic_sigma, extras):
    low, high = wilson_interval(successes, trials)
    return AttackStats(
        strategy=strategy,
        trials=trials,
        successes=successes,
        failure_histogram=dict(failures),
        empirical_rate=successes / trials,
        wilson_low=low,
        wilson_high=high,
        analytic_rate=analytic_rate,
        analytic_sigma=analytic_sigma,
        extras=extras,
    )


def _acceptance_probability(policy, amount_pass_probs, auth_pass_prob):
    """Chance the policy accepts, given independent per-test pass rates.

    Strict mode needs every test to pass.  Threshold mode needs the
    passing fraction of amount tests to reach kappa2, which is the tail
    of a Poisson binomial, folded here by direct convolution.
    """
    if policy.mode == "strict":
        joint = 1.0
        for p in amount_pass_probs:
            joint *= p
        return joint * auth_pass_prob
    dist = [1.0]
    for p in amount_pass_probs:
        grown = [0.0] * (len(dist) + 1)
        for k, w in enumerate(dist):
            grown[k] += w * (1.0 - p)
            grown[k + 1] += w * p
        dist = grown
    count = len(amount_pass_probs)
    need = math.ceil(policy.kappa2 * count - 1e-12)
    return sum(dist[need:]) * auth_pass_prob


def _fresh_session(seed, trial, params, amount_units):
    world = World(seed=[seed, trial])
    bank = Bank()
    book, record = bank.gen_account(world, ACCOUNT_ID, params)
    cheque = sign_cheque(world, book, encode_amount(amount_units))
    return world, bank, record, cheque


def run_honest(params: SchemeParams, trials: int, seed: int, amount_units: int = 42) -> AttackStats:
    """Completeness baseline: sign honestly, deposit once, count accepts."""
    if trials < 1:
        raise ValueError("trials must be positive")
    successes, failures, ledger_spent = 0, Counter(), 0
    for t in range(trials):
        world, bank, _, cheque = _fresh_session(seed, t, params, amount_units)
        result = bank.verify_cheque(world, cheque)
        if result.accepted:
            successes += 1
        else:
            failures[result.reason.value] += 1
        ledger_spent += bank.spent_ledger_check(cheque.serial)
    return _finish(
        "honest", trials, successes, failures, 1.0, 0.0,
        {"amount_units": amount_units, "ledger_spent_count": ledger_spent},
    )


def run_attack(
    strategy: str,
    params: SchemeParams,
    trials: int,
    seed: int,
    amount_units: int = 42,
    tampered_units: int = 43,
) -> AttackStats:
    """Run one adversary strategy for `trials` independent sessions."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if strategy == "replay":
        return _run_replay(params, trials, seed, amount_units)
    if strategy == "clone-double-spend":
        return _run_clone(params, trials, seed, amount_units)
    if strategy == "tamper-amount":
        return _run_tamper_amount(params, trials, seed, amount_units, tampered_units)
    if strategy == "forge-key-guess":
        return _run_forge(params, trials, seed, amount_units, tampered_units)
    if strategy == "local-tamper":
        return _run_local_tamper(params, trials, seed, amount_units)
    raise ValueError(f"unknown strategy {strategy!r}; pick from: {', '.join(STRATEGIES)}")


# ----------------------------------------------------------------------
# replay
# ----------------------------------------------------------------------


def _run_replay(params, trials, seed, amount_units):
    successes, failures, first_accepts = 0, Counter(), 0
    for t in range(trials):
        world, bank, _, cheque = _fresh_session(seed, t, params, amount_units)
        first = bank.verify_cheque(world, cheque)
        first_accepts += first.accepted
        second = bank.verify_cheque(world, cheque)
        if second.accepted:
            successes += 1
        else:
            failures[second.reason.value] += 1
    return _finish(
        "replay", trials, successes, failures, 0.0, 0.0,
        {"amount_units": amount_units, "first_deposit_accepts": first_accepts},
    )


# ----------------------------------------------------------------------
# clone and double spend
# ----------------------------------------------------------------------


def _clone_pass_probabilities(params, seed, amount_units):
    """Exact per-register pass probabilities for a fully cloned cheque.

    One oracle session clones every register and then applies the
    recovery step in deferred form: Hadamard on the vault qubit, a
    controlled-Z onto the clone, and a partial trace instead of a
    measurement.  The reduced density matrix that falls out is the
    outcome-averaged recovered state, so the swap-test pass chance
    (1 + <target|rho|target>) / 2 needs no sampling at all.
    """
    world = World(seed=[seed, _ORACLE_LANE])
    bank = Bank()
    book, record = bank.gen_account(world, ACCOUNT_ID, params)
    cheque = sign_cheque(world, book, encode_amount(amount_units))

    amount_probs = []
    for i, q in enumerate(cheque.amount_qubits, start=1):
        clone = clone_qubit(world, q).copy
        vault = record.bank_qubits[i - 1]
        world.apply_gate(HADAMARD, [vault])
        world.apply_gate(_CZ, [vault, clone])
        rho = world.reduced_density([clone])
        target = np.array(amount_state_amplitudes(cheque.nonce, cheque.amount, i))
        amount_probs.append(0.5 * (1.0 + float(np.real(np.vdot(target, rho @ target)))))

    id_bits = BitString.from_text(ACCOUNT_ID)
    pairs = auth_state_amplitudes(
        record.shared_key, id_bits, cheque.nonce, cheque.amount, params.auth_qubits
    )
    fidelity = 1.0
    for q, pair in zip(cheque.auth_qubits, pairs):
        clone = clone_qubit(world, q).copy
        rho = world.reduced_density([clone])
        target = np.array(pair)
        fidelity *= float(np.real(np.vdot(target, rho @ target)))
    auth_prob = 0.5 * (1.0 + fidelity)
    return amount_probs, auth_prob


def _run_clone(params, trials, seed, amount_units):
    ceiling = World(seed=0).max_group_qubits
    joint = 4 * params.auth_qubits + 1
    if joint > ceiling:
        raise ValueError(
            f"the swap test over a cloned authentication register entangles "
            f"{joint} qubits (4 per register qubit plus the ancilla), above "
            f"the {ceiling}-qubit group ceiling; use auth_qubits <= "
            f"{(ceiling - 1) // 4}"
        )
    amount_probs, auth_prob = _clone_pass_probabilities(params, seed, amount_units)
    analytic = _acceptance_probability(params.policy, amount_probs, auth_prob)

    successes, failures, original_second_accepts = 0, Counter(), 0
    for t in range(trials):
        world, bank, _, cheque = _fresh_session(seed, t, params, amount_units)
        forged = replace(
            cheque,
            amount_qubits=tuple(clone_qubit(world, q).copy for q in cheque.amount_qubits),
            auth_qubits=tuple(clone_qubit(world, q).copy for q in cheque.auth_qubits),
        )
        first = bank.verify_cheque(world, forged)
        if first.accepted:
            successes += 1
        else:
            failures[first.reason.value] += 1
        second = bank.verify_cheque(world, cheque)
        original_second_accepts += second.accepted
    return _finish(
        "clone-double-spend", trials, successes, failures,
        analytic, binomial_sigma(analytic, trials),
        {
            "amount_units": amount_units,
            "original_second_accepts": original_second_accepts,
            "per_register_amount_pass": amount_probs,
            "auth_register_pass": auth_prob,
        },
    )


# ----------------------------------------------------------------------
# classical amount tampering
# ----------------------------------------------------------------------


def _run_tamper_amount(params, trials, seed, amount_units, tampered_units):
    if tampered_units == amount_units:
        raise ValueError("tampered amount must differ from the signed amount")
    true_bits = encode_amount(amount_units)
    lie_bits = encode_amount(tampered_units)
    id_bits = BitString.from_text(ACCOUNT_ID)

    successes, failures = 0, Counter()
    per_trial = []
    for t in range(trials):
        world, bank, record, cheque = _fresh_session(seed, t, params, amount_units)
        forged = replace(cheque, amount=lie_bits)
        result = bank.verify_cheque(world, forged)
        if result.accepted:
            successes += 1
        else:
            failures[result.reason.value] += 1

        amount_probs = []
        for i in range(1, params.ghz_triples + 1):
            held = np.array(amount_state_amplitudes(cheque.nonce, true_bits, i))
            want = np.array(amount_state_amplitudes(cheque.nonce, lie_bits, i))
            d = abs(np.vdot(want, held))
            amount_probs.append(0.5 * (1.0 + d * d))
        held_auth = auth_state_amplitudes(
            record.shared_key, id_bits, cheque.nonce, true_bits, params.auth_qubits
        )
        want_auth = auth_state_amplitudes(
            record.shared_key, id_bits, cheque.nonce, lie_bits, params.auth_qubits
        )
        d = 1.0
        for held, want in zip(held_auth, want_auth):
            d *= abs(np.vdot(np.array(want), np.array(held)))
        per_trial.append(
            _acceptance_probability(params.policy, amount_probs, 0.5 * (1.0 + d * d))
        )
    return _finish(
        "tamper-amount", trials, successes, failures,
        float(np.mean(per_trial)), sigma_of_mean(per_trial),
        {"amount_units": amount_units, "tampered_units": tampered_units},
    )


# ----------------------------------------------------------------------
# forgery with a guessed key
# ----------------------------------------------------------------------


def _run_forge(params, trials, seed, amount_units, tampered_units):
    lie_bits = encode_amount(tampered_units)
    id_bits = BitString.from_text(ACCOUNT_ID)

    successes, failures, key_hits = 0, Counter(), 0
    per_trial = []
    for t in range(trials):
        world, bank, record, cheque = _fresh_session(seed, t, params, amount_units)
        # the malicious payee keeps the classical fields, junks the qubits
        for q in list(cheque.amount_qubits) + list(cheque.auth_qubits):
            world.discard(q)
        guess = BitString.random(world.rng, params.key_bits)
        nonce = BitString.random(world.rng, params.key_bits)
        forged = replace(
            cheque,
            nonce=nonce,
            amount=lie_bits,
            amount_qubits=tuple(
                prepare_amount_state(world, nonce, lie_bits, i, owner=Owner.ADVERSARY)
                for i in range(1, params.ghz_triples + 1)
            ),
            auth_qubits=tuple(
                prepare_auth_state(
                    world, guess, id_bits, nonce, lie_bits,
                    params.auth_qubits, owner=Owner.ADVERSARY,
                )
            ),
        )
        result = bank.verify_cheque(world, forged)
        if result.accepted:
            successes += 1
        else:
            failures[result.reason.value] += 1
        key_hits += guess == record.shared_key

        # Recovery applies I or Z to the fabricated state with chance 1/2
        # each, so a register passes with 1/2 + (1 + |<g|Z|g>|^2) / 4.
        amount_probs = []
        for i in range(1, params.ghz_triples + 1):
            a0, a1 = amount_state_amplitudes(nonce, lie_bits, i)
            dz = abs(abs(a0) ** 2 - abs(a1) ** 2)
            amount_probs.append(0.5 + 0.25 * (1.0 + dz * dz))
        true_auth = auth_state_amplitudes(
            record.shared_key, id_bits, nonce, lie_bits, params.auth_qubits
        )
        fake_auth = auth_state_amplitudes(guess, id_bits, nonce, lie_bits, params.auth_qubits)
        d = 1.0
        for held, want in zip(fake_auth, true_auth):
            d *= abs(np.vdot(np.array(want), np.array(held)))
        per_trial.append(
            _acceptance_probability(params.policy, amount_probs, 0.5 * (1.0 + d * d))
        )
    return _finish(
        "forge-key-guess", trials, successes, failures,
        float(np.mean(per_trial)), sigma_of_mean(per_trial),
        {
            "amount_units": amount_units,
            "tampered_units": tampered_units,
            "key_guess_hits": key_hits,
            "key_bits": params.key_bits,
        },
    )


# ----------------------------------------------------------------------
# unitary tampering in transit
# ----------------------------------------------------------------------


def _run_local_tamper(params, trials, seed, amount_units):
    true_bits = encode_amount(amount_units)
    successes, failures = 0, Counter()
    per_trial = []
    for t in range(trials):
        world, bank, _, cheque = _fresh_session(seed, t, params, amount_units)
        local_tamper(world, cheque, PAULI_X)
        result = bank.verify_cheque(world, cheque)
        if result.accepted:
            successes += 1
        else:
            failures[result.reason.value] += 1

        # an X slipped in before recovery comes out as exactly X|g>, so
        # the test passes with (1 + |<g|X|g>|^2) / 2
        amount_probs = []
        for i in range(1, params.ghz_triples + 1):
            a0, a1 = amount_state_amplitudes(cheque.nonce, true_bits, i)
            dx = abs(np.conj(a0) * a1 + np.conj(a1) * a0)
            amount_probs.append(0.5 * (1.0 + dx * dx))
        per_trial.append(_acceptance_probability(params.policy, amount_probs, 1.0))
    return _finish(
        "local-tamper", trials, successes, failures,
        float(np.mean(per_trial)), sigma_of_mean(per_trial),
        {"amount_units": amount_units},
    )
