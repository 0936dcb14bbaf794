"""Cloning machinery and the attack harness.

The statistical checks here run a few hundred trials each so the whole
file stays fast; the acceptance suite re-runs the same strategies at
full trial counts.
"""

import numpy as np
import pytest

from qcheque.adversary import (
    STRATEGIES,
    clone_qubit,
    local_tamper,
    run_attack,
    run_honest,
)
from qcheque.protocol import Bank, SchemeParams, encode_amount, sign_cheque
from qcheque.sim import Owner, World, haar_random_qubit
from qcheque.stats import within_sigma

SMALL = SchemeParams(ghz_triples=2, auth_qubits=2, key_bits=64, serial_bits=64)


# ---------------------------------------------------------------- cloner


def test_clone_shrinks_by_two_thirds():
    # both clones must carry 2/3 |psi><psi| + 1/6 I, whatever the input
    world = World(seed=5)
    rng = np.random.default_rng(40)
    identity = np.eye(2) / 2.0
    for _ in range(20):
        amps = haar_random_qubit(rng)
        q = world.allocate(Owner.ADVERSARY, amps)
        result = clone_qubit(world, q)
        pure = np.outer(amps, amps.conj())
        want = 2.0 / 3.0 * pure + 1.0 / 3.0 * identity
        for clone in (result.original, result.copy):
            got = world.reduced_density([clone])
            assert np.max(np.abs(got - want)) < 1e-9
        for q in (result.original, result.copy, result.machine):
            world.discard(q)


def test_clone_machine_stays_entangled():
    world = World(seed=6)
    q = world.allocate(Owner.ADVERSARY, [0.6, 0.8])
    result = clone_qubit(world, q)
    rho = world.reduced_density([result.machine])
    purity = np.trace(rho @ rho).real
    assert purity < 1.0 - 1e-6


def test_clone_refuses_vault_qubits():
    world = World(seed=7)
    q = world.allocate(Owner.BANK)
    with pytest.raises(ValueError):
        clone_qubit(world, q)


# ---------------------------------------------------------------- tamper op


def test_local_tamper_flips_chosen_registers():
    # each amount qubit is still entangled with its vault partner, so
    # compare the joint pair states; X on the cheque side is X (x) I
    world = World(seed=8)
    bank = Bank()
    book, record = bank.gen_account(world, "alice", SMALL)
    cheque = sign_cheque(world, book, encode_amount(5))
    pairs = list(zip(cheque.amount_qubits, record.bank_qubits))
    before = [world.state_of(list(pair)) for pair in pairs]
    local_tamper(world, cheque, indices=[2])
    after = [world.state_of(list(pair)) for pair in pairs]
    x_on_first = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    assert np.allclose(after[0], before[0])
    assert np.allclose(after[1], x_on_first @ before[1])


def test_local_tamper_validates_indices():
    world = World(seed=9)
    bank = Bank()
    book, _ = bank.gen_account(world, "alice", SMALL)
    cheque = sign_cheque(world, book, encode_amount(5))
    with pytest.raises(ValueError):
        local_tamper(world, cheque, indices=[0])
    with pytest.raises(ValueError):
        local_tamper(world, cheque, indices=[3])


# ---------------------------------------------------------------- harness


def test_unknown_strategy_raises():
    with pytest.raises(ValueError):
        run_attack("side-channel", SMALL, trials=1, seed=0)
    with pytest.raises(ValueError):
        run_attack("replay", SMALL, trials=0, seed=0)


def test_honest_runs_always_accept():
    stats = run_honest(SMALL, trials=50, seed=100)
    assert stats.successes == 50
    assert stats.empirical_rate == 1.0
    assert stats.analytic_rate == 1.0
    assert stats.extras["ledger_spent_count"] == 50


def test_replay_never_succeeds():
    stats = run_attack("replay", SMALL, trials=50, seed=101)
    assert stats.successes == 0
    assert stats.extras["first_deposit_accepts"] == 50
    assert stats.failure_histogram == {"double-spend": 50}
    assert stats.analytic_rate == 0.0


def test_clone_double_spend_matches_analytics():
    stats = run_attack("clone-double-spend", SMALL, trials=400, seed=102)
    assert within_sigma(stats.empirical_rate, stats.analytic_rate, stats.analytic_sigma)
    assert stats.extras["original_second_accepts"] == 0
    assert 0.0 < stats.extras["auth_register_pass"] < 1.0
    assert len(stats.extras["per_register_amount_pass"]) == SMALL.ghz_triples
    for p in stats.extras["per_register_amount_pass"]:
        assert abs(p - 11.0 / 12.0) < 1e-9


def test_clone_respects_group_ceiling():
    big = SchemeParams(ghz_triples=2, auth_qubits=6, key_bits=64, serial_bits=64)
    with pytest.raises(ValueError):
        run_attack("clone-double-spend", big, trials=1, seed=0)


def test_tamper_amount_matches_analytics():
    stats = run_attack("tamper-amount", SMALL, trials=400, seed=103,
                       amount_units=42, tampered_units=43)
    assert within_sigma(stats.empirical_rate, stats.analytic_rate, stats.analytic_sigma)
    assert 0.0 < stats.analytic_rate < 1.0


def test_forge_key_guess_reports_oracle_rate():
    params = SchemeParams(ghz_triples=2, auth_qubits=2, key_bits=8,
                          serial_bits=64, allow_insecure_key_bits=True)
    stats = run_attack("forge-key-guess", params, trials=400, seed=104)
    assert within_sigma(stats.empirical_rate, stats.analytic_rate, stats.analytic_sigma)
    assert stats.extras["key_bits"] == 8
    assert stats.extras["key_guess_hits"] >= 0


def test_local_tamper_attack_matches_analytics():
    stats = run_attack("local-tamper", SMALL, trials=400, seed=105)
    assert within_sigma(stats.empirical_rate, stats.analytic_rate, stats.analytic_sigma)
    assert stats.extras["amount_units"] == 42


def test_strategy_list_is_exhaustive():
    for strategy in STRATEGIES:
        kwargs = {}
        params = SMALL
        if strategy == "forge-key-guess":
            params = SchemeParams(ghz_triples=2, auth_qubits=2, key_bits=8,
                                  serial_bits=64, allow_insecure_key_bits=True)
        stats = run_attack(strategy, params, trials=3, seed=1, **kwargs)
        assert stats.trials == 3
        assert 0 <= stats.successes <= 3


def test_runs_are_deterministic():
    a = run_attack("tamper-amount", SMALL, trials=30, seed=200)
    b = run_attack("tamper-amount", SMALL, trials=30, seed=200)
    assert a.to_json() == b.to_json()
    c = run_attack("tamper-amount", SMALL, trials=30, seed=201)
    assert c.to_json() != a.to_json()
