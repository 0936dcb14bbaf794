"""Statevector simulator with lazily merged groups of entangled qubits.

A :class:`World` owns every qubit in a scenario.  Qubits that have never
interacted live in separate state groups, so a world of many independent
small registers stays cheap: cost scales with the largest entangled group,
not with the total qubit count.  Multi-qubit operations merge groups on
demand; measurements split factored qubits back out.

Conventions used throughout the package:

* Within a group, the first listed qubit is the most significant bit of
  the amplitude index (big-endian).
* Bell measurement labels are keyed to the parity of the measured pair:
  the PSI outcomes project onto (|00> +- |11>)/sqrt(2) and the PHI
  outcomes onto (|01> +- |10>)/sqrt(2).  The teleport corrections in
  :mod:`qcheque.teleport` depend on this labelling; do not swap it.
* One seeded PRNG per world drives every Born-rule sample, so a fixed
  seed and operation order reproduce runs bit for bit.
* States are compared up to global phase everywhere.

``reduced_density``, ``state_of`` and ``overlap`` are introspection tools
for tests and analysis.  Protocol decision paths must only interact with
the world through gates and measurements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Owner",
    "QubitHandle",
    "BellOutcome",
    "HadamardOutcome",
    "StateGroup",
    "World",
    "ID2",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HADAMARD",
    "BELL_STATES",
    "haar_random_qubit",
    "haar_random_unitary",
]

SNAPSHOT_FORMAT = "qcheque-world"
SNAPSHOT_VERSION = 1

_SQRT2 = np.sqrt(2.0)

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2


class Owner(str, Enum):
    """Custody tag recorded on each qubit at allocation time."""

    ALICE = "alice"
    BANK = "bank"
    PAYEE = "payee"
    ADVERSARY = "adversary"


@dataclass(frozen=True)
class QubitHandle:
    """Opaque reference to one live qubit; stable for the life of a world."""

    qid: int
    owner: Owner

    def __repr__(self) -> str:
        return f"q{self.qid}<{self.owner.value}>"


class BellOutcome(Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


class HadamardOutcome(Enum):
    PLUS = "+"
    MINUS = "-"


# Projectors for the four Bell outcomes, as 2x2 amplitude tensors over the
# measured pair.  Listed in the fixed order used for cumulative sampling.
BELL_STATES: dict[BellOutcome, np.ndarray] = {
    BellOutcome.PSI_PLUS: np.array([[1, 0], [0, 1]], dtype=complex) / _SQRT2,
    BellOutcome.PSI_MINUS: np.array([[1, 0], [0, -1]], dtype=complex) / _SQRT2,
    BellOutcome.PHI_PLUS: np.array([[0, 1], [1, 0]], dtype=complex) / _SQRT2,
    BellOutcome.PHI_MINUS: np.array([[0, 1], [-1, 0]], dtype=complex) / _SQRT2,
}

_NORM_TOL = 1e-9
_UNITARY_TOL = 1e-9


class StateGroup:
    """One connected component of the world: an ordered qubit list plus
    a dense amplitude vector of length 2**len(qubits)."""

    __slots__ = ("qubits", "amps")

    def __init__(self, qubits: list[QubitHandle], amps: np.ndarray):
        self.qubits = qubits
        self.amps = amps

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def position(self, handle: QubitHandle) -> int:
        return self.qubits.index(handle)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def _as_state_vector(amplitudes, dim: int) -> np.ndarray:
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if vec.shape != (dim,):
        raise ValueError(f"expected {dim} amplitudes, got {vec.shape}")
    if not np.all(np.isfinite(vec.view(np.float64))):
        raise ValueError("amplitudes must be finite")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(f"state vector norm {norm!r} is not 1")
    return vec / norm


def _check_unitary(matrix: np.ndarray) -> np.ndarray:
    gate = np.asarray(matrix, dtype=complex)
    if gate.ndim != 2 or gate.shape[0] != gate.shape[1]:
        raise ValueError("gate must be a square matrix")
    dev = np.max(np.abs(gate @ gate.conj().T - np.eye(gate.shape[0])))
    if dev > _UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
    return gate


class World:
    """A collection of qubits partitioned into independent state groups.

    Parameters
    ----------
    seed:
        Seed for the world's PRNG.  Runs with equal seeds and equal
        operation sequences produce identical outcomes.
    max_group_qubits:
        Hard ceiling on the size any single group may reach through
        merging.  Exceeding it raises instead of thrashing memory.
    """

    def __init__(self, seed=None, max_group_qubits: int = 24):
        if max_group_qubits < 1:
            raise ValueError("max_group_qubits must be positive")
        self.rng = np.random.default_rng(seed)
        self.max_group_qubits = max_group_qubits
        self._groups: list[StateGroup] = []
        self._index: dict[QubitHandle, StateGroup] = {}
        self._next_qid = 0

    # ------------------------------------------------------------------
    # allocation and lookup
    # ------------------------------------------------------------------

    def allocate(self, owner: Owner, amplitudes=(1.0, 0.0)) -> QubitHandle:
        """Add a fresh single qubit in the given pure state."""
        return self.allocate_group([owner], amplitudes)[0]

    def allocate_register(self, owner: Owner, amplitude_pairs) -> list[QubitHandle]:
        """Add independent qubits, one group each, from (amp0, amp1) pairs."""
        return [self.allocate(owner, pair) for pair in amplitude_pairs]

    def allocate_group(self, owners, amplitudes) -> list[QubitHandle]:
        """Add a fresh, possibly entangled group of len(owners) qubits."""
        owners = list(owners)
        n = len(owners)
        if n < 1:
            raise ValueError("need at least one owner")
        if n > self.max_group_qubits:
            raise ValueError(f"group of {n} qubits exceeds ceiling {self.max_group_qubits}")
        vec = _as_state_vector(amplitudes, 2**n)
        handles = []
        for owner in owners:
            handles.append(QubitHandle(self._next_qid, Owner(owner)))
            self._next_qid += 1
        group = StateGroup(list(handles), vec)
        self._groups.append(group)
        for h in handles:
            self._index[h] = group
        return handles

    def __contains__(self, handle: QubitHandle) -> bool:
        return handle in self._index

    def group_of(self, handle: QubitHandle) -> StateGroup:
        try:
            return self._index[handle]
        except KeyError:
            raise ValueError(f"unknown or retired qubit handle {handle!r}") from None

    @property
    def qubit_count(self) -> int:
        return len(self._index)

    def handles(self) -> list[QubitHandle]:
        """All live handles, in group order."""
        return [q for g in self._groups for q in g.qubits]

    # ------------------------------------------------------------------
    # unitary operations
    # ------------------------------------------------------------------

    def apply_gate(self, gate, targets) -> None:
        """Apply a 1- or 2-qubit unitary to the target handles.

        Targets in different groups cause a merge first; the merged group
        must stay under the world's size ceiling.
        """
        targets = list(targets)
        gate = _check_unitary(gate)
        k = len(targets)
        if gate.shape[0] != 2**k or k not in (1, 2):
            raise ValueError("gate dimension must be 2 or 4 and match the target count")
        if len(set(targets)) != k:
            raise ValueError("gate targets must be distinct")
        group = self._merged_group_for(targets)
        self._apply_unitary(group, gate, [group.position(t) for t in targets])

    def apply_cswap(self, control: QubitHandle, a: QubitHandle, b: QubitHandle) -> None:
        """Controlled swap of qubits a and b, conditioned on the control."""
        if len({control, a, b}) != 3:
            raise ValueError("cswap targets must be distinct")
        group = self._merged_group_for([control, a, b])
        fredkin = np.eye(8, dtype=complex)
        fredkin[[5, 6]] = fredkin[[6, 5]]
        positions = [group.position(q) for q in (control, a, b)]
        self._apply_unitary(group, fredkin, positions)

    def _merged_group_for(self, targets) -> StateGroup:
        for t in targets:
            self.group_of(t)
        groups: list[StateGroup] = []
        for t in targets:
            g = self._index[t]
            if g not in groups:
                groups.append(g)
        while len(groups) > 1:
            groups = [self._merge(groups[0], groups[1])] + groups[2:]
        return groups[0]

    def _merge(self, g1: StateGroup, g2: StateGroup) -> StateGroup:
        total = g1.n_qubits + g2.n_qubits
        if total > self.max_group_qubits:
            raise ValueError(
                f"merging would create a {total}-qubit group, "
                f"over the ceiling of {self.max_group_qubits}"
            )
        merged = StateGroup(g1.qubits + g2.qubits, np.kron(g1.amps, g2.amps))
        self._groups.remove(g1)
        self._groups.remove(g2)
        self._groups.append(merged)
        for q in merged.qubits:
            self._index[q] = merged
        return merged

    def _apply_unitary(self, group: StateGroup, gate: np.ndarray, positions: list[int]) -> None:
        n = group.n_qubits
        k = len(positions)
        psi = group.amps.reshape((2,) * n)
        gate_t = gate.reshape((2,) * (2 * k))
        psi = np.tensordot(gate_t, psi, axes=(list(range(k, 2 * k)), positions))
        psi = np.moveaxis(psi, list(range(k)), positions)
        group.amps = np.ascontiguousarray(psi).reshape(-1)

    # ------------------------------------------------------------------
    # measurement
    # ------------------------------------------------------------------

    def measure_computational(self, q: QubitHandle) -> int:
        """Projective Z-basis measurement.  The measured qubit factors out
        into its own singleton group holding |0> or |1>."""
        group = self.group_of(q)
        pos = group.position(q)
        psi = group.amps.reshape((2,) * group.n_qubits)
        slice0 = np.take(psi, 0, axis=pos)
        p0 = float(np.vdot(slice0, slice0).real)
        outcome = 0 if self.rng.random() < p0 else 1
        kept = slice0 if outcome == 0 else np.take(psi, 1, axis=pos)
        self._collapse_out(group, q, kept)
        basis = np.array([1.0, 0.0], dtype=complex) if outcome == 0 else np.array([0.0, 1.0], dtype=complex)
        self._adopt_singleton(q, basis)
        return outcome

    def measure_hadamard(self, q: QubitHandle) -> HadamardOutcome:
        """Projective X-basis measurement; the qubit is left in |+> or |->."""
        self.apply_gate(HADAMARD, [q])
        bit = self.measure_computational(q)
        self.apply_gate(HADAMARD, [q])
        return HadamardOutcome.PLUS if bit == 0 else HadamardOutcome.MINUS

    def measure_bell(self, q1: QubitHandle, q2: QubitHandle) -> BellOutcome:
        """Joint Bell-basis measurement of a qubit pair.

        Both measured qubits are retired from the world; only the label
        survives, and whatever else was entangled with the pair collapses
        onto the matching branch.
        """
        if q1 == q2:
            raise ValueError("bell measurement needs two distinct qubits")
        self.group_of(q1)
        self.group_of(q2)
        group = self._merged_group_for([q1, q2])
        n = group.n_qubits
        p1, p2 = group.position(q1), group.position(q2)
        psi = group.amps.reshape((2,) * n)

        residuals = {}
        probs = {}
        for label, bell in BELL_STATES.items():
            resid = np.tensordot(bell.conj(), psi, axes=([0, 1], [p1, p2]))
            residuals[label] = resid
            probs[label] = float(np.vdot(resid, resid).real)

        u = self.rng.random() * sum(probs.values())
        acc = 0.0
        outcome = BellOutcome.PHI_MINUS
        for label in BELL_STATES:
            acc += probs[label]
            if u < acc:
                outcome = label
                break

        resid = residuals[outcome]
        norm = np.sqrt(probs[outcome])
        remaining = [qq for qq in group.qubits if qq not in (q1, q2)]
        self._groups.remove(group)
        del self._index[q1]
        del self._index[q2]
        if remaining:
            new_group = StateGroup(remaining, (resid / norm).reshape(-1))
            self._groups.append(new_group)
            for qq in remaining:
                self._index[qq] = new_group
        return outcome

    def discard(self, q: QubitHandle) -> None:
        """Measure a qubit out and retire its handle.

        Used to destroy cheque registers after verification and to clean
        up scratch ancillas; unknown handles raise.
        """
        self.measure_computational(q)
        group = self._index.pop(q)
        self._groups.remove(group)

    def _collapse_out(self, group: StateGroup, q: QubitHandle, kept: np.ndarray) -> None:
        """Remove qubit q from its group, keeping the given sliced branch."""
        norm = np.linalg.norm(kept)
        if norm < 1e-12:
            raise RuntimeError("collapsed onto a zero branch; numerical state is corrupt")
        remaining = [qq for qq in group.qubits if qq != q]
        if remaining:
            group.qubits = remaining
            group.amps = np.ascontiguousarray(kept).reshape(-1) / norm
        else:
            self._groups.remove(group)
        del self._index[q]

    def _adopt_singleton(self, q: QubitHandle, amps: np.ndarray) -> None:
        group = StateGroup([q], amps)
        self._groups.append(group)
        self._index[q] = group

    # ------------------------------------------------------------------
    # introspection (tests and analysis only)
    # ------------------------------------------------------------------

    def reduced_density(self, subset) -> np.ndarray:
        """Density matrix of the listed qubits, axes in the given order."""
        subset = list(subset)
        if len(set(subset)) != len(subset):
            raise ValueError("subset handles must be distinct")
        if not subset:
            raise ValueError("subset must not be empty")
        psi, joined = self._joint_state(subset)
        m = len(joined)
        keep = [joined.index(q) for q in subset]
        traced = [i for i in range(m) if i not in keep]
        psi_t = psi.reshape((2,) * m)
        rho = np.tensordot(psi_t, psi_t.conj(), axes=(traced, traced))
        kept_order = [q for q in joined if q in subset]
        perm = [kept_order.index(q) for q in subset]
        k = len(subset)
        rho = rho.transpose(perm + [k + p for p in perm])
        return rho.reshape(2**k, 2**k)

    def state_of(self, register) -> np.ndarray:
        """Pure state of a register, axes in register order.

        The register must be unentangled with the rest of the world;
        otherwise this raises.  Global phase is canonicalised so equal
        registers compare equal.
        """
        register = list(register)
        if len(set(register)) != len(register):
            raise ValueError("register handles must be distinct")
        if not register:
            raise ValueError("register must not be empty")
        groups = self._groups_for(register)
        covered = [q for g in groups for q in g.qubits]
        if len(covered) == len(register):
            psi, joined = self._joint_state(register)
            m = len(joined)
            dest = [register.index(q) for q in joined]
            psi = np.moveaxis(psi.reshape((2,) * m), list(range(m)), dest)
            vec = np.ascontiguousarray(psi).reshape(-1)
        else:
            rho = self.reduced_density(register)
            purity = float(np.trace(rho @ rho).real)
            if purity < 1.0 - _NORM_TOL:
                raise ValueError(
                    f"register is entangled with other qubits (purity {purity:.6f})"
                )
            vals, vecs = np.linalg.eigh(rho)
            vec = vecs[:, int(np.argmax(vals))]
        pivot = int(np.argmax(np.abs(vec)))
        phase = vec[pivot] / abs(vec[pivot])
        return vec / phase

    def overlap(self, register_a, register_b) -> float:
        """Absolute inner product between two factorizable pure registers."""
        a = self.state_of(register_a)
        b = self.state_of(register_b)
        if a.shape != b.shape:
            raise ValueError("registers differ in size")
        return float(abs(np.vdot(a, b)))

    def _groups_for(self, handles) -> list[StateGroup]:
        groups: list[StateGroup] = []
        for q in handles:
            g = self.group_of(q)
            if g not in groups:
                groups.append(g)
        return groups

    def _joint_state(self, handles) -> tuple[np.ndarray, list[QubitHandle]]:
        groups = self._groups_for(handles)
        total = sum(g.n_qubits for g in groups)
        if total > self.max_group_qubits:
            raise ValueError(
                f"introspection across {total} qubits exceeds the ceiling "
                f"of {self.max_group_qubits}"
            )
        psi = groups[0].amps
        joined = list(groups[0].qubits)
        for g in groups[1:]:
            psi = np.kron(psi, g.amps)
            joined.extend(g.qubits)
        return psi, joined

    def check_partition(self) -> None:
        """Assert the group partition invariant; raises on violation."""
        seen: set[QubitHandle] = set()
        for g in self._groups:
            if len(g.amps) != 2**g.n_qubits:
                raise AssertionError("group amplitude length mismatch")
            if abs(g.norm() - 1.0) > 1e-6:
                raise AssertionError(f"group norm drifted to {g.norm()!r}")
            for q in g.qubits:
                if q in seen:
                    raise AssertionError(f"{q!r} appears in two groups")
                seen.add(q)
                if self._index.get(q) is not g:
                    raise AssertionError(f"index points {q!r} at the wrong group")
        if seen != set(self._index):
            raise AssertionError("index and group contents disagree")

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def copy(self) -> "World":
        """Independent deep copy, including the PRNG state."""
        twin = World(seed=0, max_group_qubits=self.max_group_qubits)
        twin.rng.bit_generator.state = self.rng.bit_generator.state
        twin._next_qid = self._next_qid
        for g in self._groups:
            new_group = StateGroup(list(g.qubits), g.amps.copy())
            twin._groups.append(new_group)
            for q in new_group.qubits:
                twin._index[q] = new_group
        return twin

    def to_json(self) -> dict:
        groups = []
        for g in self._groups:
            groups.append(
                {
                    "qubits": [[q.qid, q.owner.value] for q in g.qubits],
                    "amplitudes": [[float(a.real), float(a.imag)] for a in g.amps],
                }
            )
        return {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "max_group_qubits": self.max_group_qubits,
            "next_qid": self._next_qid,
            "rng": self.rng.bit_generator.state,
            "groups": groups,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "World":
        if not isinstance(doc, dict) or doc.get("format") != SNAPSHOT_FORMAT:
            raise ValueError("not a world snapshot document")
        if doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError(
                f"unsupported world snapshot version {doc.get('version')!r}, "
                f"expected {SNAPSHOT_VERSION}"
            )
        world = cls(seed=0, max_group_qubits=int(doc["max_group_qubits"]))
        state = doc["rng"]
        if state.get("bit_generator") != world.rng.bit_generator.state["bit_generator"]:
            raise ValueError("snapshot was produced with a different PRNG")
        world.rng.bit_generator.state = state
        world._next_qid = int(doc["next_qid"])
        for entry in doc["groups"]:
            handles = [QubitHandle(int(qid), Owner(owner)) for qid, owner in entry["qubits"]]
            amps = np.array([complex(re, im) for re, im in entry["amplitudes"]])
            if len(amps) != 2 ** len(handles):
                raise ValueError("snapshot group has a malformed amplitude list")
            group = StateGroup(handles, amps)
            world._groups.append(group)
            for q in handles:
                if q in world._index:
                    raise ValueError(f"snapshot lists {q!r} twice")
                world._index[q] = group
        return world

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=1, allow_nan=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "World":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# ----------------------------------------------------------------------
# random state helpers
# ----------------------------------------------------------------------


def haar_random_qubit(rng: np.random.Generator) -> np.ndarray:
    """A single-qubit pure state drawn uniformly from the sphere."""
    vec = rng.normal(size=2) + 1j * rng.normal(size=2)
    return vec / np.linalg.norm(vec)


def haar_random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
