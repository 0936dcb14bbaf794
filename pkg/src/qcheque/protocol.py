"""Issuing, signing and verifying cheques backed by shared entanglement.

Account generation gives the issuer a cheque book: a shared classical
key, a serial number, a one-time signing key, and the issuer halves of
freshly shared GHZ triples whose third qubits stay in the bank's vault.

Signing draws a nonce, prepares the authentication register binding
(key, account id, nonce, amount), prepares one amount state per triple
and teleport-encodes it onto the (cheque, bank) pair, then signs the
serial number.  A cheque book signs exactly once.

Verification runs cheap classical checks first and touches quantum state
only when they pass, in this order: record lookup, ledger availability,
signature, structural shape, recovery of every amount state, swap tests
against independently recomputed targets, then the policy decision.
Whatever the outcome, the submitted registers are destroyed and the
serial is retired, so a rejected submission cannot be probed again under
the same serial.  The spent ledger only ever moves from unspent to spent.

Every bank interaction is appended to an ordered session transcript;
one recovery outcome message crosses the bank/branch boundary per triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .bits import BitString
from .qowf import prepare_amount_state, prepare_auth_state
from .signatures import LamportSignatureScheme, SignatureScheme
from .sim import Owner, QubitHandle, World
from .swaptest import swap_test
from .teleport import GhzTriple, encode_qubit, prepare_ghz, recover_qubit

__all__ = [
    "AcceptancePolicy",
    "SchemeParams",
    "ChequeBook",
    "BankRecord",
    "QuantumCheque",
    "RejectReason",
    "VerifyResult",
    "Message",
    "Bank",
    "sign_cheque",
    "destroy_cheque",
    "encode_amount",
]

BANK_SNAPSHOT_FORMAT = "qcheque-bank"
BANK_SNAPSHOT_VERSION = 1


class RejectReason(Enum):
    OK = "ok"
    UNKNOWN_ID_SERIAL = "unknown-id-serial"
    BAD_SIGNATURE = "bad-signature"
    DOUBLE_SPEND = "double-spend"
    AUTH_STATE_FAIL = "auth-state-fail"
    AMOUNT_STATE_FAIL = "amount-state-fail"


@dataclass(frozen=True)
class AcceptancePolicy:
    """How swap-test outcomes turn into an accept or reject.

    ``strict`` requires every test to pass.  ``threshold`` accepts when
    the passing fraction of amount-state tests is at least `kappa2` and
    the authentication test passes; `kappa1` is the gate on the single
    authentication test and is kept explicit so a multi-copy variant can
    fractionalise it the same way.
    """

    mode: str = "strict"
    kappa1: float = 0.91
    kappa2: float = 0.91

    def __post_init__(self) -> None:
        if self.mode not in ("strict", "threshold"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        for name, value in (("kappa1", self.kappa1), ("kappa2", self.kappa2)):
            if not 0.5 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0.5, 1], got {value!r}")

    def decide(self, passes: list[bool]) -> bool:
        """Verdict over a batch of same-kind swap tests."""
        if self.mode == "strict":
            return all(passes)
        if not passes:
            return True
        return sum(passes) / len(passes) >= self.kappa2

    def decide_auth(self, passed: bool) -> bool:
        return bool(passed)

    def to_json(self) -> dict:
        return {"mode": self.mode, "kappa1": self.kappa1, "kappa2": self.kappa2}

    @classmethod
    def from_json(cls, doc: dict) -> "AcceptancePolicy":
        return cls(mode=doc["mode"], kappa1=float(doc["kappa1"]), kappa2=float(doc["kappa2"]))


@dataclass(frozen=True)
class SchemeParams:
    """The parameter bundle threaded through every protocol operation.

    ghz_triples:  entangled triples per cheque (and amount states to check).
    auth_qubits:  width of the authentication register.
    key_bits:     length of the shared key and of nonces.
    serial_bits:  length of serial numbers.
    """

    ghz_triples: int = 8
    auth_qubits: int = 8
    key_bits: int = 256
    serial_bits: int = 128
    policy: AcceptancePolicy = field(default_factory=AcceptancePolicy)
    allow_insecure_key_bits: bool = False

    def __post_init__(self) -> None:
        if self.ghz_triples < 1:
            raise ValueError("ghz_triples must be at least 1")
        if self.auth_qubits < 1:
            raise ValueError("auth_qubits must be at least 1")
        if self.key_bits < 64 and not self.allow_insecure_key_bits:
            raise ValueError("key_bits below 64 needs allow_insecure_key_bits=True")
        if self.key_bits < 1:
            raise ValueError("key_bits must be positive")
        if self.serial_bits < 64:
            raise ValueError("serial_bits must be at least 64")

    def to_json(self) -> dict:
        return {
            "ghz_triples": self.ghz_triples,
            "auth_qubits": self.auth_qubits,
            "key_bits": self.key_bits,
            "serial_bits": self.serial_bits,
            "policy": self.policy.to_json(),
            "allow_insecure_key_bits": self.allow_insecure_key_bits,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SchemeParams":
        return cls(
            ghz_triples=int(doc["ghz_triples"]),
            auth_qubits=int(doc["auth_qubits"]),
            key_bits=int(doc["key_bits"]),
            serial_bits=int(doc["serial_bits"]),
            policy=AcceptancePolicy.from_json(doc["policy"]),
            allow_insecure_key_bits=bool(doc["allow_insecure_key_bits"]),
        )


@dataclass
class ChequeBook:
    """Issuer-side material for one cheque: secrets plus triple halves."""

    account_id: str
    serial: BitString
    shared_key: BitString
    public_key: object
    secret_key: object
    triples: list[GhzTriple]
    params: SchemeParams
    scheme: SignatureScheme
    used: bool = False


@dataclass
class BankRecord:
    """Bank-side view of one account: secrets, vault qubits, ledger flags.

    `spent` only ever goes False -> True on acceptance.  `destroyed`
    marks that a verification session consumed the serial, whatever the
    verdict, so the serial can never be submitted again.
    """

    account_id: str
    serial: BitString
    shared_key: BitString
    public_key: object
    bank_qubits: list[QubitHandle]
    params: SchemeParams
    spent: bool = False
    destroyed: bool = False


@dataclass(frozen=True)
class QuantumCheque:
    """What the payee actually receives.

    The classical fields are fixed at signing; the two handle tuples
    point at live qubits in the world the cheque was issued in.
    """

    account_id: str
    serial: BitString
    nonce: BitString
    amount: BitString
    signature: bytes
    amount_qubits: tuple[QubitHandle, ...]
    auth_qubits: tuple[QubitHandle, ...]

    def to_json(self) -> dict:
        return {
            "account_id": self.account_id,
            "serial": str(self.serial),
            "nonce": str(self.nonce),
            "amount": str(self.amount),
            "signature": self.signature.hex(),
            "amount_qubits": [[q.qid, q.owner.value] for q in self.amount_qubits],
            "auth_qubits": [[q.qid, q.owner.value] for q in self.auth_qubits],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QuantumCheque":
        return cls(
            account_id=doc["account_id"],
            serial=BitString.from_binary_text(doc["serial"]),
            nonce=BitString.from_binary_text(doc["nonce"]),
            amount=BitString.from_binary_text(doc["amount"]),
            signature=bytes.fromhex(doc["signature"]),
            amount_qubits=tuple(QubitHandle(int(q), Owner(o)) for q, o in doc["amount_qubits"]),
            auth_qubits=tuple(QubitHandle(int(q), Owner(o)) for q, o in doc["auth_qubits"]),
        )


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    reason: RejectReason
    amount_passes: tuple[bool, ...] = ()
    failed_amount_indices: tuple[int, ...] = ()
    auth_passed: bool | None = None


@dataclass(frozen=True)
class Message:
    """One entry of the bank's ordered session transcript."""

    session: int
    seq: int
    sender: str
    receiver: str
    payload_type: str
    payload: dict


def encode_amount(units: int) -> BitString:
    """Encode a non-negative whole number of currency units as bits."""
    if units < 0:
        raise ValueError("amounts are non-negative")
    return BitString.from_text(str(int(units)))


class Bank:
    """Account registry, spent ledger, vault custody and verification."""

    def __init__(self, scheme: SignatureScheme | None = None, signature_bits: int = 128):
        self.scheme = scheme if scheme is not None else LamportSignatureScheme()
        self.signature_bits = signature_bits
        self._records: dict[str, BankRecord] = {}
        self.transcript: list[Message] = []
        self._session_counter = 0

    # ------------------------------------------------------------------
    # transcript plumbing
    # ------------------------------------------------------------------

    def _open_session(self) -> tuple[int, list[int]]:
        self._session_counter += 1
        return self._session_counter, [0]

    def _log(self, session: int, seq_box: list[int], sender: str, receiver: str,
             payload_type: str, payload: dict) -> None:
        self.transcript.append(
            Message(session, seq_box[0], sender, receiver, payload_type, payload)
        )
        seq_box[0] += 1

    def messages_in_session(self, session: int, payload_type: str | None = None) -> list[Message]:
        return [
            m for m in self.transcript
            if m.session == session and (payload_type is None or m.payload_type == payload_type)
        ]

    # ------------------------------------------------------------------
    # account generation
    # ------------------------------------------------------------------

    def gen_account(self, world: World, account_id: str, params: SchemeParams) -> tuple[ChequeBook, BankRecord]:
        """Open an account: shared key, serial, signing keys, GHZ triples."""
        session, seq = self._open_session()
        serial = BitString.random(world.rng, params.serial_bits)
        while str(serial) in self._records:
            serial = BitString.random(world.rng, params.serial_bits)
        shared_key = BitString.random(world.rng, params.key_bits)
        keypair = self.scheme.generate_keypair(self.signature_bits, world.rng)
        triples = [prepare_ghz(world, i) for i in range(1, params.ghz_triples + 1)]

        record = BankRecord(
            account_id=account_id,
            serial=serial,
            shared_key=shared_key,
            public_key=keypair.public,
            bank_qubits=[t.bank_qubit for t in triples],
            params=params,
        )
        self._records[str(serial)] = record
        book = ChequeBook(
            account_id=account_id,
            serial=serial,
            shared_key=shared_key,
            public_key=keypair.public,
            secret_key=keypair.secret,
            triples=triples,
            params=params,
            scheme=self.scheme,
        )
        self._log(session, seq, "main", "issuer", "account-issued",
                  {"account_id": account_id, "serial": str(serial),
                   "ghz_triples": params.ghz_triples})
        return book, record

    # ------------------------------------------------------------------
    # ledger
    # ------------------------------------------------------------------

    def spent_ledger_check(self, serial: BitString) -> bool:
        """True when a cheque under this serial has been deposited."""
        record = self._records.get(str(serial))
        return bool(record and record.spent)

    def record_for(self, serial: BitString) -> BankRecord | None:
        return self._records.get(str(serial))

    # ------------------------------------------------------------------
    # verification
    # ------------------------------------------------------------------

    def verify_cheque(self, world: World, cheque: QuantumCheque) -> VerifyResult:
        """Run the full deposit pipeline on a submitted cheque.

        Classical checks run before any qubit is touched, so a replayed
        serial is refused without consuming bank-side entanglement.  All
        submitted quantum registers are destroyed on every terminal
        outcome and the serial is retired.
        """
        session, seq = self._open_session()
        self._log(session, seq, "branch", "main", "verify-request",
                  {"account_id": cheque.account_id, "serial": str(cheque.serial)})

        record = self._records.get(str(cheque.serial))
        if record is None or record.account_id != cheque.account_id:
            self._log(session, seq, "main", "branch", "lookup-status", {"known": False})
            destroy_cheque(world, cheque)
            return VerifyResult(False, RejectReason.UNKNOWN_ID_SERIAL)

        if record.spent or record.destroyed:
            self._log(session, seq, "main", "branch", "lookup-status",
                      {"known": True, "available": False})
            destroy_cheque(world, cheque)
            return VerifyResult(False, RejectReason.DOUBLE_SPEND)
        self._log(session, seq, "main", "branch", "lookup-status",
                  {"known": True, "available": True})

        signature_ok = self.scheme.verify(record.public_key, cheque.serial, cheque.signature)
        self._log(session, seq, "branch", "main", "signature-status", {"valid": signature_ok})
        if not signature_ok:
            destroy_cheque(world, cheque)
            record.destroyed = True
            return VerifyResult(False, RejectReason.BAD_SIGNATURE)

        params = record.params
        self._require_shape(world, cheque, params)

        # quantum phase: recover each amount state onto its cheque qubit
        for i, (bank_q, cheque_q) in enumerate(zip(record.bank_qubits, cheque.amount_qubits), start=1):
            recovery = recover_qubit(world, bank_q, cheque_q)
            self._log(session, seq, "main", "branch", "recovery-outcome",
                      {"index": i, "outcome": recovery.outcome.value})
            world.discard(bank_q)

        amount_passes = []
        for i, cheque_q in enumerate(cheque.amount_qubits, start=1):
            target = prepare_amount_state(world, cheque.nonce, cheque.amount, i, owner=Owner.BANK)
            outcome = swap_test(world, [cheque_q], [target])
            amount_passes.append(outcome.passed)
            world.discard(target)

        id_bits = BitString.from_text(cheque.account_id)
        auth_target = prepare_auth_state(
            world, record.shared_key, id_bits, cheque.nonce, cheque.amount,
            params.auth_qubits, owner=Owner.BANK,
        )
        auth_passed = swap_test(world, list(cheque.auth_qubits), auth_target).passed
        for q in auth_target:
            world.discard(q)

        amount_ok = params.policy.decide(amount_passes)
        auth_ok = params.policy.decide_auth(auth_passed)
        accepted = amount_ok and auth_ok
        if accepted:
            reason = RejectReason.OK
        elif not amount_ok:
            reason = RejectReason.AMOUNT_STATE_FAIL
        else:
            reason = RejectReason.AUTH_STATE_FAIL
        failed = tuple(i for i, ok in enumerate(amount_passes, start=1) if not ok)

        self._log(session, seq, "branch", "main", "verdict",
                  {"accepted": accepted, "reason": reason.value})
        destroy_cheque(world, cheque)
        record.destroyed = True
        if accepted:
            record.spent = True
        return VerifyResult(
            accepted=accepted,
            reason=reason,
            amount_passes=tuple(amount_passes),
            failed_amount_indices=failed if reason is RejectReason.AMOUNT_STATE_FAIL else (),
            auth_passed=auth_passed,
        )

    def _require_shape(self, world: World, cheque: QuantumCheque, params: SchemeParams) -> None:
        handles = list(cheque.amount_qubits) + list(cheque.auth_qubits)
        if len(cheque.amount_qubits) != params.ghz_triples:
            raise ValueError(
                f"cheque carries {len(cheque.amount_qubits)} amount qubits, "
                f"scheme expects {params.ghz_triples}"
            )
        if len(cheque.auth_qubits) != params.auth_qubits:
            raise ValueError(
                f"cheque carries {len(cheque.auth_qubits)} auth qubits, "
                f"scheme expects {params.auth_qubits}"
            )
        if len(set(handles)) != len(handles):
            raise ValueError("cheque lists a qubit handle twice")
        for q in handles:
            world.group_of(q)

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        records = []
        for record in self._records.values():
            records.append(
                {
                    "account_id": record.account_id,
                    "serial": str(record.serial),
                    "shared_key": str(record.shared_key),
                    "public_key": self.scheme.public_key_to_json(record.public_key),
                    "bank_qubits": [[q.qid, q.owner.value] for q in record.bank_qubits],
                    "params": record.params.to_json(),
                    "spent": record.spent,
                    "destroyed": record.destroyed,
                }
            )
        return {
            "format": BANK_SNAPSHOT_FORMAT,
            "version": BANK_SNAPSHOT_VERSION,
            "signature_scheme": self.scheme.identifier,
            "signature_bits": self.signature_bits,
            "session_counter": self._session_counter,
            "records": records,
            "transcript": [
                {
                    "session": m.session,
                    "seq": m.seq,
                    "sender": m.sender,
                    "receiver": m.receiver,
                    "payload_type": m.payload_type,
                    "payload": m.payload,
                }
                for m in self.transcript
            ],
        }

    @classmethod
    def from_json(cls, doc: dict, scheme: SignatureScheme | None = None) -> "Bank":
        if not isinstance(doc, dict) or doc.get("format") != BANK_SNAPSHOT_FORMAT:
            raise ValueError("not a bank snapshot document")
        if doc.get("version") != BANK_SNAPSHOT_VERSION:
            raise ValueError(
                f"unsupported bank snapshot version {doc.get('version')!r}, "
                f"expected {BANK_SNAPSHOT_VERSION}"
            )
        bank = cls(scheme=scheme, signature_bits=int(doc["signature_bits"]))
        if bank.scheme.identifier != doc.get("signature_scheme"):
            raise ValueError(
                f"snapshot uses scheme {doc.get('signature_scheme')!r}, "
                f"bank is configured with {bank.scheme.identifier!r}"
            )
        bank._session_counter = int(doc["session_counter"])
        for entry in doc["records"]:
            record = BankRecord(
                account_id=entry["account_id"],
                serial=BitString.from_binary_text(entry["serial"]),
                shared_key=BitString.from_binary_text(entry["shared_key"]),
                public_key=bank.scheme.public_key_from_json(entry["public_key"]),
                bank_qubits=[QubitHandle(int(q), Owner(o)) for q, o in entry["bank_qubits"]],
                params=SchemeParams.from_json(entry["params"]),
                spent=bool(entry["spent"]),
                destroyed=bool(entry["destroyed"]),
            )
            bank._records[str(record.serial)] = record
        for m in doc["transcript"]:
            bank.transcript.append(
                Message(int(m["session"]), int(m["seq"]), m["sender"], m["receiver"],
                        m["payload_type"], m["payload"])
            )
        return bank


def sign_cheque(world: World, book: ChequeBook, amount: BitString) -> QuantumCheque:
    """Issue a cheque over `amount` from a fresh cheque book.

    Consumes the book: the nonce is drawn, the authentication register is
    prepared, every amount state is teleport-encoded onto its triple, and
    the serial is signed with the one-time key.
    """
    if book.used:
        raise ValueError("cheque book has already signed a cheque")
    for triple in book.triples:
        if triple.used:
            raise ValueError(f"triple {triple.index} was already consumed")

    nonce = BitString.random(world.rng, book.params.key_bits)
    id_bits = BitString.from_text(book.account_id)
    auth = prepare_auth_state(
        world, book.shared_key, id_bits, nonce, amount,
        book.params.auth_qubits, owner=Owner.ALICE,
    )
    for i, triple in enumerate(book.triples, start=1):
        payload = prepare_amount_state(world, nonce, amount, i, owner=Owner.ALICE)
        encode_qubit(world, payload, triple)
    signature = book.scheme.sign(book.secret_key, book.serial)
    book.used = True
    return QuantumCheque(
        account_id=book.account_id,
        serial=book.serial,
        nonce=nonce,
        amount=amount,
        signature=signature,
        amount_qubits=tuple(t.cheque_qubit for t in book.triples),
        auth_qubits=tuple(auth),
    )


def destroy_cheque(world: World, cheque: QuantumCheque) -> None:
    """Measure out and retire whatever cheque qubits are still alive."""
    for q in list(cheque.amount_qubits) + list(cheque.auth_qubits):
        if q in world:
            world.discard(q)
