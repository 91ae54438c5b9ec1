"""Dense state-vector oracle on at most three qubits (A, B1, B2).

Qubits are ordered as given by ``labels``, the first label being the most
significant bit of the amplitude index. Measurements are never sampled:
every branch is followed with its probability.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .maps import MapResult
from .rates import PAULI_LABELS, PauliRates

NORM_TOL = 1e-12
BELL_FIDELITY = 1.0 - 1e-9

SQRT1_2 = 1.0 / np.sqrt(2.0)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)

KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": SQRT1_2 * np.array([1, 1], dtype=complex),
    "-": SQRT1_2 * np.array([1, -1], dtype=complex),
    "+i": SQRT1_2 * np.array([1, 1j], dtype=complex),
    "-i": SQRT1_2 * np.array([1, -1j], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = len(self.labels)
        if not 1 <= n <= 3 or amps.shape != (2**n,):
            raise DomainError(f"need 2^n amplitudes for n={n} in 1..3 qubits")
        if len(set(self.labels)) != n:
            raise DomainError(f"duplicate qubit labels {self.labels}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self) -> bool:
        return abs(self.norm_sq() - 1.0) <= NORM_TOL

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown qubit label {label!r}; have {self.labels}") from None

    def overlap(self, other: StateVector) -> complex:
        if self.labels != other.labels:
            raise DomainError("label mismatch in overlap")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def same_ray(self, other: StateVector, tol: float = 1e-9) -> bool:
        """Equal up to a global phase."""
        return abs(abs(self.overlap(other)) ** 2 - 1.0) <= tol


def _from_tensor(t: np.ndarray, labels) -> StateVector:
    return StateVector(t.reshape(-1), tuple(labels))


def apply_gate(s: StateVector, qubit: str, gate: np.ndarray) -> StateVector:
    k = s.index(qubit)
    t = np.moveaxis(np.tensordot(gate, s.tensor(), axes=([1], [k])), 0, k)
    return _from_tensor(t, s.labels)


def apply_pauli(s: StateVector, qubit: str, p: str) -> StateVector:
    if p not in PAULI:
        raise DomainError(f"unknown Pauli {p!r}")
    return apply_gate(s, qubit, PAULI[p])


def apply_cnot(s: StateVector, control: str, target: str) -> StateVector:
    c, t = s.index(control), s.index(target)
    arr = s.tensor().copy()
    sl = [slice(None)] * s.n_qubits
    sl[c] = 1
    sub = arr[tuple(sl)]
    # target axis index shifts down once the control axis is sliced away
    arr[tuple(sl)] = np.flip(sub, axis=t if t < c else t - 1)
    return _from_tensor(arr, s.labels)


def product_state(kets: dict[str, str]) -> StateVector:
    amps = np.array([1.0 + 0j])
    for name in kets.values():
        amps = np.kron(amps, KET[name])
    return StateVector(amps, tuple(kets))


class Basis(enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


def encode_code(bit: int, basis: Basis | str, six_state: bool = False) -> StateVector:
    """Two-qubit code state Alice sends for a prepared ``(bit, basis)``.

    X: |00>, |11>.  Z: (|00> +- |11>)/sqrt2.  Y: (|00> -+ i|11>)/sqrt2, with
    bit 0 <-> the minus sign; it decodes to the +1 eigenstate of sigma_y.
    """
    basis = Basis(basis)
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit!r}")
    if basis is Basis.Y and not six_state:
        raise DomainError("Y-basis codes exist only in the six-state protocol")
    amps = np.zeros(4, dtype=complex)
    if basis is Basis.X:
        amps[3 * bit] = 1.0
    else:
        phase = {Basis.Z: (1.0, -1.0), Basis.Y: (-1j, 1j)}[basis][bit]
        amps[0], amps[3] = SQRT1_2, SQRT1_2 * phase
    return StateVector(amps, ("B1", "B2"))


def encode_epr() -> StateVector:
    """Encoded EPR state on (A, B1, B2).

    Built by running the encoder (Hadamard on B1, then CNOT B1->B2) on
    |Phi+>_{A,B1} |0>_{B2}.
    """
    phi_plus = np.zeros(4, dtype=complex)
    phi_plus[0] = phi_plus[3] = SQRT1_2
    s = StateVector(np.kron(phi_plus, KET["0"]), ("A", "B1", "B2"))
    s = apply_gate(s, "B1", HADAMARD)
    return apply_cnot(s, "B1", "B2")


@dataclass(frozen=True, eq=False)
class Decoded:
    """A code that passed the parity check.

    ``branches`` maps each X-basis outcome of B1 (``"+"``/``"-"``) to its
    probability and the corrected state on the remaining qubits.
    """

    state: StateVector
    keep_probability: float
    branches: dict

    @property
    def branch_independent(self) -> bool:
        states = [st for _, st in self.branches.values()]
        return all(states[0].same_ray(other) for other in states[1:])


def bob_parity_and_decode(s: StateVector) -> Decoded | None:
    """Bob's Z_{B1}Z_{B2} parity check followed by decoding onto B2.

    Returns ``None`` when the odd-parity outcome is certain. Otherwise the
    even-parity projection is kept, B1 is measured in the X basis, B2 gets a
    Hadamard, and additionally a bit flip if B1 gave ``-``. Both B1 branches
    are computed; ``state`` is the ``+`` branch.
    """
    if not s.is_normalized():
        raise PreconditionError(f"input state has squared norm {s.norm_sq()!r}")
    b1, b2 = s.index("B1"), s.index("B2")
    t = s.tensor().copy()
    idx = np.indices(t.shape)
    odd = (idx[b1] ^ idx[b2]) == 1
    t[odd] = 0.0
    keep = float(np.sum(np.abs(t) ** 2))
    if keep <= NORM_TOL:
        return None
    t = t / np.sqrt(keep)
    rest = tuple(label for label in s.labels if label != "B1")
    branches = {}
    for outcome in ("+", "-"):
        reduced = np.tensordot(KET[outcome].conj(), t, axes=([0], [b1]))
        prob = float(np.sum(np.abs(reduced) ** 2))
        if prob <= NORM_TOL:
            continue
        out = _from_tensor(reduced / np.sqrt(prob), rest)
        out = apply_gate(out, "B2", HADAMARD)
        if outcome == "-":
            out = apply_pauli(out, "B2", "X")
        branches[outcome] = (prob, out)
    first = branches.get("+", branches.get("-"))
    return Decoded(first[1], keep, branches)


class BellLabel(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    NOT_BELL = "not-bell"


BELL_VECTORS = {
    BellLabel.PHI_PLUS: SQRT1_2 * np.array([1, 0, 0, 1], dtype=complex),
    BellLabel.PHI_MINUS: SQRT1_2 * np.array([1, 0, 0, -1], dtype=complex),
    BellLabel.PSI_PLUS: SQRT1_2 * np.array([0, 1, 1, 0], dtype=complex),
    BellLabel.PSI_MINUS: SQRT1_2 * np.array([0, 1, -1, 0], dtype=complex),
}

# Pauli on the second qubit that carries |Phi+> to each Bell state
BELL_TO_ERROR = {
    BellLabel.PHI_PLUS: "I",
    BellLabel.PSI_PLUS: "X",
    BellLabel.PSI_MINUS: "Y",
    BellLabel.PHI_MINUS: "Z",
}


def classify_bell(s: StateVector) -> BellLabel:
    if s.n_qubits != 2:
        raise DomainError("classify_bell needs a 2-qubit state")
    for label, vec in BELL_VECTORS.items():
        if abs(np.vdot(vec, s.amplitudes)) ** 2 >= BELL_FIDELITY:
            return label
    return BellLabel.NOT_BELL


@dataclass(frozen=True)
class JointErrorRow:
    e1: str
    e2: str
    kept: bool
    bell: BellLabel | None
    raw_error: str | None


def enumerate_joint_errors() -> list[JointErrorRow]:
    """Push each ordered Pauli pair on (B1, B2) through Bob's check and decoding."""
    base = encode_epr()
    rows = []
    for e1, e2 in itertools.product(PAULI_LABELS, repeat=2):
        s = apply_pauli(apply_pauli(base, "B1", e1), "B2", e2)
        dec = bob_parity_and_decode(s)
        if dec is None:
            rows.append(JointErrorRow(e1, e2, False, None, None))
            continue
        if not dec.branch_independent:
            raise AssertionError(f"decoded state depends on the B1 outcome for {e1}{e2}")
        bell = classify_bell(dec.state)
        rows.append(JointErrorRow(e1, e2, True, bell, BELL_TO_ERROR.get(bell)))
    return rows


# Expected kept rows: joint error -> (decoded Bell state, raw-pair error).
EXPECTED_KEPT = {
    ("I", "I"): (BellLabel.PHI_PLUS, "I"),
    ("Z", "Z"): (BellLabel.PHI_PLUS, "I"),
    ("I", "Z"): (BellLabel.PSI_PLUS, "X"),
    ("Z", "I"): (BellLabel.PSI_PLUS, "X"),
    ("X", "X"): (BellLabel.PHI_MINUS, "Z"),
    ("Y", "Y"): (BellLabel.PHI_MINUS, "Z"),
    ("X", "Y"): (BellLabel.PSI_MINUS, "Y"),
    ("Y", "X"): (BellLabel.PSI_MINUS, "Y"),
}


def table_mismatches(rows: list[JointErrorRow]) -> list[str]:
    """Differences between ``rows`` and the expected 16-row table (empty if equal)."""
    problems = []
    seen = {(r.e1, r.e2): r for r in rows}
    for pair in itertools.product(PAULI_LABELS, repeat=2):
        row = seen.get(pair)
        if row is None:
            problems.append(f"{''.join(pair)}: missing")
            continue
        expected = EXPECTED_KEPT.get(pair)
        got = (row.bell, row.raw_error) if row.kept else None
        if got != expected:
            problems.append(f"{''.join(pair)}: expected {expected}, got {got}")
    if len(rows) != 16:
        problems.append(f"expected 16 rows, got {len(rows)}")
    return problems


def oracle_decode_rates(r0: PauliRates, rows: list[JointErrorRow] | None = None) -> MapResult:
    """Weight the joint-error table by ``r0 x r0`` and renormalize over kept rows."""
    if rows is None:
        rows = enumerate_joint_errors()
    p = dict(zip(PAULI_LABELS, r0.as_tuple()))
    mass = dict.fromkeys(PAULI_LABELS, 0.0)
    for row in rows:
        if row.kept:
            mass[row.raw_error] += p[row.e1] * p[row.e2]
    keep = sum(mass.values())
    return MapResult(PauliRates(*(mass[k] / keep for k in PAULI_LABELS)), keep)


def decode_code(s: StateVector) -> StateVector | None:
    """Decode a bare 2-qubit code (no partner qubit A) to Bob's single qubit."""
    dec = bob_parity_and_decode(s)
    return None if dec is None else dec.state


def table_to_csv(rows: list[JointErrorRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["e1", "e2", "kept", "bell", "raw_error"])
    for r in rows:
        writer.writerow([r.e1, r.e2, int(r.kept), r.bell.value if r.bell else "", r.raw_error or ""])
    return buf.getvalue()
