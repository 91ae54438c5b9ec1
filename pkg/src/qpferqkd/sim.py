"""Seeded Pauli-frame Monte Carlo of the prepare-and-measure protocol.

Every raw bit is tracked only through two error flags relative to Alice's
record: ``bit_flip`` (Z-basis value wrong) and ``phase_flip`` (X-basis value
wrong). Pauli labels are coded 0=I, 1=X, 2=Y, 3=Z.

Randomness is drawn from counter-based Philox streams keyed by
``(seed, stage, block)``. Codes are processed in fixed-size blocks, so the
result does not depend on how many workers consume the blocks.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import maps
from .errors import DomainError, InsufficientDataError
from .maps import DEFAULT_ETA
from .oracle import Basis
from .rates import PAULI_LABELS, PauliRates, ProtocolVariant

BIT = np.array([False, True, True, False])
PHASE = np.array([False, False, True, True])

BLOCK_SIZE = 1 << 16

# stream keys
_TRANSMIT, _SIFT, _ROUND, _PEC = 0, 1, 2, 3

BASES = (Basis.X, Basis.Y, Basis.Z)
# preparation and measurement basis probabilities over (X, Y, Z)
PREP_PROBS = {
    ProtocolVariant.FOUR_STATE: (0.25, 0.0, 0.75),
    ProtocolVariant.SIX_STATE: (0.25, 0.25, 0.5),
}
MEAS_PROBS = {
    ProtocolVariant.FOUR_STATE: (0.5, 0.0, 0.5),
    ProtocolVariant.SIX_STATE: (1 / 3, 1 / 3, 1 / 3),
}


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one ``(seed, *key)`` coordinate."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class FrameBit:
    bit_flip: bool
    phase_flip: bool

    @property
    def raw_error(self) -> str:
        return PAULI_LABELS[_label(self.bit_flip, self.phase_flip)]

    @classmethod
    def from_error(cls, label: str) -> FrameBit:
        k = PAULI_LABELS.index(label)
        return cls(bool(BIT[k]), bool(PHASE[k]))


def _label(bit_flip, phase_flip):
    # (0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z
    return np.where(bit_flip, np.where(phase_flip, 2, 1), np.where(phase_flip, 3, 0))


@dataclass(eq=False)
class FrameBits:
    """Columnar batch of :class:`FrameBit`."""

    bit_flip: np.ndarray
    phase_flip: np.ndarray

    def __post_init__(self):
        self.bit_flip = np.asarray(self.bit_flip, dtype=bool)
        self.phase_flip = np.asarray(self.phase_flip, dtype=bool)
        if self.bit_flip.shape != self.phase_flip.shape:
            raise DomainError("flag arrays differ in shape")

    def __len__(self) -> int:
        return len(self.bit_flip)

    @classmethod
    def from_labels(cls, labels) -> FrameBits:
        labels = np.asarray(labels)
        return cls(BIT[labels], PHASE[labels])

    @classmethod
    def from_list(cls, bits: Sequence[FrameBit]) -> FrameBits:
        return cls([b.bit_flip for b in bits], [b.phase_flip for b in bits])

    def labels(self) -> np.ndarray:
        return _label(self.bit_flip, self.phase_flip)

    def to_list(self) -> list[FrameBit]:
        return [FrameBit(bool(b), bool(p)) for b, p in zip(self.bit_flip, self.phase_flip)]

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels(), minlength=4)

    def empirical(self) -> PauliRates:
        n = len(self)
        if n == 0:
            raise DomainError("empirical rates of an empty batch")
        c = self.counts()
        p_x, p_y, p_z = c[1] / n, c[2] / n, c[3] / n
        return PauliRates(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)


def _as_frames(bits) -> FrameBits:
    return bits if isinstance(bits, FrameBits) else FrameBits.from_list(bits)


def sample_paulis(channel: PauliRates, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(4, size=n, p=np.array(channel.as_tuple()))


def frame_decode(e1: np.ndarray, e2: np.ndarray) -> tuple[np.ndarray, FrameBits]:
    """Parity check and decoding at the Pauli-frame level.

    A code is kept iff both or neither qubit carries a bit flip. The decoded
    pair's bit flip is the XOR of the two phase flags and its phase flip is
    the common bit-flip flag.
    """
    kept = BIT[e1] == BIT[e2]
    frames = FrameBits(PHASE[e1] ^ PHASE[e2], BIT[e1])
    return kept, FrameBits(frames.bit_flip[kept], frames.phase_flip[kept])


def transmit_code(channel: PauliRates, rng: np.random.Generator) -> str | None:
    """Send one code through ``channel``; ``None`` if Bob's parity check rejects it."""
    e1, e2 = sample_paulis(channel, 2, rng)
    kept, frames = frame_decode(np.array([e1]), np.array([e2]))
    if not kept[0]:
        return None
    return PAULI_LABELS[int(frames.labels()[0])]


@dataclass(frozen=True)
class SiftResult:
    aborted: bool
    key_candidates: FrameBits
    sifted: int
    checked: int
    check_error_rate: float
    check_counts: dict  # basis name -> (checked, errors)


def check_errors(bits: FrameBits, basis: Basis) -> np.ndarray:
    if basis is Basis.Z:
        return bits.bit_flip
    if basis is Basis.X:
        return bits.phase_flip
    # sigma_x and sigma_z flip a Y-basis value, sigma_y does not
    return bits.bit_flip ^ bits.phase_flip


def sift_and_check(
    frames: FrameBits,
    prep_basis: np.ndarray,
    meas_basis: np.ndarray,
    check_fraction: float,
    abort_threshold: float,
    rng: np.random.Generator,
) -> SiftResult:
    """Keep basis-matched bits and spend the announced ones as checks.

    All X- and Y-matched bits are checked, plus as many randomly chosen
    Z-matched bits as there are X-matched ones, plus ``check_fraction`` of
    the Z-matched remainder. Basis arrays hold indices into ``BASES``.
    """
    frames = _as_frames(frames)
    matched = prep_basis == meas_basis
    z_idx = np.flatnonzero(matched & (prep_basis == 2))
    n_x = int(np.count_nonzero(matched & (prep_basis == 0)))
    if len(z_idx) < n_x:
        raise InsufficientDataError("sift", f"{len(z_idx)} Z-matched bits, need {n_x} checks")
    n_z_check = n_x + int(np.floor(check_fraction * (len(z_idx) - n_x)))
    z_idx = rng.permutation(z_idx)
    z_check, z_key = np.sort(z_idx[:n_z_check]), np.sort(z_idx[n_z_check:])

    check_counts, errors, checked = {}, 0, 0
    for k, basis in enumerate(BASES):
        idx = z_check if basis is Basis.Z else np.flatnonzero(matched & (prep_basis == k))
        sub = FrameBits(frames.bit_flip[idx], frames.phase_flip[idx])
        e = int(np.count_nonzero(check_errors(sub, basis)))
        check_counts[basis.value] = (len(idx), e)
        errors += e
        checked += len(idx)
    rate = errors / checked if checked else 0.0
    key = FrameBits(frames.bit_flip[z_key], frames.phase_flip[z_key])
    return SiftResult(rate > abort_threshold, key, int(np.count_nonzero(matched)), checked, rate, check_counts)


def estimate_from_checks(check_counts: dict, variant: ProtocolVariant) -> PauliRates | None:
    """Post-decode rates as the parties can infer them from the check bits.

    FOUR_STATE cannot see sigma_y and reports the worst case p_y = 0.
    """
    def rate(b):
        n, e = check_counts.get(b, (0, 0))
        return e / n if n else None

    bit, phase = rate("Z"), rate("X")
    if bit is None or phase is None:
        return None
    p_y = 0.0
    if variant is ProtocolVariant.SIX_STATE:
        y = rate("Y")
        if y is None:
            return None
        # Z err = x+y, X err = z+y, Y err = x+z
        p_y = min(max(0.0, 0.5 * (bit + phase - y)), bit, phase)
    p_x, p_z = bit - p_y, phase - p_y
    if p_x + p_y + p_z > 1.0:
        return None
    return PauliRates(1.0 - p_x - p_y - p_z, p_x, p_y, p_z)


def rejection_round(bits, rng: np.random.Generator) -> FrameBits:
    """Random pairing; keep the first bit of each pair whose bit flags agree.

    The kept bit's phase flag becomes the XOR of the pair's phase flags. An
    odd leftover bit is dropped.
    """
    bits = _as_frames(bits)
    perm = rng.permutation(len(bits))
    m = len(bits) // 2
    a, b = perm[0 : 2 * m : 2], perm[1 : 2 * m : 2]
    keep = bits.bit_flip[a] == bits.bit_flip[b]
    a, b = a[keep], b[keep]
    return FrameBits(bits.bit_flip[a], bits.phase_flip[a] ^ bits.phase_flip[b])


def pec_compress(bits, reps: int, rng: np.random.Generator) -> FrameBits:
    """Replace random groups of ``reps`` bits by their parity.

    Bit flags combine by XOR, phase flags by majority vote.
    """
    if reps < 1 or reps % 2 == 0:
        raise DomainError(f"reps must be a positive odd integer, got {reps}")
    bits = _as_frames(bits)
    if reps == 1:
        return FrameBits(bits.bit_flip.copy(), bits.phase_flip.copy())
    m = len(bits) // reps
    groups = rng.permutation(len(bits))[: m * reps].reshape(m, reps)
    bit = np.bitwise_xor.reduce(bits.bit_flip[groups], axis=1)
    phase = np.count_nonzero(bits.phase_flip[groups], axis=1) > reps // 2
    return FrameBits(bit, phase)


@dataclass(frozen=True)
class SimConfig:
    channel: PauliRates
    variant: ProtocolVariant = ProtocolVariant.FOUR_STATE
    n_codes: int = 100_000
    g: int = 2
    reps: int = 3
    seed: int = 0
    check_fraction: float = 0.0
    # None -> 1.2 x the analytic post-decode bit-flip rate
    abort_threshold: float | None = None
    eta: float = DEFAULT_ETA
    workers: int = 1

    def __post_init__(self):
        if self.n_codes < 1:
            raise DomainError("n_codes must be positive")
        if self.g < 0:
            raise DomainError("g must be >= 0")
        if self.reps < 1 or self.reps % 2 == 0:
            raise DomainError("reps must be a positive odd integer")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if not 0.0 <= self.check_fraction < 1.0:
            raise DomainError("check_fraction must lie in [0, 1)")
        if self.abort_threshold is not None and not 0.0 < self.abort_threshold < 1.0:
            raise DomainError("abort_threshold must lie in (0, 1)")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")

    def resolved_abort_threshold(self) -> float:
        if self.abort_threshold is not None:
            return self.abort_threshold
        return 1.2 * maps.qpfer_decode_map(self.channel).rates.bit_flip


@dataclass
class SimReport:
    sent: int
    kept_after_parity: int
    sifted: int
    checked: int
    check_error_rate: float
    abort_threshold: float
    aborted: bool
    post_decode_empirical: PauliRates
    estimated_post_decode: PauliRates | None
    key_candidates: int = 0
    per_round_empirical: list = field(default_factory=list)
    per_round_pairs: list = field(default_factory=list)
    per_round_survivors: list = field(default_factory=list)
    final_count: int = 0
    final_empirical: PauliRates | None = None
    final_bit_flip_rate: float | None = None
    final_phase_flip_rate: float | None = None
    converged: bool | None = None
    yield_: float = 0.0

    def to_dict(self) -> dict:
        def rates(r):
            return None if r is None else dict(zip(("p_I", "p_x", "p_y", "p_z"), r.as_tuple()))

        return {
            "sent": self.sent,
            "kept_after_parity": self.kept_after_parity,
            "sifted": self.sifted,
            "checked": self.checked,
            "check_error_rate": self.check_error_rate,
            "abort_threshold": self.abort_threshold,
            "aborted": self.aborted,
            "post_decode_empirical": rates(self.post_decode_empirical),
            "estimated_post_decode": rates(self.estimated_post_decode),
            "key_candidates": self.key_candidates,
            "per_round_empirical": [rates(r) for r in self.per_round_empirical],
            "per_round_pairs": list(self.per_round_pairs),
            "per_round_survivors": list(self.per_round_survivors),
            "final_count": self.final_count,
            "final_empirical": rates(self.final_empirical),
            "final_bit_flip_rate": self.final_bit_flip_rate,
            "final_phase_flip_rate": self.final_phase_flip_rate,
            "converged": self.converged,
            "yield": self.yield_,
        }

    def rounds_csv(self) -> str:
        """Columns ``round, p_I, p_x, p_y, p_z, survivors``; round 0 is post-decode."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "p_I", "p_x", "p_y", "p_z", "survivors"])
        w.writerow([0, *self.post_decode_empirical.as_tuple(), self.kept_after_parity])
        for k, (r, n) in enumerate(zip(self.per_round_empirical, self.per_round_survivors), 1):
            w.writerow([k, *r.as_tuple(), n])
        return buf.getvalue()


def _transmit_block(cfg: SimConfig, block: int, size: int):
    rng = stream(cfg.seed, _TRANSMIT, block)
    e1 = sample_paulis(cfg.channel, size, rng)
    e2 = sample_paulis(cfg.channel, size, rng)
    prep = rng.choice(3, size=size, p=PREP_PROBS[cfg.variant])
    meas = rng.choice(3, size=size, p=MEAS_PROBS[cfg.variant])
    kept, frames = frame_decode(e1, e2)
    return frames, prep[kept], meas[kept]


def transmit_all(cfg: SimConfig):
    sizes = [BLOCK_SIZE] * (cfg.n_codes // BLOCK_SIZE)
    if cfg.n_codes % BLOCK_SIZE:
        sizes.append(cfg.n_codes % BLOCK_SIZE)
    jobs = list(enumerate(sizes))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda job: _transmit_block(cfg, *job), jobs))
    else:
        parts = [_transmit_block(cfg, *job) for job in jobs]
    frames = FrameBits(
        np.concatenate([p[0].bit_flip for p in parts]),
        np.concatenate([p[0].phase_flip for p in parts]),
    )
    return frames, np.concatenate([p[1] for p in parts]), np.concatenate([p[2] for p in parts])


def run_protocol(cfg: SimConfig) -> SimReport:
    """Run the whole protocol once; deterministic in ``cfg`` (``workers`` excluded)."""
    frames, prep, meas = transmit_all(cfg)
    if len(frames) == 0:
        raise InsufficientDataError("parity check", "no code survived")
    threshold = cfg.resolved_abort_threshold()
    sift = sift_and_check(frames, prep, meas, cfg.check_fraction, threshold, stream(cfg.seed, _SIFT))
    report = SimReport(
        sent=cfg.n_codes,
        kept_after_parity=len(frames),
        sifted=sift.sifted,
        checked=sift.checked,
        check_error_rate=sift.check_error_rate,
        abort_threshold=threshold,
        aborted=sift.aborted,
        post_decode_empirical=frames.empirical(),
        estimated_post_decode=estimate_from_checks(sift.check_counts, cfg.variant),
        key_candidates=len(sift.key_candidates),
    )
    if sift.aborted:
        return report

    bits = sift.key_candidates
    for k in range(1, cfg.g + 1):
        if len(bits) < 2:
            raise InsufficientDataError(f"rejection round {k}", f"{len(bits)} bits left")
        report.per_round_pairs.append(len(bits) // 2)
        bits = rejection_round(bits, stream(cfg.seed, _ROUND, k))
        if len(bits) == 0:
            raise InsufficientDataError(f"rejection round {k}", "every pair was discarded")
        report.per_round_survivors.append(len(bits))
        report.per_round_empirical.append(bits.empirical())
    before_pec = report.per_round_empirical[-1] if cfg.g else bits.empirical()

    if len(bits) < cfg.reps:
        raise InsufficientDataError("phase correction", f"{len(bits)} bits for groups of {cfg.reps}")
    final = pec_compress(bits, cfg.reps, stream(cfg.seed, _PEC))
    report.final_count = len(final)
    report.final_empirical = final.empirical()
    report.final_bit_flip_rate = float(np.mean(final.bit_flip))
    report.final_phase_flip_rate = float(np.mean(final.phase_flip))
    report.converged = maps.converges(before_pec, cfg.reps, cfg.eta)
    report.yield_ = len(final) / cfg.n_codes
    return report
