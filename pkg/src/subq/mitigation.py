"""Single-bit-flip mitigation with one even-parity check qubit.

Configuration ``i`` (``q`` index bits) is stored as ``(i << 1) | parity(i)``:
the rendered bitstring is the binary of ``i`` followed by the parity bit, e.g.
``q=2``: 0 -> ``000``, 1 -> ``011``, 2 -> ``101``, 3 -> ``110``.  Every valid
string has even weight, so a single flip always lands on an odd-weight string.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from subq.errors import ValidationError
from subq.statevector import BitstringCounts


class Outcome(Enum):
    VALID = "valid"
    PARITY_FLAGGED = "parity_flagged"
    PAD_FLAGGED = "pad_flagged"


@dataclass(frozen=True)
class DecodedOutcome:
    kind: Outcome
    bits: str
    index: int | None = None


@dataclass(frozen=True)
class EncodingMap:
    """``q`` index bits for ``n`` physical configurations (``n <= 2**q``).

    With ``parity=False`` the plain binary encoding is used; nothing is flagged
    except indices that fall in the padding.
    """

    q: int
    n: int
    parity: bool = True

    def __post_init__(self):
        if self.q < 0 or not 1 <= self.n <= (1 << self.q):
            raise ValidationError(f"{self.n} configurations do not fit {self.q} index bits")

    @property
    def q_total(self) -> int:
        return self.q + (1 if self.parity else 0)

    def encode(self, i: int) -> int:
        if not 0 <= i < (1 << self.q):
            raise ValidationError(f"index {i} does not fit in {self.q} bits")
        return (i << 1) | (i.bit_count() & 1) if self.parity else i

    def bits(self, i: int) -> str:
        return format(self.encode(i), f"0{self.q_total}b")

    def decode(self, bits: str) -> DecodedOutcome:
        if len(bits) != self.q_total:
            raise ValidationError(f"bitstring {bits!r} is not {self.q_total} bits long")
        value = int(bits, 2)
        if self.parity:
            if value.bit_count() & 1:
                return DecodedOutcome(Outcome.PARITY_FLAGGED, bits)
            value >>= 1
        if value >= self.n:
            return DecodedOutcome(Outcome.PAD_FLAGGED, bits, value)
        return DecodedOutcome(Outcome.VALID, bits, value)


def encode_index(i: int, q: int) -> str:
    """``q+1``-bit even-parity encoding of configuration ``i``."""
    return EncodingMap(q, 1 << q).bits(i)


class PostSelection(NamedTuple):
    valid: dict[int, int]
    flagged: dict[str, int]
    pad_discarded: int


def postselect(counts: BitstringCounts, encoding: EncodingMap) -> PostSelection:
    """Split counts into valid configuration counts, odd-parity strings and padding hits."""
    if counts.q_total != encoding.q_total:
        raise ValidationError(
            f"counts have {counts.q_total}-bit strings, encoding expects {encoding.q_total}"
        )
    valid, flagged, pad = Counter(), Counter(), 0
    for bits, c in counts.counts.items():
        out = encoding.decode(bits)
        if out.kind is Outcome.VALID:
            valid[out.index] += c
        elif out.kind is Outcome.PARITY_FLAGGED:
            flagged[bits] += c
        else:
            pad += c
    return PostSelection(dict(sorted(valid.items())), dict(sorted(flagged.items())), pad)


def _neighbours(bits: str, encoding: EncodingMap):
    """Physical configurations one bit flip away from ``bits``."""
    value = int(bits, 2)
    out = []
    for j in range(encoding.q_total):
        dec = encoding.decode(format(value ^ (1 << j), f"0{encoding.q_total}b"))
        if dec.kind is Outcome.VALID:
            out.append(dec.index)
    return sorted(out)


def recover(
    flagged: dict[str, int], valid: dict[int, int], encoding: EncodingMap
) -> tuple[dict[int, int], int]:
    """Reassign each odd-parity string to its most frequent distance-1 neighbour.

    Ranking uses the valid counts as passed in (before any reassignment), ties go
    to the lowest index.  Strings whose neighbours all lie in the padding are
    dropped.  Returns the merged counts and the number of shots dropped.
    """
    merged = Counter(valid)
    dropped = 0
    for bits, c in sorted(flagged.items()):
        if encoding.decode(bits).kind is not Outcome.PARITY_FLAGGED:
            raise ValidationError(f"{bits} is not an odd-parity string")
        candidates = _neighbours(bits, encoding)
        if not candidates:
            dropped += c
            continue
        best = min(candidates, key=lambda i: (-valid.get(i, 0), i))
        merged[best] += c
    return dict(sorted(merged.items())), dropped


@dataclass(frozen=True)
class MitigationReport:
    shots: int
    retained: int
    flagged: int
    recovered: int
    discarded: int

    def to_text(self) -> str:
        return "".join(f"{k} {getattr(self, k)}\n" for k in ("shots", "retained", "flagged", "recovered", "discarded"))


def mitigate(
    counts: BitstringCounts, encoding: EncodingMap, *, recovery: bool = True
) -> tuple[dict[int, int], MitigationReport]:
    """Post-select, optionally recover, and summarise what happened to every shot."""
    sel = postselect(counts, encoding)
    n_flagged = sum(sel.flagged.values())
    retained = sum(sel.valid.values())
    valid, recovered, discarded = sel.valid, 0, sel.pad_discarded
    if recovery and n_flagged:
        valid, dropped = recover(sel.flagged, sel.valid, encoding)
        recovered = n_flagged - dropped
        discarded += dropped
    else:
        discarded += n_flagged
    report = MitigationReport(counts.shots_total, retained, n_flagged, recovered, discarded)
    return valid, report
