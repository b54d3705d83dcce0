"""Electron-integral tables and the FCIDUMP text format."""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from subq.errors import FormatError, ValidationError

_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


@dataclass(frozen=True, eq=False)
class IntegralTable:
    """One- and two-electron integrals over spatial orbitals (Hartree).

    ``two_body[p, q, r, s]`` is the chemists'-notation integral ``(pq|rs)``.
    ``n_elec`` and ``ms2`` are carried over from an FCIDUMP header when present.
    """

    n_orb: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    n_elec: int | None = None
    ms2: int | None = None

    def __post_init__(self):
        n = self.n_orb
        if n < 1:
            raise ValidationError(f"n_orb must be positive, got {n}")
        h1 = np.asarray(self.one_body, dtype=np.float64)
        h2 = np.asarray(self.two_body, dtype=np.float64)
        if h1.shape != (n, n) or h2.shape != (n, n, n, n):
            raise ValidationError(
                f"integral shapes {h1.shape}, {h2.shape} do not match n_orb={n}"
            )
        scale = max(1.0, float(np.abs(h1).max(initial=0.0)), float(np.abs(h2).max(initial=0.0)))
        tol = 1e-10 * scale
        if np.abs(h1 - h1.T).max() > tol:
            raise ValidationError("one-body integrals are not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.abs(h2 - h2.transpose(perm)).max() > tol:
                raise ValidationError("two-body integrals lack 8-fold permutational symmetry")
        object.__setattr__(self, "one_body", h1)
        object.__setattr__(self, "two_body", h2)

    @property
    def n_alpha(self) -> int:
        return _split_electrons(self.n_elec, self.ms2)[0]

    @property
    def n_beta(self) -> int:
        return _split_electrons(self.n_elec, self.ms2)[1]


def _split_electrons(n_elec, ms2):
    if n_elec is None:
        raise ValidationError("electron count unknown; pass n_alpha/n_beta explicitly")
    ms2 = ms2 or 0
    if (n_elec + ms2) % 2 or abs(ms2) > n_elec:
        raise ValidationError(f"inconsistent NELEC={n_elec}, MS2={ms2}")
    return (n_elec + ms2) // 2, (n_elec - ms2) // 2


def random_integrals(n_orb, rng, *, scale=1.0, n_elec=None, ms2=0) -> IntegralTable:
    """Random integrals with exact permutational symmetry (synthetic test input)."""
    h1 = rng.normal(scale=scale, size=(n_orb, n_orb))
    h1 = 0.5 * (h1 + h1.T) + np.diag(scale * np.arange(n_orb, dtype=float))
    h2 = np.zeros((n_orb,) * 4)
    for p, q, r, s in _unique_quartets(n_orb):
        v = rng.normal(scale=0.3 * scale)
        if (p, q) == (r, s) and p == q:
            v = abs(v) + 0.5 * scale
        for idx in _eight(p, q, r, s):
            h2[idx] = v
    return IntegralTable(n_orb, float(rng.normal()), h1, h2, n_elec=n_elec, ms2=ms2)


def _unique_quartets(n):
    for p in range(n):
        for q in range(p + 1):
            for r in range(n):
                for s in range(r + 1):
                    if p * (p + 1) // 2 + q >= r * (r + 1) // 2 + s:
                        yield p, q, r, s


def _eight(p, q, r, s):
    return (
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    )


def parse_fcidump(stream: TextIO | str) -> IntegralTable:
    """Read an FCIDUMP file (1-based indices, chemists' notation).

    ``stream`` is an open text stream or the file contents as a string.
    Orbital-energy records (``e i 0 0 0``) are accepted and ignored.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header_lines = []
    for line in stream:
        header_lines.append(line)
        stripped = line.strip()
        if re.search(r"&END", stripped, re.I) or stripped == "/" or stripped.endswith("/"):
            break
    else:
        raise FormatError("FCIDUMP header has no '&END' or '/' terminator")
    header = " ".join(header_lines)
    if not re.search(r"&FCI", header, re.I):
        raise FormatError("FCIDUMP header must start with '&FCI'")
    fields = _header_fields(header)
    try:
        n_orb = int(fields["NORB"])
        n_elec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0"))
    except KeyError as exc:
        raise FormatError(f"FCIDUMP header is missing {exc.args[0]}") from None
    except ValueError as exc:
        raise FormatError(f"malformed FCIDUMP header value: {exc}") from None
    if n_orb < 1:
        raise FormatError(f"NORB must be positive, got {n_orb}")

    h1 = np.zeros((n_orb, n_orb))
    h2 = np.zeros((n_orb,) * 4)
    core = 0.0
    for lineno, line in enumerate(stream, start=len(header_lines) + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FormatError(f"line {lineno}: expected 'value i j k l', got {line.strip()!r}")
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse {line.strip()!r}") from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > n_orb:
            raise ValidationError(f"line {lineno}: orbital index out of range 1..{n_orb}")
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital energy
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise ValidationError(f"line {lineno}: mixed zero/nonzero indices {i} {j} {k} {l}")
        else:
            for idx in _eight(i - 1, j - 1, k - 1, l - 1):
                h2[idx] = value
    return IntegralTable(n_orb, core, h1, h2, n_elec=n_elec, ms2=ms2)


def _header_fields(header):
    body = re.sub(r"&FCI|&END|/", " ", header, flags=re.I)
    keys = list(_HEADER_KEY.finditer(body))
    fields = {}
    for m, nxt in zip(keys, keys[1:] + [None]):
        value = body[m.end(): nxt.start() if nxt else len(body)]
        fields[m.group(1).upper()] = value.strip().strip(",").split(",")[0].strip()
    return fields


def read_fcidump(path: str | os.PathLike) -> IntegralTable:
    with open(path) as fh:
        return parse_fcidump(fh)


def write_fcidump(stream: TextIO, integrals: IntegralTable, *, tol: float = 1e-14) -> None:
    """Write the unique (8-fold reduced) integrals in FCIDUMP layout."""
    n = integrals.n_orb
    n_elec = integrals.n_elec if integrals.n_elec is not None else 0
    stream.write(f" &FCI NORB={n},NELEC={n_elec},MS2={integrals.ms2 or 0},\n")
    stream.write("  ORBSYM=" + "1," * n + "\n  ISYM=1,\n &END\n")
    h1, h2 = integrals.one_body, integrals.two_body
    for p, q, r, s in _unique_quartets(n):
        if abs(h2[p, q, r, s]) > tol:
            stream.write(f"{float(h2[p, q, r, s])!r:>24} {p + 1:4d} {q + 1:4d} {r + 1:4d} {s + 1:4d}\n")
    for p in range(n):
        for q in range(p + 1):
            if abs(h1[p, q]) > tol:
                stream.write(f"{float(h1[p, q])!r:>24} {p + 1:4d} {q + 1:4d}    0    0\n")
    stream.write(f"{float(integrals.core_energy)!r:>24}    0    0    0    0\n")
