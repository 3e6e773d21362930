"""Stabilizer-tableau backend for graph states and their networks.

A pure ``n``-qubit stabilizer state is stored as ``n`` commuting, independent
Hermitian Pauli generators. Each generator is a row ``(x, z, sign)`` where
``x`` and ``z`` are Python-int bitmasks (bit ``q`` belongs to qubit ``q``) and
``sign`` is 0 for ``+`` and 1 for ``-``. A qubit with both bits set carries
``Y``. Row operations are XORs over the packed masks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuits import Gate, Graph
from .errors import ContractionError, ValidationError

Row = tuple  # (x: int, z: int, sign: int)


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _anticommute(r1: Row, r2: Row) -> bool:
    return _popcount((r1[0] & r2[1]) ^ (r1[1] & r2[0])) & 1 == 1


def pauli_product(r1: Row, r2: Row) -> Row:
    """Product ``r1 * r2`` of two commuting Hermitian Paulis, sign tracked."""
    x1, z1, s1 = r1
    x2, z2, s2 = r2
    ys, xs, zs = x1 & z1, x1 & ~z1, ~x1 & z1
    # per-qubit exponent of i picked up when reordering into canonical form
    plus = (ys & ~x2 & z2) | (xs & x2 & z2) | (zs & x2 & ~z2)
    minus = (ys & x2 & ~z2) | (xs & ~x2 & z2) | (zs & x2 & z2)
    phase = (2 * s1 + 2 * s2 + _popcount(plus) - _popcount(minus)) % 4
    if phase & 1:
        raise ValidationError("product of anticommuting Paulis is not Hermitian")
    return (x1 ^ x2, z1 ^ z2, phase >> 1)


def parse_pauli(text: str) -> Row:
    """Parse ``"+XZI"``-style strings (leftmost letter is qubit 0)."""
    sign = 0
    if text[:1] in "+-":
        sign, text = int(text[0] == "-"), text[1:]
    x = z = 0
    for q, c in enumerate(text):
        if c in "XY":
            x |= 1 << q
        if c in "ZY":
            z |= 1 << q
        if c not in "IXYZ":
            raise ValidationError(f"bad Pauli letter {c!r}")
    return (x, z, sign)


def format_pauli(row: Row, n: int) -> str:
    x, z, s = row
    letters = "".join("IXZY"[(x >> q & 1) | ((z >> q & 1) << 1)] for q in range(n))
    return ("-" if s else "+") + letters


def _drop_bits(v: int, positions: Sequence[int]) -> int:
    for p in sorted(positions, reverse=True):
        v = (v & ((1 << p) - 1)) | ((v >> (p + 1)) << p)
    return v


def _symplectic(row: Row, n: int) -> int:
    # interleave so pivots run qubit by qubit: X_q at bit 2q, Z_q at bit 2q+1
    x, z, _ = row
    out = 0
    for q in range(n):
        out |= ((x >> q & 1) << (2 * q)) | ((z >> q & 1) << (2 * q + 1))
    return out


def _canonical_rows(rows: list, n: int) -> list:
    """Gauss-Jordan reduction with sign tracking; zero rows are returned as-is at the end."""
    rows = list(rows)
    keys = [_symplectic(r, n) for r in rows]
    pivot_row = 0
    for bit in range(2 * n):
        m = 1 << bit
        sel = next((i for i in range(pivot_row, len(rows)) if keys[i] & m), None)
        if sel is None:
            continue
        rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
        keys[pivot_row], keys[sel] = keys[sel], keys[pivot_row]
        for i in range(len(rows)):
            if i != pivot_row and keys[i] & m:
                rows[i] = pauli_product(rows[i], rows[pivot_row])
                keys[i] ^= keys[pivot_row]
        pivot_row += 1
    return rows


@dataclass(frozen=True)
class StabilizerTableau:
    n_qubits: int
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        return cls(n, tuple((0, 1 << q, 0) for q in range(n)))

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "StabilizerTableau":
        strings = list(strings)
        n = len(strings[0].lstrip("+-")) if strings else 0
        return cls(n, tuple(parse_pauli(s) for s in strings))

    def to_strings(self) -> list[str]:
        return [format_pauli(r, self.n_qubits) for r in self.rows]

    def dump(self) -> str:
        """One generator per line, canonical order."""
        return "\n".join(canonicalize(self).to_strings())

    def check(self) -> None:
        """Raise ValidationError unless rows commute, are independent and consistent."""
        n = self.n_qubits
        if len(self.rows) != n:
            raise ValidationError(f"{len(self.rows)} generators for {n} qubits")
        full = (1 << n) - 1
        for r in self.rows:
            if r[0] & ~full or r[1] & ~full:
                raise ValidationError("generator acts outside the register")
        for i, r in enumerate(self.rows):
            for r2 in self.rows[i + 1:]:
                if _anticommute(r, r2):
                    raise ValidationError("generators do not commute")
        for r in _canonical_rows(list(self.rows), n):
            if r[0] == 0 and r[1] == 0:
                raise ValidationError("generators are dependent" + (" and imply -1" if r[2] else ""))


def canonicalize(t: StabilizerTableau) -> StabilizerTableau:
    """Reduced row echelon form over qubit-major (X_q, Z_q) pivots."""
    return StabilizerTableau(t.n_qubits, tuple(_canonical_rows(list(t.rows), t.n_qubits)))


def from_graph(g: Graph) -> StabilizerTableau:
    """Generator ``i`` is X on vertex ``i`` and Z on each neighbour."""
    rows = []
    for v in range(g.n_vertices):
        z = 0
        for u in g.neighbors(v):
            z |= 1 << u
        rows.append((1 << v, z, 0))
    return StabilizerTableau(g.n_vertices, tuple(rows))


def _conjugate(row: Row, gate: Gate) -> Row:
    x, z, s = row
    if gate.kind == "CZ":
        a, b = gate.targets
        xa, xb, za, zb = x >> a & 1, x >> b & 1, z >> a & 1, z >> b & 1
        s ^= xa & xb & (za ^ zb)
        z ^= (xb << a) | (xa << b)
        return (x, z, s)
    (q,) = gate.targets
    xq, zq = x >> q & 1, z >> q & 1
    if gate.kind == "H":
        s ^= xq & zq
        x = (x & ~(1 << q)) | (zq << q)
        z = (z & ~(1 << q)) | (xq << q)
    elif gate.kind == "S":
        s ^= xq & zq
        z ^= xq << q
    elif gate.kind == "X":
        s ^= zq
    elif gate.kind == "Z":
        s ^= xq
    else:
        raise ValueError(f"{gate.kind} is not a supported Clifford gate")
    return (x, z, s)


def apply_clifford(t: StabilizerTableau, gate: Gate) -> StabilizerTableau:
    if gate.kind not in ("H", "CZ", "S", "X", "Z"):
        raise ValueError(f"{gate.kind} is not a supported Clifford gate")
    if any(not 0 <= q < t.n_qubits for q in gate.targets):
        raise ValueError(f"gate {gate} acts outside {t.n_qubits} qubits")
    return StabilizerTableau(t.n_qubits, tuple(_conjugate(r, gate) for r in t.rows))


def entanglement_entropy(t: StabilizerTableau, region: Iterable[int]) -> int:
    """Entropy in bits of ``region``: ``|A| - dim`` of the subgroup supported on A.

    The supported subgroup has dimension ``n - rank(generators restricted to the
    complement)``; the rank is computed by XOR elimination on packed rows.
    """
    n = t.n_qubits
    region = set(int(q) for q in region)
    if any(not 0 <= q < n for q in region):
        raise ValueError(f"region {sorted(region)} outside {n} qubits")
    comp = ((1 << n) - 1) & ~sum(1 << q for q in region)
    basis: dict[int, int] = {}
    for x, z, _ in t.rows:
        v = (x & comp) | ((z & comp) << n)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    supported = n - len(basis)
    return len(region) - supported


def _group_sign(rows: list, p: Row, n: int):
    """Sign of ``p`` within the group generated by ``rows``; None if not in the group."""
    target = _symplectic(p, n)
    # basis entries: pivot bit -> (key, generator-index mask)
    basis: dict[int, tuple] = {}
    for i, r in enumerate(rows):
        key, combo = _symplectic(r, n), 1 << i
        while key:
            top = key.bit_length() - 1
            if top not in basis:
                basis[top] = (key, combo)
                break
            key ^= basis[top][0]
            combo ^= basis[top][1]
    combo = 0
    key = target
    while key:
        top = key.bit_length() - 1
        if top not in basis:
            return None
        key ^= basis[top][0]
        combo ^= basis[top][1]
    prod = (0, 0, 0)
    for i, r in enumerate(rows):
        if combo >> i & 1:
            prod = pauli_product(prod, r)
    return prod[2]


def postselect_pauli(rows: list, p: Row, n: int, link=None) -> list:
    """Project onto the +1 eigenspace of ``p`` (outcome forced, state renormalized)."""
    anti = [i for i, r in enumerate(rows) if _anticommute(r, p)]
    if not anti:
        sign = _group_sign(rows, p, n)
        if sign is None:
            raise ValidationError("tableau is not a complete stabilizer state")
        if sign != p[2]:
            raise ContractionError(
                f"post-selection on {format_pauli(p, n)} has zero probability", link=link)
        return rows
    k = anti[0]
    rows = list(rows)
    for i in anti[1:]:
        rows[i] = pauli_product(rows[i], rows[k])
    rows[k] = p
    return rows


def postselect_bell(t: StabilizerTableau, a: int, b: int) -> StabilizerTableau:
    """Project qubits ``a, b`` onto ``(|00> + |11>)/sqrt(2)`` and remove them.

    Remaining qubits keep their relative order. The success probability is
    discarded (the result is renormalized).
    """
    n = t.n_qubits
    if a == b:
        raise ValueError("Bell post-selection needs two distinct qubits")
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"qubits ({a}, {b}) outside {n} qubits")
    xx = ((1 << a) | (1 << b), 0, 0)
    zz = (0, (1 << a) | (1 << b), 0)
    rows = postselect_pauli(list(t.rows), xx, n, link=(a, b))
    rows = postselect_pauli(rows, zz, n, link=(a, b))
    cleared = []
    for r in rows:
        if r[0] >> a & 1:
            r = pauli_product(r, xx)
        if r[1] >> a & 1:
            r = pauli_product(r, zz)
        # commuting with XX and ZZ forces the b part to vanish as well
        if (r[0] | r[1]) >> b & 1:
            raise ValidationError("tableau lost commutation during post-selection")
        cleared.append((_drop_bits(r[0], (a, b)), _drop_bits(r[1], (a, b)), r[2]))
    m = n - 2
    reduced = _canonical_rows(cleared, m)
    kept = [r for r in reduced if r[0] or r[1]]
    if any(r[2] for r in reduced if not (r[0] or r[1])):
        raise ContractionError("post-selection produced the -1 stabilizer", link=(a, b))
    if len(kept) != m:
        raise ValidationError(f"expected {m} generators after post-selection, got {len(kept)}")
    return StabilizerTableau(m, tuple(kept))


def tensor(*tabs: StabilizerTableau) -> StabilizerTableau:
    """Tensor product; qubits of later factors follow those of earlier ones."""
    rows, offset = [], 0
    for t in tabs:
        rows += [(x << offset, z << offset, s) for x, z, s in t.rows]
        offset += t.n_qubits
    return StabilizerTableau(offset, tuple(rows))


def bell_pair() -> StabilizerTableau:
    return StabilizerTableau.from_strings(["+XX", "+ZZ"])


def permute(t: StabilizerTableau, order: Sequence[int]) -> StabilizerTableau:
    """New tableau whose qubit ``i`` is old qubit ``order[i]``."""
    if sorted(order) != list(range(t.n_qubits)):
        raise ValueError("order must be a permutation of all qubits")

    def move(v):
        out = 0
        for new, old in enumerate(order):
            out |= (v >> old & 1) << new
        return out

    return StabilizerTableau(t.n_qubits, tuple((move(x), move(z), s) for x, z, s in t.rows))


def pauli_apply(row: Row, psi: np.ndarray, n: int) -> np.ndarray:
    """Apply a Pauli row to a dense vector (qubit 0 is the most significant bit)."""
    x, z, s = row
    idx = np.arange(1 << n)
    xmask = sum(1 << (n - 1 - q) for q in range(n) if x >> q & 1)
    zmask = sum(1 << (n - 1 - q) for q in range(n) if z >> q & 1)
    ny = _popcount(x & z)
    # P = (-1)^s i^ny X^x Z^z  (Y = i X Z)
    zpar = np.array([_popcount(i & zmask) & 1 for i in idx])
    phase = (-1) ** s * (1j) ** ny * (1 - 2 * zpar)
    out = np.zeros_like(psi)
    out[idx ^ xmask] = phase * psi
    return out


def to_statevector(t: StabilizerTableau) -> np.ndarray:
    """Dense state (up to global phase) stabilized by every generator."""
    n = t.n_qubits
    if n > 14:
        raise ValueError("dense expansion is capped at 14 qubits")
    for k in range(1 << n):
        psi = np.zeros(1 << n, dtype=complex)
        psi[k] = 1.0
        for r in t.rows:
            psi = (psi + pauli_apply(r, psi, n)) / 2
        norm = np.linalg.norm(psi)
        if norm > 1e-6:
            psi = psi / norm
            j = np.argmax(np.abs(psi) > 1e-9)
            return psi * (abs(psi[j]) / psi[j])
    raise ValidationError("generators stabilize no state")
