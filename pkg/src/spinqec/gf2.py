"""Dense bit-packed linear algebra over GF(2).

Matrices and vectors store their bits packed into Python integers (one
integer per row, bit j = column j), so row operations are word-parallel
XORs.  All arithmetic is mod 2.  Conversion helpers to numpy uint64 word
arrays support the bulk enumeration used by the partition-function code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1


def _parity(x: int) -> int:
    return x.bit_count() & 1


@dataclass(frozen=True)
class BinaryVector:
    """Length-n bit vector; bit j of ``bits`` is component j."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 0 or self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits do not fit in declared length")

    @classmethod
    def from_bits(cls, bit_list: Iterable[int]) -> "BinaryVector":
        bit_list = list(bit_list)
        bits = 0
        for j, b in enumerate(bit_list):
            if b & 1:
                bits |= 1 << j
        return cls(bits, len(bit_list))

    @classmethod
    def zero(cls, n: int) -> "BinaryVector":
        return cls(0, n)

    def weight(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.n

    def __xor__(self, other: "BinaryVector") -> "BinaryVector":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} != {other.n}")
        return BinaryVector(self.bits ^ other.bits, self.n)

    def bit(self, j: int) -> int:
        return (self.bits >> j) & 1

    def dot(self, other: "BinaryVector") -> int:
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} != {other.n}")
        return _parity(self.bits & other.bits)

    def support(self) -> list[int]:
        return [j for j in range(self.n) if (self.bits >> j) & 1]

    def to_array(self) -> np.ndarray:
        return np.array([(self.bits >> j) & 1 for j in range(self.n)], dtype=np.uint8)

    def lex_less(self, other: "BinaryVector") -> bool:
        """Lexicographic order reading component 0 first; 0 < 1."""
        diff = self.bits ^ other.bits
        if diff == 0:
            return False
        low = diff & (-diff)
        return (self.bits & low) == 0

    def __str__(self) -> str:
        return "".join(str(self.bit(j)) for j in range(self.n))

    def __repr__(self) -> str:
        return f"BinaryVector({self})"


class BinaryMatrix:
    """Immutable GF(2) matrix; row i packed into ``self.row_bits[i]``."""

    __slots__ = ("row_bits", "rows", "cols")

    def __init__(self, row_ints: Sequence[int], cols: int):
        self.row_bits = tuple(int(r) for r in row_ints)
        self.cols = int(cols)
        self.rows = len(self.row_bits)
        for r in self.row_bits:
            if r < 0 or r >> self.cols:
                raise ValueError("row does not fit in declared column count")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_array(cls, arr) -> "BinaryMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.uint8) & 1)
        rows = []
        for row in arr:
            bits = 0
            for j, b in enumerate(row):
                if b:
                    bits |= 1 << j
            rows.append(bits)
        return cls(rows, arr.shape[1])

    @classmethod
    def from_rows(cls, vectors: Sequence[BinaryVector]) -> "BinaryMatrix":
        if not vectors:
            raise ValueError("need at least one row (or use zeros/empty)")
        n = vectors[0].n
        return cls([v.bits for v in vectors], n)

    @classmethod
    def empty(cls, cols: int) -> "BinaryMatrix":
        return cls([], cols)

    # -- accessors ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> BinaryVector:
        return BinaryVector(self.row_bits[i], self.cols)

    def row_vectors(self) -> list[BinaryVector]:
        return [BinaryVector(r, self.cols) for r in self.row_bits]

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.row_bits)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.row_bits):
            for j in range(self.cols):
                out[i, j] = (r >> j) & 1
        return out

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(self.column_ints(), self.rows)

    def column_ints(self) -> list[int]:
        """Column j as an integer over row indices (bit i = entry (i, j))."""
        out = [0] * self.cols
        for i, r in enumerate(self.row_bits):
            bit = 1 << i
            while r:
                j = (r & -r).bit_length() - 1
                out[j] |= bit
                r &= r - 1
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryMatrix)
            and self.cols == other.cols
            and self.row_bits == other.row_bits
        )

    def __hash__(self):
        return hash((self.row_bits, self.cols))

    def __str__(self) -> str:
        return "\n".join(str(self.row(i)) for i in range(self.rows))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols})"


# -- elementary constructions ----------------------------------------------


def identity(n: int) -> BinaryMatrix:
    return BinaryMatrix([1 << i for i in range(n)], n)


def zeros(rows: int, cols: int) -> BinaryMatrix:
    return BinaryMatrix([0] * rows, cols)


def hstack(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    if a.rows != b.rows:
        raise ValueError("row count mismatch in hstack")
    return BinaryMatrix(
        [ra | (rb << a.cols) for ra, rb in zip(a.row_bits, b.row_bits)],
        a.cols + b.cols,
    )


def vstack(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    if a.cols != b.cols:
        raise ValueError("column count mismatch in vstack")
    return BinaryMatrix(list(a.row_bits) + list(b.row_bits), a.cols)


def circulant(poly: Sequence[int], n: int) -> BinaryMatrix:
    """n x n circulant whose row i is ``poly`` cyclically shifted by i.

    ``poly`` lists coefficients lowest degree first; its degree must be < n.
    """
    poly = list(poly)
    deg = max((i for i, c in enumerate(poly) if c & 1), default=0)
    if deg >= n:
        raise ValueError(f"polynomial degree {deg} must be < n = {n}")
    base = 0
    for i, c in enumerate(poly):
        if c & 1:
            base |= 1 << i
    mask = (1 << n) - 1
    rows = [((base << i) | (base >> (n - i))) & mask if i else base for i in range(n)]
    return BinaryMatrix(rows, n)


def kron(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """Kronecker product over GF(2); block (i, j) of the result is a_ij * B."""
    rows = []
    for ra in a.row_bits:
        for rb in b.row_bits:
            bits = 0
            r = ra
            while r:
                j = (r & -r).bit_length() - 1
                bits |= rb << (j * b.cols)
                r &= r - 1
            rows.append(bits)
    return BinaryMatrix(rows, a.cols * b.cols)


# -- products and inner products ---------------------------------------------


def mat_vec(m: BinaryMatrix, v: BinaryVector) -> BinaryVector:
    """m @ v^T over GF(2); result length = rows(m)."""
    if v.n != m.cols:
        raise ValueError(f"length mismatch: vector {v.n}, matrix cols {m.cols}")
    bits = 0
    for i, r in enumerate(m.row_bits):
        if _parity(r & v.bits):
            bits |= 1 << i
    return BinaryVector(bits, m.rows)


def mat_mul_t(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """a @ b^T over GF(2); entry (i, j) = <row_i(a), row_j(b)>."""
    if a.cols != b.cols:
        raise ValueError("column count mismatch")
    rows = []
    for ra in a.row_bits:
        bits = 0
        for j, rb in enumerate(b.row_bits):
            if _parity(ra & rb):
                bits |= 1 << j
        rows.append(bits)
    return BinaryMatrix(rows, b.rows)


def conjugate_vector(e: BinaryVector) -> BinaryVector:
    """Swap the left and right halves of a length-2n vector."""
    if e.n % 2:
        raise ValueError("conjugate needs even length")
    n = e.n // 2
    mask = (1 << n) - 1
    return BinaryVector(((e.bits & mask) << n) | (e.bits >> n), e.n)


def conjugate(m: BinaryMatrix) -> BinaryMatrix:
    """Swap the left and right n-column halves of a 2n-column matrix."""
    if m.cols % 2:
        raise ValueError("conjugate needs an even column count")
    n = m.cols // 2
    mask = (1 << n) - 1
    return BinaryMatrix(
        [((r & mask) << n) | (r >> n) for r in m.row_bits], m.cols
    )


def trace_inner(e1: BinaryVector, e2: BinaryVector) -> int:
    """Symplectic (trace) inner product u1.v2 + v1.u2 mod 2 for e = (v|u)."""
    if e1.n != e2.n:
        raise ValueError(f"length mismatch: {e1.n} != {e2.n}")
    if e1.n % 2:
        raise ValueError("trace inner product needs even length")
    return e1.dot(conjugate_vector(e2))


# -- elimination -------------------------------------------------------------


def rref(m: BinaryMatrix) -> tuple[BinaryMatrix, int, list[int]]:
    """Reduced row-echelon form.

    Returns:
        (R, rank, pivot_cols) with R the fully reduced form (zero rows kept
        at the bottom) and pivot_cols the pivot column indices in order.
    """
    rows = list(m.row_bits)
    nrows = len(rows)
    pivots: list[int] = []
    r = 0
    for col in range(m.cols):
        if r >= nrows:
            break
        sel = 1 << col
        pivot = next((i for i in range(r, nrows) if rows[i] & sel), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(nrows):
            if i != r and rows[i] & sel:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
    return BinaryMatrix(rows, m.cols), r, pivots


def rank(m: BinaryMatrix) -> int:
    return rref(m)[1]


def row_basis(m: BinaryMatrix) -> BinaryMatrix:
    """Independent rows spanning the row space, in echelon order."""
    r, rk, _ = rref(m)
    return BinaryMatrix(r.row_bits[:rk], m.cols)


def nullspace(m: BinaryMatrix) -> BinaryMatrix:
    """Basis (rows) of {x : m x^T = 0}; may have zero rows."""
    r, rk, pivots = rref(m)
    pivot_set = set(pivots)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        bits = 1 << f
        for i, c in enumerate(pivots):
            if (r.row_bits[i] >> f) & 1:
                bits |= 1 << c
        basis.append(bits)
    return BinaryMatrix(basis, m.cols)


def exact_dual(m: BinaryMatrix) -> BinaryMatrix:
    """Full-row-rank M* with M (M*)^T = 0 and rank M* = cols - rank M."""
    if m.cols == 0:
        raise ValueError("exact_dual needs a nonempty matrix")
    return nullspace(m)


def solve(m: BinaryMatrix, s: BinaryVector) -> Optional[BinaryVector]:
    """One particular solution x of m x^T = s, or None when inconsistent."""
    if s.n != m.rows:
        raise ValueError(f"syndrome length {s.n} != rows {m.rows}")
    aug_col = 1 << m.cols
    rows = [r | (aug_col if s.bit(i) else 0) for i, r in enumerate(m.row_bits)]
    nrows = len(rows)
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(m.cols):
        if r >= nrows:
            break
        sel = 1 << col
        pivot = next((i for i in range(r, nrows) if rows[i] & sel), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(nrows):
            if i != r and rows[i] & sel:
                rows[i] ^= rows[r]
        pivots.append((r, col))
        r += 1
    mask = aug_col - 1
    for i in range(r, nrows):
        if rows[i] & aug_col and not (rows[i] & mask):
            return None
    bits = 0
    for i, col in pivots:
        if rows[i] & aug_col:
            bits |= 1 << col
    return BinaryVector(bits, m.cols)


class RowReducer:
    """Reduces vectors modulo a fixed row space; reusable across many calls."""

    def __init__(self, m: BinaryMatrix):
        r, rk, pivots = rref(m)
        self.cols = m.cols
        self._rows = r.row_bits[:rk]
        self._pivots = pivots

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce_bits(self, bits: int) -> int:
        for row, col in zip(self._rows, self._pivots):
            if (bits >> col) & 1:
                bits ^= row
        return bits

    def reduce(self, v: BinaryVector) -> BinaryVector:
        if v.n != self.cols:
            raise ValueError("length mismatch")
        return BinaryVector(self.reduce_bits(v.bits), self.cols)

    def contains(self, v: BinaryVector) -> bool:
        return self.reduce(v).bits == 0


def invert(m: BinaryMatrix) -> BinaryMatrix:
    """Inverse of a square full-rank GF(2) matrix."""
    if m.rows != m.cols:
        raise ValueError("invert needs a square matrix")
    n = m.rows
    aug = BinaryMatrix(
        [r | (1 << (n + i)) for i, r in enumerate(m.row_bits)], 2 * n
    )
    red, rk, pivots = rref(aug)
    if rk != n or pivots != list(range(n)):
        raise ValueError("matrix is singular over GF(2)")
    return BinaryMatrix([r >> n for r in red.row_bits[:n]], n)


# -- packed word enumeration --------------------------------------------------


def n_words(nbits: int) -> int:
    return max(1, (nbits + WORD_BITS - 1) // WORD_BITS)


def int_to_words(x: int, nwords: int) -> np.ndarray:
    return np.array(
        [(x >> (WORD_BITS * i)) & _WORD_MASK for i in range(nwords)],
        dtype=np.uint64,
    )


def ints_to_words(xs: Sequence[int], nbits: int) -> np.ndarray:
    w = n_words(nbits)
    out = np.empty((len(xs), w), dtype=np.uint64)
    for i, x in enumerate(xs):
        out[i] = int_to_words(x, w)
    return out


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Bit count per row of a (..., W) uint64 array."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def span_table(gen_words: np.ndarray) -> np.ndarray:
    """All 2^r XOR combinations of the r generator rows, by index doubling.

    Element i is the XOR of generators at the set bits of i, so generator 0
    varies fastest.
    """
    r = gen_words.shape[0]
    w = gen_words.shape[1] if gen_words.ndim == 2 else 1
    table = np.zeros((1 << r, w), dtype=np.uint64)
    for i in range(r):
        half = 1 << i
        table[half : 2 * half] = table[:half] ^ gen_words[i]
    return table


class CosetTable:
    """Repeated weight scans over {shift ^ span(generators)}.

    Generators are ordered low-to-high index significance; the last
    ``class_gens`` generators define a class label = element_index >> r0
    where r0 = len(generators) - class_gens.  Intended use: r0 spans the
    degeneracy group, class generators span logical representatives, and
    one scan yields per-class weight histograms.
    """

    _PAD = 256  # histogram stride; requires nbits < 256

    def __init__(
        self,
        gen_ints: Sequence[int],
        nbits: int,
        class_gens: int = 0,
        max_log2: int = 24,
    ):
        if nbits >= self._PAD:
            raise ValueError("CosetTable supports < 256 bond bits")
        self.n_gens = len(gen_ints)
        if self.n_gens > max_log2:
            raise BudgetExceededError(
                f"coset enumeration needs 2^{self.n_gens} elements "
                f"(budget 2^{max_log2})"
            )
        self.nbits = nbits
        self.class_gens = class_gens
        self.rank_gens = self.n_gens - class_gens
        self.size = 1 << self.n_gens
        self.n_classes = 1 << class_gens
        self._words = span_table(ints_to_words(list(gen_ints), nbits))
        self._flat = self._words[:, 0] if self._words.shape[1] == 1 else None
        if class_gens:
            idx = np.arange(self.size, dtype=np.int64) >> self.rank_gens
            self._class_key = (idx * self._PAD).astype(np.int64)
        else:
            self._class_key = None

    def weights(self, shift: int = 0) -> np.ndarray:
        """Weight of every element of the shifted span, in index order."""
        if self._flat is not None:
            sw = np.uint64(shift)
            return np.bitwise_count(self._flat ^ sw).astype(np.int64)
        sw = int_to_words(shift, self._words.shape[1])
        return popcount_words(self._words ^ sw)

    def class_histograms(self, shift: int = 0) -> np.ndarray:
        """(n_classes, nbits + 1) counts of element weights per class."""
        w = self.weights(shift)
        if self._class_key is None:
            hist = np.bincount(w, minlength=self._PAD)
            return hist[np.newaxis, : self.nbits + 1].astype(np.int64)
        keys = self._class_key + w
        hist = np.bincount(keys, minlength=self.n_classes * self._PAD)
        return hist.reshape(self.n_classes, self._PAD)[:, : self.nbits + 1]


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed the configured budget."""


# -- coset minimum weight -----------------------------------------------------


def _lex_min_int(a: int, b: int) -> int:
    diff = a ^ b
    if diff == 0:
        return a
    low = diff & (-diff)
    return a if (a & low) == 0 else b


def coset_min_weight(
    v: BinaryVector,
    g: BinaryMatrix,
    cap: Optional[int] = None,
    budget_log2: int = 24,
    isd_iters: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> tuple[int, bool]:
    """Minimum weight over the coset v + rowspace(g).

    Exact (full enumeration via Gray-order span) when 2^rank(g) fits the
    budget; otherwise randomized information-set sampling with a fixed
    iteration count and ``exact=False``.  ``cap`` lets the randomized
    search stop early once an element of weight <= cap is found.

    Returns:
        (weight, exact)
    """
    w, _, exact = coset_min_rep(v, g, cap, budget_log2, isd_iters, rng)
    return w, exact


def coset_min_rep(
    v: BinaryVector,
    g: BinaryMatrix,
    cap: Optional[int] = None,
    budget_log2: int = 24,
    isd_iters: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> tuple[int, BinaryVector, bool]:
    """Like coset_min_weight but also returns the minimizing element.

    Ties are broken by the lexicographically smallest bit vector.
    """
    if v.n != g.cols:
        raise ValueError(f"length mismatch: vector {v.n}, matrix cols {g.cols}")
    basis = row_basis(g)
    if basis.rows <= budget_log2:
        return _coset_min_exact(v, basis)
    return _coset_min_isd(v, basis, cap, isd_iters, rng)


def _coset_min_exact(v: BinaryVector, basis: BinaryMatrix):
    gens = list(basis.row_bits)
    chunk = 18
    low, high = gens[:chunk], gens[chunk:]
    low_words = span_table(ints_to_words(low, v.n)) if low else None
    best_w = v.weight() + 1
    best_bits = 0
    for h in range(1 << len(high)):
        shift = v.bits
        hh = h
        for i, gbit in enumerate(high):
            if (hh >> i) & 1:
                shift ^= gbit
        if low_words is None:
            w = shift.bit_count()
            if w < best_w or (w == best_w and _lex_min_int(best_bits, shift) != best_bits):
                if w < best_w:
                    best_w, best_bits = w, shift
                else:
                    best_bits = _lex_min_int(best_bits, shift)
            continue
        sw = int_to_words(shift, low_words.shape[1])
        wts = popcount_words(low_words ^ sw)
        local = int(wts.min())
        if local > best_w:
            continue
        for idx in np.flatnonzero(wts == local):
            bits = shift
            ii = int(idx)
            for i, gbit in enumerate(low):
                if (ii >> i) & 1:
                    bits ^= gbit
            if local < best_w:
                best_w, best_bits = local, bits
            else:
                best_bits = _lex_min_int(best_bits, bits)
    return best_w, BinaryVector(best_bits, v.n), True


def _coset_min_isd(v, basis, cap, iters, rng):
    if rng is None:
        rng = np.random.default_rng(0)
    n = v.n
    best_bits = v.bits
    best_w = v.weight()
    cols = list(range(n))
    for _ in range(iters):
        rng.shuffle(cols)
        rows = list(basis.row_bits)
        cand = v.bits
        r = 0
        for col in cols:
            if r >= len(rows):
                break
            sel = 1 << col
            pivot = next((i for i in range(r, len(rows)) if rows[i] & sel), None)
            if pivot is None:
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            for i in range(len(rows)):
                if i != r and rows[i] & sel:
                    rows[i] ^= rows[r]
            if cand & sel:
                cand ^= rows[r]
            r += 1
        w = cand.bit_count()
        if w < best_w or (w == best_w and _lex_min_int(best_bits, cand) != best_bits):
            if w < best_w:
                best_w, best_bits = w, cand
            else:
                best_bits = _lex_min_int(best_bits, cand)
        if cap is not None and best_w <= cap:
            break
    return best_w, BinaryVector(best_bits, n), False
