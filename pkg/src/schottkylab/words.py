"""Free-group words, necklace canonicalization, and conjugacy-class tables.

Conjugacy classes of a rank-r free group are cyclically reduced necklaces:
strings over the letters {-r..-1, 1..r} with no adjacent inverse pair,
including around the wrap.  The canonical representative is the
rotation-minimal string in the total letter order -r < ... < -1 < 1 < ... < r.
Inverse classes are listed separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded
from .geometry import geodesic_length_from_trace
from .schottky import SchottkyData

# memory budget for enumeration: projected number of class records
DEFAULT_CLASS_BUDGET = 5_000_000


# ---------------------------------------------------------------------------
# word primitives
# ---------------------------------------------------------------------------

def letter_key(letter: int, rank: int) -> int:
    """Order embedding of -r..-1,1..r into 0..2r-1."""
    return letter + rank if letter < 0 else letter + rank - 1


def word_key(word: tuple[int, ...], rank: int) -> tuple[int, ...]:
    return tuple(letter_key(x, rank) for x in word)


def reduce_word(word) -> tuple[int, ...]:
    """Free reduction: cancel adjacent (x, -x) pairs."""
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def invert_word(word) -> tuple[int, ...]:
    return tuple(-x for x in reversed(word))


def is_reduced(word) -> bool:
    return all(a != -b for a, b in zip(word, word[1:]))


def is_cyclically_reduced(word) -> bool:
    if not is_reduced(word):
        return False
    return len(word) < 2 or word[0] != -word[-1]


def cyclic_reduce(word) -> tuple[int, ...]:
    """Strip conjugation: a w a^-1 -> w until cyclically reduced."""
    w = list(reduce_word(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def min_rotation(word: tuple[int, ...], rank: int) -> tuple[int, ...]:
    """Rotation-minimal representative in the canonical letter order (Booth)."""
    n = len(word)
    if n <= 1:
        return word
    ss = [letter_key(x, rank) for x in word] * 2
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = ss[j]
        i = f[j - k - 1]
        while i != -1 and sj != ss[k + i + 1]:
            if sj < ss[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != ss[k + i + 1]:
            if sj < ss[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return tuple(word[(k + i) % n] for i in range(n))


def canonical_necklace(word) -> tuple[int, ...]:
    """Cyclically reduce, then take the minimal rotation."""
    w = cyclic_reduce(word)
    if not w:
        return ()
    rank = max(abs(x) for x in w)
    return min_rotation(w, rank)


def primitive_period(word: tuple[int, ...]) -> int:
    """Smallest p dividing len(word) with word = (word[:p]) repeated."""
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return p
    return n


def count_reduced_words(rank: int, n: int) -> int:
    """Number of reduced words of length n: 2r (2r-1)^(n-1)."""
    if n == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (n - 1)


def count_cyclic_strings(rank: int, n: int) -> int:
    """Cyclically reduced strings of length n (closed non-backtracking walks):
    (2r-1)^n + r + (r-1)(-1)^n."""
    q = 2 * rank - 1
    return q ** n + rank + (rank - 1) * (-1) ** n


def necklace_count(rank: int, n: int) -> int:
    """Number of length-n necklaces (Burnside over rotations of the strings)."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _phi(n // d) * count_cyclic_strings(rank, d)
    return total // n


def _phi(n: int) -> int:
    out, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            out *= (p - 1) * p ** (k - 1)
        p += 1
    if m > 1:
        out *= m - 1
    return out


# ---------------------------------------------------------------------------
# necklace enumeration (depends only on the rank; cached per (rank, n))
# ---------------------------------------------------------------------------

_NECKLACE_CACHE: dict[tuple[int, int], np.ndarray] = {}


def necklaces_array(rank: int, n: int) -> np.ndarray:
    """(N, n) int8 array of canonical necklaces of length exactly n, lex-sorted."""
    key = (rank, n)
    hit = _NECKLACE_CACHE.get(key)
    if hit is not None:
        return hit
    letters = np.array(sorted(range(-rank, 0)) + list(range(1, rank + 1)), dtype=np.int8)
    arr = letters.reshape(-1, 1)
    for _ in range(n - 1):
        blocks = []
        for v in letters:
            mask = arr[:, -1] != -v
            ext = np.empty((int(mask.sum()), arr.shape[1] + 1), dtype=np.int8)
            ext[:, :-1] = arr[mask]
            ext[:, -1] = v
            blocks.append(ext)
        arr = np.concatenate(blocks, axis=0)
    if n > 1:
        arr = arr[arr[:, 0] != -arr[:, -1]]
    assert arr.shape[0] == count_cyclic_strings(rank, n)
    keys = _key_array(arr, rank)
    arr = arr[_rotation_minimal_mask(keys)]
    keys = _key_array(arr, rank)
    order = np.lexsort(tuple(keys[:, c] for c in reversed(range(n))))
    arr = np.ascontiguousarray(arr[order])
    arr.flags.writeable = False
    _NECKLACE_CACHE[key] = arr
    return arr


def _key_array(arr: np.ndarray, rank: int) -> np.ndarray:
    return np.where(arr < 0, arr + rank, arr + rank - 1).astype(np.int8)


def _rotation_minimal_mask(keys: np.ndarray) -> np.ndarray:
    """Rows that are lexicographically <= all of their cyclic rotations."""
    n_rows, n = keys.shape
    keep = np.ones(n_rows, dtype=bool)
    for s in range(1, n):
        rolled = np.roll(keys, -s, axis=1)
        greater = np.zeros(n_rows, dtype=bool)
        less = np.zeros(n_rows, dtype=bool)
        for c in range(n):
            undecided = ~(greater | less)
            if not undecided.any():
                break
            a, b = keys[:, c], rolled[:, c]
            greater |= undecided & (a > b)
            less |= undecided & (a < b)
        keep &= ~greater
    return keep


def necklaces(rank: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Canonical necklaces of length n as tuples (thin wrapper over the array form)."""
    arr = necklaces_array(rank, n)
    return tuple(tuple(int(x) for x in row) for row in arr)


# ---------------------------------------------------------------------------
# class records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjClassRecord:
    """One conjugacy class: canonical word plus geometric data.

    length is the geodesic length 2*arccosh(|tr|/2), sign the sign of the
    SL(2, R) trace, and primitive_length = length / power is the orbit weight
    vol(Gamma_gamma \\ G_gamma).
    """

    word: tuple[int, ...]
    primitive_root: tuple[int, ...]
    power: int
    length: float
    primitive_length: float
    sign: int
    trace: float

    @property
    def weight(self) -> float:
        return self.primitive_length

    @property
    def is_primitive(self) -> bool:
        return self.power == 1

    @property
    def word_length(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class ClassTable:
    """All conjugacy classes of word length <= n_max, canonically sorted."""

    group_hash: str
    rank: int
    n_max: int
    records: tuple[ConjClassRecord, ...]

    def counts_per_length(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for rec in self.records:
            out[rec.word_length] = out.get(rec.word_length, 0) + 1
        return out

    def by_word_length(self, n: int) -> list[ConjClassRecord]:
        return [r for r in self.records if r.word_length == n]

    def primitives(self) -> list[ConjClassRecord]:
        return [r for r in self.records if r.power == 1]

    def arrays(self):
        """(lengths, primitive_lengths, signs, powers, word_lengths) arrays in table order."""
        recs = self.records
        lengths = np.array([r.length for r in recs])
        prim = np.array([r.primitive_length for r in recs])
        signs = np.array([r.sign for r in recs], dtype=float)
        powers = np.array([r.power for r in recs], dtype=int)
        wlens = np.array([r.word_length for r in recs], dtype=int)
        return lengths, prim, signs, powers, wlens

    def min_length_per_word_length(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for r in self.records:
            n = r.word_length
            if n not in out or r.length < out[n]:
                out[n] = r.length
        return out

    def length_growth_fit(self) -> tuple[float, float]:
        """Conservative linear lower bound ell >= a n + b fitted from the table.

        a is the smallest consecutive increment of the per-length minima and b
        shifts the line below every observed minimum.
        """
        mins = self.min_length_per_word_length()
        ns = sorted(mins)
        if len(ns) == 1:
            return mins[ns[0]], 0.0
        a = min((mins[n2] - mins[n1]) / (n2 - n1) for n1, n2 in zip(ns, ns[1:]))
        a = max(a, 0.0)
        b = min(mins[n] - a * n for n in ns)
        return a, b


# module-level memo so repeated evaluations share tables
_TABLE_MEMO: dict[tuple[str, int], ClassTable] = {}


def enumerate_classes(group: SchottkyData, n_max: int, *,
                      budget: int = DEFAULT_CLASS_BUDGET) -> ClassTable:
    """Build the conjugacy-class table up to word length n_max.

    One record per class; inverse classes appear separately; the primitive
    decomposition (root, power) is exact on the word level.  Records are
    sorted by (geodesic length, canonical word) so the output is deterministic
    regardless of evaluation order.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    key = (group.content_hash(), n_max)
    hit = _TABLE_MEMO.get(key)
    if hit is not None:
        return hit

    projected = sum(necklace_count(group.rank, n) for n in range(1, n_max + 1))
    if projected > budget:
        raise CapacityExceeded(
            f"projected {projected} class records exceed budget {budget} "
            f"(projection: sum over n <= n_max of necklace counts ~ (2r-1)^n / n)")

    records: list[ConjClassRecord] = []
    for n in range(1, n_max + 1):
        arr = necklaces_array(group.rank, n)
        if arr.shape[0] == 0:
            continue
        traces = _batch_traces(group, arr)
        for row, tr in zip(arr, traces):
            w = tuple(int(x) for x in row)
            length = geodesic_length_from_trace(tr)
            p = primitive_period(w)
            m = n // p
            records.append(ConjClassRecord(
                word=w,
                primitive_root=w[:p],
                power=m,
                length=length,
                primitive_length=length / m,
                sign=1 if tr >= 0 else -1,
                trace=float(tr),
            ))
    records.sort(key=lambda r: (r.length, word_key(r.word, group.rank)))
    table = ClassTable(group_hash=key[0], rank=group.rank, n_max=n_max,
                       records=tuple(records))
    _TABLE_MEMO[key] = table
    return table


def _batch_traces(group: SchottkyData, arr: np.ndarray) -> np.ndarray:
    """Traces of word matrices, via fancy-indexed stacks and log-depth products."""
    rank = group.rank
    mats_table = np.empty((2 * rank, 2, 2))
    for letter in group.letters():
        mats_table[letter_key(letter, rank)] = group.letter_matrix(letter).as_array()
    stack = mats_table[_key_array(arr, rank)]
    # No determinant renormalization here: for long words the entries are large
    # and ad - bc is dominated by cancellation noise, so "fixing" the det would
    # corrupt the product.  The trace itself is well conditioned.
    while stack.shape[1] > 1:
        k = stack.shape[1]
        if k % 2:
            last = stack[:, -1]
            stack = np.matmul(stack[:, 0:k - 1:2], stack[:, 1:k:2])
            stack[:, -1] = np.matmul(stack[:, -1], last)
        else:
            stack = np.matmul(stack[:, 0::2], stack[:, 1::2])
    return stack[:, 0, 0, 0] + stack[:, 0, 1, 1]
