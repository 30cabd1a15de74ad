"""Encoding codes: permutations assigning Fock index i to basis word c_i."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

EXHAUSTIVE_MAX_QUBITS = 3


@dataclass(frozen=True)
class Code:
    words: tuple[int, ...]

    def __init__(self, words: Iterable[int]):
        words = tuple(int(w) for w in words)
        size = len(words)
        if size < 2 or size & (size - 1):
            raise ValueError(f"code length {size} is not a power of two >= 2")
        if sorted(words) != list(range(size)):
            raise ValueError("code words must be a permutation of 0..2^n-1")
        object.__setattr__(self, "words", words)

    @property
    def n(self) -> int:
        return len(self.words).bit_length() - 1

    def __len__(self):
        return len(self.words)

    def __getitem__(self, i):
        return self.words[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.words)

    def __repr__(self):
        return f"Code({list(self.words)})"


@dataclass(frozen=True)
class CodeClass:
    is_unit_distance: bool
    kfold_for: frozenset[int]


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


def binary(n: int) -> Code:
    return Code(range(1 << n))


def unrank(n: int, index: int) -> Code:
    """The ``index``-th permutation of ``0..2^n-1`` in dictionary order."""
    size = 1 << n
    if not 0 <= index < math.factorial(size):
        raise ValueError(f"index {index} outside [0, {size}!)")
    pool = list(range(size))
    words = []
    for pos in range(size - 1, -1, -1):
        digit, index = divmod(index, math.factorial(pos))
        words.append(pool.pop(digit))
    return Code(words)


def rank(code: Code | Sequence[int]) -> int:
    words = list(code)
    pool = sorted(words)
    r = 0
    for pos, w in enumerate(words):
        digit = pool.index(w)
        r += digit * math.factorial(len(words) - 1 - pos)
        pool.pop(digit)
    return r


def gray(n: int) -> Code:
    """Reflected Gray code, grown by prefixing 0 to G_{n-1} and 1 to its reverse."""
    if n < 1:
        raise ValueError("gray code needs n >= 1")
    seq = [0, 1]
    for width in range(1, n):
        top = 1 << width
        seq = seq + [top | w for w in reversed(seq)]
    return Code(seq)


def is_kfold(code: Code | Sequence[int], k: int) -> bool:
    words = list(code)
    if not 1 <= k < len(words):
        raise ValueError(f"stride k={k} out of range")
    return all(hamming(words[i], words[i + k]) == 1 for i in range(len(words) - k))


def is_unit_distance(code: Code | Sequence[int]) -> bool:
    return is_kfold(code, 1)


def classify(code: Code) -> CodeClass:
    ks = frozenset(k for k in range(1, len(code)) if is_kfold(code, k))
    return CodeClass(is_unit_distance=1 in ks, kfold_for=ks)


def iter_codes(n: int) -> Iterator[tuple[int, ...]]:
    """All codes over n qubits in dictionary order (``C_n^[0]`` first)."""
    return itertools.permutations(range(1 << n))


def count_unit_distance(n: int) -> int:
    if not 1 <= n <= EXHAUSTIVE_MAX_QUBITS:
        raise ValueError(f"exhaustive count only supported for 1 <= n <= {EXHAUSTIVE_MAX_QUBITS}")
    return sum(1 for words in iter_codes(n) if is_kfold(words, 1))


class SearchStatus(enum.Enum):
    FOUND = "found"
    ABSENT = "absent"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class KFoldResult:
    status: SearchStatus
    code: Code | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND


def find_kfold(
    n: int,
    k: int,
    node_budget: int | None = 2_000_000,
    seeds: Iterable[Sequence[int]] | None = None,
) -> KFoldResult:
    """Depth-first search for a k-fold code, lowest word first.

    ``seeds`` are checked before searching; by default the binary and Gray
    codes. Pass ``seeds=()`` to get the dictionary-first k-fold code. With
    ``node_budget=None`` the search is exhaustive and ABSENT is a proof.
    """
    size = 1 << n
    if not 1 <= k < size:
        raise ValueError(f"stride k={k} out of range for n={n}")
    if seeds is None:
        seeds = (range(size), gray(n).words)
    for s in seeds:
        if is_kfold(s, k):
            return KFoldResult(SearchStatus.FOUND, Code(s), 0)

    flips = [1 << b for b in range(n)]
    words = [0] * size
    used = [False] * size
    nodes = 0

    def candidates(pos: int) -> list[int]:
        if pos < k:
            return [w for w in range(size) if not used[w]]
        prev = words[pos - k]
        return sorted(prev ^ f for f in flips if not used[prev ^ f])

    def stranded(end: int) -> bool:
        # unit-distance paths only: an unused word with at most one free
        # neighbour must be the final word, so two of them (or one with none) is fatal
        forced = 0
        for w in range(size):
            if used[w]:
                continue
            free = sum(1 for f in flips if not used[w ^ f] or w ^ f == end)
            if free <= 1:
                forced += 1
                # words alternate weight parity, so the last word's parity is fixed by the first
                last_parity = (bin(words[0]).count("1") + 1) & 1
                if free == 0 or forced > 1 or bin(w).count("1") & 1 != last_parity:
                    return True
        # every unused word must stay reachable from the path end
        seen = {end}
        frontier = [end]
        while frontier:
            w = frontier.pop()
            for f in flips:
                v = w ^ f
                if not used[v] and v not in seen:
                    seen.add(v)
                    frontier.append(v)
        return len(seen) - 1 < size - 1 - pos

    # explicit stack of candidate iterators keeps deep searches off the recursion limit
    stack = [iter(candidates(0))]
    pos = 0
    while stack:
        it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            pos -= 1
            if pos >= 0:
                used[words[pos]] = False
            continue
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            return KFoldResult(SearchStatus.BUDGET_EXHAUSTED, None, nodes - 1)
        words[pos] = nxt
        used[nxt] = True
        if pos == size - 1:
            return KFoldResult(SearchStatus.FOUND, Code(words), nodes)
        if k == 1 and stranded(nxt):
            used[nxt] = False
            continue
        pos += 1
        stack.append(iter(candidates(pos)))
    return KFoldResult(SearchStatus.ABSENT, None, nodes)


def first_unit_distance(n: int) -> Code:
    """``D_n^[0]``: the first code in dictionary order with unit consecutive distance."""
    res = find_kfold(n, 1, node_budget=None, seeds=())
    assert res.code is not None
    return res.code


def _shape_ok(group: Sequence[int], fixed: int, free: int) -> bool:
    for a, b in zip(group, group[1:]):
        diff = a ^ b
        if bin(diff & free).count("1") != 1 or bin(diff & fixed).count("1") > 1:
            return False
    return True


def group_shape_witness(n: int, xi: int) -> list[tuple[int, ...]] | None:
    """Per residue group, the first fixed-bit set F that gives a Gray code shape."""
    if not 0 <= xi <= n - 1:
        raise ValueError(f"xi={xi} outside [0, {n - 1}]")
    words = gray(n).words
    stride = 1 << xi
    full = (1 << n) - 1
    subsets = list(itertools.combinations(range(n), xi))
    witnesses = []
    for r in range(stride):
        group = words[r::stride]
        for bits in subsets:
            fixed = sum(1 << b for b in bits)
            if _shape_ok(group, fixed, full & ~fixed):
                witnesses.append(bits)
                break
        else:
            return None
    return witnesses


def gray_group_shape(n: int, xi: int) -> bool:
    """True iff every stride-2^xi group of G_n has the Gray code shape."""
    return group_shape_witness(n, xi) is not None
