"""Designated languages as DFAs, their syntactic monoids, and the two-letter code.

Words are tuples of symbols.  Symbols are strings (``"a"``, ``"x^"``,
``"x_"``), so anything iterable over symbols works as a word; a plain
``str`` is read character by character.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

POSITIVE = "positive"
EPSILON = "epsilon"
LANG_MODES = (POSITIVE, EPSILON)

Word = tuple[str, ...]


def as_word(w: Iterable[str]) -> Word:
    return tuple(w)


def words_upto(alphabet: Sequence[str], max_len: int, min_len: int = 0) -> Iterator[Word]:
    """All words of length ``min_len..max_len`` in length-lexicographic order."""
    layer: list[Word] = [()]
    for n in range(max_len + 1):
        if n >= min_len:
            yield from layer
        if n < max_len:
            layer = [w + (a,) for w in layer for a in alphabet]


@dataclass(frozen=True)
class Dfa:
    alphabet: tuple[str, ...]
    state_count: int
    start: int
    accepting: frozenset[int]
    delta: tuple[tuple[int, ...], ...]
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if len(set(alphabet)) != len(alphabet) or any(not a for a in alphabet):
            raise ValueError("alphabet symbols must be distinct non-empty strings")
        delta = tuple(tuple(row) for row in self.delta)
        if len(delta) != self.state_count or self.state_count < 1:
            raise ValueError("delta must have one row per state")
        for row in delta:
            if len(row) != len(alphabet):
                raise ValueError("delta is not total")
            if any(not 0 <= t < self.state_count for t in row):
                raise ValueError("transition target out of range")
        if not 0 <= self.start < self.state_count:
            raise ValueError("start state out of range")
        accepting = frozenset(self.accepting)
        if any(not 0 <= q < self.state_count for q in accepting):
            raise ValueError("accepting state out of range")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "accepting", accepting)
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(alphabet)})

    def symbol_index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} is not in the alphabet") from None

    def step(self, state: int, symbol: str) -> int:
        return self.delta[state][self.symbol_index(symbol)]

    def run(self, word: Iterable[str], state: int | None = None) -> int:
        q = self.start if state is None else state
        for a in word:
            q = self.delta[q][self.symbol_index(a)]
        return q

    def accepts(self, word: Iterable[str]) -> bool:
        return self.run(word) in self.accepting

    def reachable(self) -> list[int]:
        seen = {self.start}
        order = [self.start]
        for q in order:
            for t in self.delta[q]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        return order

    def minimize(self) -> "Dfa":
        """Minimal equivalent DFA, states renumbered in BFS order from start."""
        states = self.reachable()
        k = len(self.alphabet)
        block = {q: int(q in self.accepting) for q in states}
        while True:
            sig = {q: (block[q],) + tuple(block[self.delta[q][a]] for a in range(k)) for q in states}
            ids: dict[tuple, int] = {}
            new = {q: ids.setdefault(sig[q], len(ids)) for q in states}
            if len(ids) == len(set(block.values())):
                block = new
                break
            block = new
        # canonical numbering by BFS over blocks
        order = {block[self.start]: 0}
        queue = deque([self.start])
        rep = {block[self.start]: self.start}
        while queue:
            q = queue.popleft()
            for a in range(k):
                t = self.delta[q][a]
                if block[t] not in order:
                    order[block[t]] = len(order)
                    rep[block[t]] = t
                    queue.append(t)
        n = len(order)
        delta = [None] * n
        accepting = set()
        for b, i in order.items():
            q = rep[b]
            delta[i] = tuple(order[block[self.delta[q][a]]] for a in range(k))
            if q in self.accepting:
                accepting.add(i)
        return Dfa(self.alphabet, n, 0, frozenset(accepting), tuple(delta))

    def is_minimal(self) -> bool:
        return self.minimize().state_count == self.state_count

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "states": self.state_count,
            "start": self.start,
            "accept": sorted(self.accepting),
            "delta": [list(row) for row in self.delta],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "Dfa":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(
                tuple(data["alphabet"]),
                int(data["states"]),
                int(data["start"]),
                frozenset(data["accept"]),
                tuple(tuple(r) for r in data["delta"]),
            )
        except KeyError as exc:
            raise ValueError(f"DFA file is missing field {exc}") from None


def dfa_for_word_set(words: Iterable[Iterable[str]], alphabet: Sequence[str]) -> Dfa:
    """Minimal DFA accepting exactly the given finite set of words."""
    alphabet = tuple(alphabet)
    index = {a: i for i, a in enumerate(alphabet)}
    trie: list[dict[int, int]] = [{}]
    final = set()
    for w in words:
        q = 0
        for a in w:
            if a not in index:
                raise ValueError(f"symbol {a!r} is not in the alphabet")
            nxt = trie[q].get(index[a])
            if nxt is None:
                nxt = len(trie)
                trie[q][index[a]] = nxt
                trie.append({})
            q = nxt
        final.add(q)
    sink = len(trie)
    delta = [tuple(node.get(i, sink) for i in range(len(alphabet))) for node in trie]
    delta.append(tuple([sink] * len(alphabet)))
    return Dfa(alphabet, len(delta), 0, frozenset(final), tuple(delta)).minimize()


def dfa_template_uavb(alphabet: Sequence[str] = ("a", "b", "c", "d"), a: str = "a", b: str = "b") -> Dfa:
    """DFA for ``{u a v b | u, v in alphabet*}``."""
    alphabet = tuple(alphabet)
    if a not in alphabet or b not in alphabet:
        raise ValueError(f"alphabet must contain {a!r} and {b!r}")
    # 0: no a yet; 1: a seen, not ending in b after it; 2: a seen and ends in b
    rows = []
    for q in range(3):
        row = []
        for c in alphabet:
            if q == 0:
                row.append(1 if c == a else 0)
            else:
                row.append(2 if c == b else 1)
        rows.append(tuple(row))
    return Dfa(alphabet, 3, 0, frozenset({2}), tuple(rows)).minimize()


def dfa_all_nonempty(alphabet: Sequence[str]) -> Dfa:
    """DFA for the set of all non-empty words."""
    k = len(alphabet)
    return Dfa(tuple(alphabet), 2, 0, frozenset({1}), ((1,) * k, (1,) * k))


# --------------------------------------------------------------------------
# syntactic monoid


@dataclass(frozen=True)
class WordBehavior:
    func: tuple[int, ...]
    realized_by: Word


@dataclass(frozen=True)
class ContextBehavior:
    entry: int
    exit_set: frozenset[int]
    left: Word = field(compare=False)
    right: Word = field(compare=False)

    def accepts(self, behavior: WordBehavior) -> bool:
        return behavior.func[self.entry] in self.exit_set


class SyntacticMonoid:
    """Transition monoid of a minimal DFA together with its realized contexts.

    In ``positive`` mode the elements are exactly the behaviors of non-empty
    words; in ``epsilon`` mode the identity (behavior of the empty word) is
    added and ``identity`` holds its index.
    """

    def __init__(self, dfa: Dfa, mode: str = POSITIVE):
        if mode not in LANG_MODES:
            raise ValueError(f"unknown language mode {mode!r}")
        dfa = dfa.minimize() if not dfa.is_minimal() else dfa
        self.dfa = dfa
        self.mode = mode
        n = dfa.state_count
        k = len(dfa.alphabet)
        letter_funcs = [tuple(dfa.delta[q][a] for q in range(n)) for a in range(k)]
        self.letter_funcs = letter_funcs

        index: dict[tuple[int, ...], int] = {}
        elements: list[WordBehavior] = []

        def add(func, witness):
            if func not in index:
                index[func] = len(elements)
                elements.append(WordBehavior(func, witness))
                return True
            return False

        queue: deque[int] = deque()
        self.identity: int | None = None
        if mode == EPSILON:
            add(tuple(range(n)), ())
            self.identity = 0
            queue.append(0)
        else:
            for a in range(k):
                if add(letter_funcs[a], (dfa.alphabet[a],)):
                    queue.append(index[letter_funcs[a]])
        while queue:
            i = queue.popleft()
            f = elements[i].func
            for a in range(k):
                g = tuple(letter_funcs[a][f[q]] for q in range(n))
                if add(g, elements[i].realized_by + (dfa.alphabet[a],)):
                    queue.append(index[g])
        self.elements = elements
        self._func_index = index
        m = len(elements)
        self.table = [
            [index[tuple(elements[j].func[elements[i].func[q]] for q in range(n))] for j in range(m)]
            for i in range(m)
        ]
        # letter action on the right: element index -> element index
        self._letter_right = [
            [index[tuple(letter_funcs[a][elements[i].func[q]] for q in range(n))] for a in range(k)]
            for i in range(m)
        ]

        # exit sets: states from which some suffix y leads to acceptance
        exits: dict[frozenset[int], Word] = {}
        start_exit = frozenset(dfa.accepting)
        exits[start_exit] = ()
        queue2 = deque([start_exit])
        while queue2:
            e = queue2.popleft()
            y = exits[e]
            for a in range(k):
                pre = frozenset(q for q in range(n) if dfa.delta[q][a] in e)
                if pre not in exits:
                    exits[pre] = (dfa.alphabet[a],) + y
                    queue2.append(pre)
        # entries: states reached from start by some prefix x (BFS gives shortest)
        entry_word: dict[int, Word] = {dfa.start: ()}
        queue3 = deque([dfa.start])
        while queue3:
            q = queue3.popleft()
            for a in range(k):
                t = dfa.delta[q][a]
                if t not in entry_word:
                    entry_word[t] = entry_word[q] + (dfa.alphabet[a],)
                    queue3.append(t)
        contexts = []
        for q in sorted(entry_word, key=lambda s: (len(entry_word[s]), entry_word[s])):
            for e, y in sorted(exits.items(), key=lambda kv: (len(kv[1]), kv[1])):
                contexts.append(ContextBehavior(q, e, entry_word[q], y))
        self.contexts = contexts
        self._context_index = {(c.entry, c.exit_set): i for i, c in enumerate(contexts)}

    def __len__(self) -> int:
        return len(self.elements)

    def product(self, i: int, j: int) -> int:
        return self.table[i][j]

    def behavior_of(self, word: Iterable[str]) -> int | None:
        """Element index of a word's behavior; ``None`` for the empty word in positive mode."""
        word = tuple(word)
        if not word:
            return self.identity
        i = self._func_index[self.letter_funcs[self.dfa.symbol_index(word[0])]]
        for a in word[1:]:
            i = self._letter_right[i][self.dfa.symbol_index(a)]
        return i

    def func_of(self, word: Iterable[str]) -> tuple[int, ...]:
        n = self.dfa.state_count
        f = tuple(range(n))
        for a in word:
            la = self.letter_funcs[self.dfa.symbol_index(a)]
            f = tuple(la[f[q]] for q in range(n))
        return f

    def context_of(self, left: Iterable[str], right: Iterable[str]) -> int:
        """Index of the context behavior realized by ``(left, right)``."""
        dfa = self.dfa
        entry = dfa.run(left)
        right = tuple(right)
        exit_set = frozenset(q for q in range(dfa.state_count) if dfa.run(right, q) in dfa.accepting)
        return self._context_index[(entry, exit_set)]

    def context_accepts(self, c: int, b: int) -> bool:
        ctx = self.contexts[c]
        return self.elements[b].func[ctx.entry] in ctx.exit_set

    def is_associative(self) -> bool:
        t = self.table
        r = range(len(t))
        return all(t[t[i][j]][k] == t[i][t[j][k]] for i in r for j in r for k in r)


# --------------------------------------------------------------------------
# two-letter encoding a_i -> e f^i e


def pentus_encode(word: Iterable[str], alphabet: Sequence[str]) -> Word:
    """Image of a word under ``a_i -> e f^i e`` (``a_i`` is ``alphabet[i-1]``)."""
    pos = {a: i + 1 for i, a in enumerate(alphabet)}
    out: list[str] = []
    for a in word:
        if a not in pos:
            raise ValueError(f"symbol {a!r} is not in the alphabet")
        out.append("e")
        out.extend("f" * pos[a])
        out.append("e")
    return tuple(out)


def pentus_decode(word: Iterable[str], alphabet: Sequence[str]) -> Word | None:
    """The unique preimage of ``word``, or ``None`` if it is not an image."""
    word = tuple(word)
    out = []
    i = 0
    n = len(word)
    while i < n:
        if word[i] != "e":
            return None
        j = i + 1
        while j < n and word[j] == "f":
            j += 1
        count = j - i - 1
        if j >= n or count == 0 or count > len(alphabet):
            return None
        out.append(alphabet[count - 1])
        i = j + 1
    return tuple(out)


def pentus_encode_lang(dfa: Dfa) -> Dfa:
    """Minimal DFA over ``("e", "f")`` for the image of the language."""
    n = dfa.state_count
    k = len(dfa.alphabet)
    # states: 0..n-1 originals; then (q, j) mid-block after "e f^j"; then sink
    def mid(q: int, j: int) -> int:
        return n + q * (k + 1) + j

    sink = n + n * (k + 1)
    delta = [None] * (sink + 1)
    for q in range(n):
        delta[q] = (mid(q, 0), sink)
        for j in range(k + 1):
            on_e = dfa.delta[q][j - 1] if 1 <= j <= k else sink
            on_f = mid(q, j + 1) if j < k else sink
            delta[mid(q, j)] = (on_e, on_f)
    delta[sink] = (sink, sink)
    return Dfa(("e", "f"), sink + 1, dfa.start, dfa.accepting, tuple(delta)).minimize()
