"""Word arithmetic in the fundamental groups of the supported surfaces.

Every value here is immutable and every operation is a pure function, so the
module is safe to use from any number of threads.

Supported surfaces and their word-problem strategies:

* ``plane``               -- trivial group (empty words only).
* ``orientable-bounded``  -- free group of rank 2g+b-1, free reduction.
* ``torus``               -- Z^2, words sorted into a^i b^j.
* ``klein-bottle``        -- <c, d | d c = c^-1 d>, normal form c^k d^l.

The unit tangent lift of a surface adds a fiber generator ``f`` which
commutes with orientation preserving base words and anti-commutes with
orientation reversing ones (``a f = f^-1 a``).  ``FiberedWord`` stores the
normal form ``base * f^fiber`` with the fiber collected on the right; on the
Klein bottle this is the normal form g^k h^l f^m for the lifted group

    < g, h, f | h g = g^-1 h,  h f = f^-1 h,  g f = f g >.

Serialization: words print as whitespace separated tokens ``a``, ``a^-1``,
with ``1`` for the empty word; tuples print as ``( w1 ; w2 ; w3 )``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GroupError(ValueError):
    """Raised for malformed words or mixed surface models."""


# ---------------------------------------------------------------------------
# surface models


@dataclass(frozen=True)
class SurfaceModel:
    """A surface together with its fundamental-group presentation data.

    ``reversing`` flags which generators are orientation reversing loops;
    the orientation character of a word is the parity of its reversing
    letters.
    """

    kind: str                      # plane | orientable-bounded | torus | klein-bottle
    generators: tuple[str, ...]
    reversing: tuple[bool, ...]
    genus: int = 0
    boundary: int = 0

    def __post_init__(self):
        if len(self.generators) != len(self.reversing):
            raise GroupError("generator/reversing length mismatch")
        if self.kind == "plane" and self.generators:
            raise GroupError("plane has no generators")
        if self.kind == "torus" and len(self.generators) != 2:
            raise GroupError("torus has exactly 2 generators")
        if self.kind == "klein-bottle":
            if len(self.generators) != 2 or self.reversing != (False, True):
                raise GroupError("klein-bottle has generators (c, d), d reversing")
        if self.kind == "orientable-bounded":
            if self.boundary < 1 or self.genus < 0:
                raise GroupError("orientable-bounded needs b >= 1, g >= 0")
            if len(self.generators) != 2 * self.genus + self.boundary - 1:
                raise GroupError("orientable-bounded needs 2g+b-1 generators")
            if any(self.reversing):
                raise GroupError("orientable surface has no reversing generators")

    def is_orientable(self) -> bool:
        return self.kind != "klein-bottle"

    def generator_index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise GroupError(f"unknown generator {name!r}") from None

    def is_reversing(self, name: str) -> bool:
        return self.reversing[self.generator_index(name)]

    def identity(self) -> "GroupWord":
        return GroupWord(self, ())

    def word(self, text: str) -> "GroupWord":
        return parse_word(self, text)

    def gen(self, name: str, power: int = 1) -> "GroupWord":
        self.generator_index(name)
        sign = 1 if power >= 0 else -1
        return GroupWord(self, tuple((name, sign) for _ in range(abs(power))))


def plane() -> SurfaceModel:
    return SurfaceModel("plane", (), ())


def torus() -> SurfaceModel:
    return SurfaceModel("torus", ("a", "b"), (False, False))


def klein_bottle() -> SurfaceModel:
    return SurfaceModel("klein-bottle", ("c", "d"), (False, True))


def orientable_bounded(genus: int, boundary: int) -> SurfaceModel:
    n = 2 * genus + boundary - 1
    names = tuple("abcdefghijklmnopqrstuvwxyz"[i] if n <= 26 else f"x{i}" for i in range(n))
    return SurfaceModel("orientable-bounded", names, (False,) * n,
                        genus=genus, boundary=boundary)


def annulus() -> SurfaceModel:
    return orientable_bounded(0, 2)


def _check_same_model(a, b):
    if a.model != b.model:
        raise GroupError("mixed surface models")


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class GroupWord:
    """A normal-form element of pi_1 of the surface.

    ``letters`` is a sequence of (generator, +1|-1) pairs, normalized
    according to the surface kind on construction.
    """

    model: SurfaceModel
    letters: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for name, e in self.letters:
            self.model.generator_index(name)
            if e not in (1, -1):
                raise GroupError(f"letter exponent must be +-1, got {e}")
        object.__setattr__(self, "letters", _normalize(self.model, self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        _check_same_model(self, other)
        return GroupWord(self.model, self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(self.model, tuple((g, -e) for g, e in reversed(self.letters)))

    def char(self) -> int:
        """Orientation character: -1 iff the word reverses orientation."""
        odd = sum(1 for g, _ in self.letters if self.model.is_reversing(g)) % 2
        return -1 if odd else 1

    def conjugate(self, by: "GroupWord") -> "GroupWord":
        return by * self * by.inverse()

    def __str__(self) -> str:
        return print_word(self)

    def sort_key(self) -> tuple:
        key = []
        for g, e in self.letters:
            key.append((self.model.generator_index(g), 0 if e > 0 else 1))
        return (len(key), tuple(key))


def _normalize(model: SurfaceModel, letters):
    letters = tuple(letters)
    if model.kind in ("plane", "orientable-bounded"):
        out: list[tuple[str, int]] = []
        for g, e in letters:
            if out and out[-1][0] == g and out[-1][1] == -e:
                out.pop()
            else:
                out.append((g, e))
        if model.kind == "plane" and out:
            raise GroupError("plane admits only the empty word")
        return tuple(out)
    if model.kind == "torus":
        a, b = model.generators
        na = sum(e for g, e in letters if g == a)
        nb = sum(e for g, e in letters if g == b)
        return _power_letters(a, na) + _power_letters(b, nb)
    if model.kind == "klein-bottle":
        # Push every c past the d's using d c = c^-1 d; collect c^k d^l.
        c, d = model.generators
        k = 0
        l = 0
        for g, e in letters:
            if g == d:
                l += e
            else:
                k += e if l % 2 == 0 else -e
        return _power_letters(c, k) + _power_letters(d, l)
    raise GroupError(f"unknown surface kind {model.kind!r}")


def _power_letters(g: str, n: int) -> tuple[tuple[str, int], ...]:
    sign = 1 if n >= 0 else -1
    return tuple((g, sign) for _ in range(abs(n)))


def exponent_of(word: GroupWord, gen: str) -> int:
    return sum(e for g, e in word.letters if g == gen)


def word_multiply(a, b):
    """Product in the word's group; works for GroupWord and FiberedWord."""
    if isinstance(a, FiberedWord) != isinstance(b, FiberedWord):
        raise GroupError("cannot mix plain and fibered words")
    return a * b


# ---------------------------------------------------------------------------
# fibered words (unit tangent lifts)


@dataclass(frozen=True)
class FiberedWord:
    """Element base * f^fiber of the lifted group pi_1(STF).

    The product collects f on the right, flipping its sign across
    orientation reversing base words:

        (b1, m1) * (b2, m2) = (b1 b2, m1 * char(b2) + m2)
    """

    base: GroupWord
    fiber: int

    @property
    def model(self) -> SurfaceModel:
        return self.base.model

    def __mul__(self, other: "FiberedWord") -> "FiberedWord":
        _check_same_model(self, other)
        return FiberedWord(self.base * other.base,
                           self.fiber * other.base.char() + other.fiber)

    def inverse(self) -> "FiberedWord":
        return FiberedWord(self.base.inverse(), -self.fiber * self.base.char())

    def char(self) -> int:
        return self.base.char()

    def conjugate(self, by: "FiberedWord") -> "FiberedWord":
        return by * self * by.inverse()

    def __str__(self) -> str:
        return f"{print_word(self.base)}|{self.fiber}"

    def sort_key(self) -> tuple:
        return self.base.sort_key() + (abs(self.fiber), 0 if self.fiber >= 0 else 1)


def fibered_identity(model: SurfaceModel) -> FiberedWord:
    return FiberedWord(model.identity(), 0)


def fiber_gen(model: SurfaceModel, power: int = 1) -> FiberedWord:
    return FiberedWord(model.identity(), power)


def lift(word: GroupWord, fiber: int = 0) -> FiberedWord:
    return FiberedWord(word, fiber)


# ---------------------------------------------------------------------------
# serialization


def print_word(word: GroupWord) -> str:
    if not word.letters:
        return "1"
    out = []
    i = 0
    letters = word.letters
    while i < len(letters):
        g, e = letters[i]
        j = i
        while j < len(letters) and letters[j] == (g, e):
            j += 1
        n = (j - i) * e
        out.append(g if n == 1 else f"{g}^{n}")
        i = j
    return " ".join(out)


def parse_word(model: SurfaceModel, text: str) -> GroupWord:
    letters: list[tuple[str, int]] = []
    for tok in text.split():
        if tok == "1":
            continue
        if "^" in tok:
            name, _, power = tok.partition("^")
            try:
                n = int(power)
            except ValueError:
                raise GroupError(f"bad exponent in token {tok!r}") from None
        else:
            name, n = tok, 1
        model.generator_index(name)
        letters.extend(_power_letters(name, n))
    return GroupWord(model, tuple(letters))


def parse_fibered(model: SurfaceModel, text: str) -> FiberedWord:
    word, sep, fiber = text.rpartition("|")
    if not sep:
        raise GroupError(f"fibered word needs 'word|fiber', got {text!r}")
    try:
        m = int(fiber)
    except ValueError:
        raise GroupError(f"bad fiber exponent in {text!r}") from None
    return FiberedWord(parse_word(model, word), m)


# ---------------------------------------------------------------------------
# conjugacy


def conjugacy_class_equal(a: GroupWord, b: GroupWord) -> bool:
    """Whether a and b are conjugate in pi_1 of their common surface."""
    _check_same_model(a, b)
    kind = a.model.kind
    if kind == "plane":
        return True
    if kind == "torus":
        return a == b
    if kind == "orientable-bounded":
        return _cyclic_reduce(a) in _cyclic_rotations(_cyclic_reduce(b))
    # Klein bottle: conjugation acts on normal forms c^k d^l by
    #   d-conj: (k, l) -> (-k, l);  c-conj: (k, l) -> (k -+ 2, l) for l odd.
    c, d = a.model.generators
    ka, la = exponent_of(a, c), exponent_of(a, d)
    kb, lb = exponent_of(b, c), exponent_of(b, d)
    if la != lb:
        return False
    if la % 2 == 0:
        return ka == kb or ka == -kb
    return ka % 2 == kb % 2


def _cyclic_reduce(w: GroupWord) -> GroupWord:
    letters = list(w.letters)
    while len(letters) >= 2 and letters[0] == (letters[-1][0], -letters[-1][1]):
        letters = letters[1:-1]
    return GroupWord(w.model, tuple(letters))


def _cyclic_rotations(w: GroupWord):
    letters = w.letters
    if not letters:
        return {w}
    return {GroupWord(w.model, letters[i:] + letters[:i]) for i in range(len(letters))}


# ---------------------------------------------------------------------------
# tuple classes


_SYMMETRIES = {"cyclic": 3, "swap": 2}


@dataclass(frozen=True)
class ClassTuple:
    """Canonical form of a word tuple up to simultaneous conjugation and a
    tuple symmetry (cyclic rotation for triples, swap for pairs).

    Built through :func:`canonicalize_tuple`; two tuples are the same
    equivalence class iff their canonical forms compare equal.
    """

    symmetry: str
    words: tuple  # of GroupWord or FiberedWord

    @property
    def arity(self) -> int:
        return len(self.words)

    def __str__(self) -> str:
        return "( " + " ; ".join(str(w) for w in self.words) + " )"


def _conjugator_words(model: SurfaceModel, fibered: bool):
    gens = []
    for g in model.generators:
        gens.append(GroupWord(model, ((g, 1),)))
        gens.append(GroupWord(model, ((g, -1),)))
    if fibered:
        out = [FiberedWord(w, 0) for w in gens]
        out.append(fiber_gen(model, 1))
        out.append(fiber_gen(model, -1))
        return out
    return gens


def _tuple_len(words) -> int:
    total = 0
    for w in words:
        if isinstance(w, FiberedWord):
            total += len(w.base) + abs(w.fiber)
        else:
            total += len(w)
    return total


def _tuple_key(words) -> tuple:
    return tuple(w.sort_key() for w in words)


def _symmetry_variants(words, symmetry: str):
    words = tuple(words)
    if symmetry == "cyclic":
        return [words[i:] + words[:i] for i in range(len(words))]
    if symmetry == "swap":
        return [words, words[::-1]]
    raise GroupError(f"unknown symmetry {symmetry!r}")


def canonicalize_tuple(words: Sequence, symmetry: str) -> ClassTuple:
    """Canonicalize a tuple of words under simultaneous conjugation plus the
    given tuple symmetry.

    Greedy length reduction by single-generator conjugation, then a
    breadth-first closure over length-preserving conjugations, finally the
    lexicographically least representative over closure x symmetry.
    """
    words = tuple(words)
    if symmetry not in _SYMMETRIES:
        raise GroupError(f"symmetry must be cyclic or swap, not {symmetry!r}")
    if len(words) != _SYMMETRIES[symmetry]:
        raise GroupError(f"{symmetry} tuples have arity {_SYMMETRIES[symmetry]}")
    model = words[0].model
    fibered = isinstance(words[0], FiberedWord)
    for w in words:
        if w.model != model or isinstance(w, FiberedWord) != fibered:
            raise GroupError("tuple words must share one surface model and kind")

    conjugators = _conjugator_words(model, fibered)

    current = words
    improved = True
    while improved:
        improved = False
        for u in conjugators:
            cand = tuple(w.conjugate(u) for w in current)
            if _tuple_len(cand) < _tuple_len(current):
                current = cand
                improved = True
                break

    # closure over length-preserving conjugations (capped; the cap is far
    # beyond anything reachable at desk scale and is asserted in tests)
    best_len = _tuple_len(current)
    seen = {current}
    frontier = [current]
    while frontier and len(seen) < 4096:
        nxt = []
        for t in frontier:
            for u in conjugators:
                cand = tuple(w.conjugate(u) for w in t)
                if _tuple_len(cand) == best_len and cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt

    candidates = []
    for t in seen:
        candidates.extend(_symmetry_variants(t, symmetry))
    best = min(candidates, key=_tuple_key)
    return ClassTuple(symmetry, best)


def class_tuples_equal(a: ClassTuple, b: ClassTuple) -> bool:
    return a == b


# ---------------------------------------------------------------------------
# Klein-bottle centralizers


@dataclass(frozen=True)
class CentralizerCase:
    tag: str                  # whole-group | rank-3-abelian | rank-2-abelian
    generators: tuple[str, ...]


def centralizer_case(x: FiberedWord) -> CentralizerCase:
    """Centralizer of x in the lifted Klein-bottle group, by normal form.

    With x = g^k h^l f^m: the whole group when x = h^(2l); the rank-3
    subgroup <g, h^2, f> when l is even and (k, m) != (0, 0); the rank-2
    subgroup <x, h^2> when l is odd.
    """
    if x.model.kind != "klein-bottle":
        raise GroupError("centralizer cases are tabulated for the klein-bottle only")
    c, d = x.model.generators
    k = exponent_of(x.base, c)
    l = exponent_of(x.base, d)
    m = x.fiber
    if l % 2 == 1:
        return CentralizerCase("rank-2-abelian", (str(x), "h^2"))
    if k == 0 and m == 0:
        return CentralizerCase("whole-group", ("g", "h", "f"))
    return CentralizerCase("rank-3-abelian", ("g", "h^2", "f"))


def commutes(x: FiberedWord, y: FiberedWord) -> bool:
    return x * y == y * x
