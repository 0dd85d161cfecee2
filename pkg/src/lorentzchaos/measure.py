"""Atomic measure spaces, measurable sets and non-singular transformations.

Every point of a space is an atom of strictly positive rational weight, so a
measurable set is just a finite set of atoms and its measure is an exact
``Fraction``.  Infinite spaces are described by closed-form weight rules and
tail bounds rather than by explicit lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count, islice
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Union

AtomId = Union[int, tuple, str]
MeasurableSet = frozenset

FINITE = "finite-explicit"
STRUCTURED = "structured-infinite"

PAPER_EXAMPLE_24 = "PAPER_EXAMPLE_24"
UNILATERAL_SHIFT = "UNILATERAL_SHIFT"
BILATERAL_SHIFT = "BILATERAL_SHIFT"
BILATERAL_VALLEY = "BILATERAL_VALLEY"
FAMILIES = (PAPER_EXAMPLE_24, UNILATERAL_SHIFT, BILATERAL_SHIFT, BILATERAL_VALLEY)


class MeasureError(ValueError):
    """Invalid space, set or transformation data."""


def canonical_key(atom: AtomId) -> tuple:
    """Sort key giving the canonical atom order.

    Integers go by ``|i|`` then sign (so ``0, -1, 1, -2, 2, ...``), pairs by
    ``|i + j|`` then lexicographically, anything else by its string form.
    """
    if isinstance(atom, bool):
        raise MeasureError(f"invalid atom id {atom!r}")
    if isinstance(atom, int):
        return (0, abs(atom), atom)
    if isinstance(atom, tuple):
        return (1, abs(sum(atom)), *atom)
    return (2, str(atom))


def sort_atoms(atoms: Iterable[AtomId]) -> list:
    return sorted(atoms, key=canonical_key)


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and strings like ``"1/3"`` into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise MeasureError(f"not a rational: {x!r}")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    raise MeasureError(f"not a rational: {x!r}")


@dataclass(frozen=True)
class SpaceWindow:
    size: int
    atoms: tuple
    omitted_mass: Optional[Fraction]  # None: the omitted part has infinite mass


class MeasureSpace:
    """Countable atomic measure space.

    Subclasses provide ``weight``, ``__contains__`` and ``atoms`` (canonical
    enumeration); ``tail_bound`` and ``total_mass`` use ``None`` for +inf.
    """

    kind: str = STRUCTURED
    name: str = "space"

    def weight(self, atom: AtomId) -> Fraction:
        raise NotImplementedError

    def __contains__(self, atom) -> bool:
        raise NotImplementedError

    def atoms(self) -> Iterator:
        raise NotImplementedError

    @property
    def total_mass(self) -> Optional[Fraction]:
        raise NotImplementedError

    def tail_bound(self, size: int) -> Optional[Fraction]:
        raise NotImplementedError

    def window(self, size: int) -> SpaceWindow:
        if size < 1:
            raise MeasureError("window size must be positive")
        atoms = tuple(islice(self.atoms(), size))
        return SpaceWindow(len(atoms), atoms, self.tail_bound(size))

    def measure(self, atoms: Iterable[AtomId]) -> Fraction:
        return measure_of(self, atoms)


class FiniteSpace(MeasureSpace):
    kind = FINITE

    def __init__(self, weights: Mapping[AtomId, Fraction], name: str = "finite"):
        self._weights = dict(weights)
        self._order = tuple(sort_atoms(self._weights))
        self.name = name

    def weight(self, atom):
        try:
            return self._weights[atom]
        except (KeyError, TypeError):
            raise MeasureError(f"atom {atom!r} not in space") from None

    def __contains__(self, atom):
        try:
            return atom in self._weights
        except TypeError:
            return False

    def atoms(self):
        return iter(self._order)

    def __len__(self):
        return len(self._order)

    @property
    def total_mass(self):
        return sum(self._weights.values(), Fraction(0))

    def tail_bound(self, size):
        return Fraction(0) if size >= len(self._order) else self.measure(self._order[size:])

    def __repr__(self):
        return f"FiniteSpace({len(self._order)} atoms)"


def _is_int(atom) -> bool:
    return isinstance(atom, int) and not isinstance(atom, bool)


class NaturalShiftSpace(MeasureSpace):
    """Atoms ``1, 2, 3, ...`` with weight ``r**n``."""

    def __init__(self, r: Fraction):
        self.r = r
        self.name = f"{UNILATERAL_SHIFT}({r})"

    def weight(self, atom):
        if atom not in self:
            raise MeasureError(f"atom {atom!r} not in space")
        return self.r ** atom

    def __contains__(self, atom):
        return _is_int(atom) and atom >= 1

    def atoms(self):
        return count(1)

    @property
    def total_mass(self):
        return self.r / (1 - self.r) if self.r < 1 else None

    def tail_bound(self, size):
        return self.r ** (size + 1) / (1 - self.r) if self.r < 1 else None


class IntegerSpace(MeasureSpace):
    """Atoms ``Z`` with weight ``r**i`` (shift) or ``r**|i|`` (valley)."""

    def __init__(self, r: Fraction, valley: bool):
        self.r = r
        self.valley = valley
        self.name = f"{BILATERAL_VALLEY if valley else BILATERAL_SHIFT}({r})"

    def weight(self, atom):
        if atom not in self:
            raise MeasureError(f"atom {atom!r} not in space")
        return self.r ** (abs(atom) if self.valley else atom)

    def __contains__(self, atom):
        return _is_int(atom)

    def atoms(self):
        yield 0
        for k in count(1):
            yield -k
            yield k

    @property
    def total_mass(self):
        if self.valley and self.r < 1:
            return (1 + self.r) / (1 - self.r)
        return None

    def tail_bound(self, size):
        if not (self.valley and self.r < 1):
            return None
        # window = {|i| <= k} plus possibly -(k + 1)
        k = (size - 1) // 2
        tail = 2 * self.r ** (k + 1) / (1 - self.r)
        if size % 2 == 0:
            tail -= self.r ** (k + 1)
        return tail


class Example24Space(MeasureSpace):
    """``(Z x {0}) u (N x N)`` with weights ``3**-|i|`` and ``3**-(n-j)`` / ``1``."""

    name = PAPER_EXAMPLE_24

    def weight(self, atom):
        if atom not in self:
            raise MeasureError(f"atom {atom!r} not in space")
        i, j = atom
        if j == 0:
            return Fraction(1, 3 ** abs(i))
        if j < i:
            return Fraction(1, 3 ** (i - j))
        return Fraction(1)

    def __contains__(self, atom):
        if not (isinstance(atom, tuple) and len(atom) == 2 and all(_is_int(c) for c in atom)):
            return False
        i, j = atom
        return j == 0 or (i >= 1 and j >= 1)

    def atoms(self):
        yield (0, 0)
        for s in count(1):
            layer = [(-s, 0), (s, 0)] + [(n, s - n) for n in range(1, s)]
            yield from sorted(layer)

    @property
    def total_mass(self):
        return None

    def tail_bound(self, size):
        return None


@dataclass(frozen=True)
class Transformation:
    """Atom-to-atom map with an exact fiber rule and optional inverse."""

    forward: Callable[[AtomId], AtomId]
    preimage_rule: Callable[[AtomId], frozenset]
    inverse: Optional[Callable[[AtomId], AtomId]] = None
    name: str = field(default="tau", compare=False)

    @property
    def invertible(self) -> bool:
        return self.inverse is not None


def _check_rational(r) -> Fraction:
    r = as_fraction(r)
    if r <= 0:
        raise MeasureError(f"invalid family parameter r={r}: must be > 0")
    return r


def make_finite_space(entries: Iterable[tuple]) -> FiniteSpace:
    """Build a finite-explicit space from ``(atom, weight)`` pairs."""
    weights: dict = {}
    for atom, w in entries:
        canonical_key(atom)
        if isinstance(atom, list):
            atom = tuple(atom)
        if atom in weights:
            raise MeasureError(f"duplicate id {atom!r}")
        w = as_fraction(w)
        if w <= 0:
            raise MeasureError(f"non-positive weight {w} for atom {atom!r}")
        weights[atom] = w
    if not weights:
        raise MeasureError("a finite space needs at least one atom")
    return FiniteSpace(weights)


def make_finite_map(space: FiniteSpace, mapping: Mapping) -> Transformation:
    """Transformation of a finite space given as an explicit dict."""
    atoms = list(space.atoms())
    missing = [a for a in atoms if a not in mapping]
    if missing:
        raise MeasureError(f"map is not total: no image for {missing[0]!r}")
    fibers: dict = {a: set() for a in atoms}
    for a in atoms:
        b = mapping[a]
        if b not in space:
            raise MeasureError(f"image {b!r} of {a!r} not in space")
        fibers[b].add(a)
    fibers = {b: frozenset(s) for b, s in fibers.items()}
    fwd = dict(mapping)
    inverse = None
    if all(len(s) == 1 for s in fibers.values()):
        inv = {b: next(iter(s)) for b, s in fibers.items()}
        inverse = inv.__getitem__
    return Transformation(fwd.__getitem__, fibers.__getitem__, inverse, name="explicit")


def identity_map(space: MeasureSpace) -> Transformation:
    return Transformation(lambda a: a, lambda a: frozenset((a,)), lambda a: a, name="identity")


def make_builtin_space(family: str, r=None) -> tuple:
    """Return ``(space, tau)`` for one of the built-in families."""
    if family == PAPER_EXAMPLE_24:
        def forward(a):
            i, j = a
            return (i + 2, 0) if j == 0 else (i, j - 1)

        def fiber(a):
            i, j = a
            if j == 0:
                return frozenset([(i - 2, 0), (i, 1)] if i >= 1 else [(i - 2, 0)])
            return frozenset([(i, j + 1)])

        return Example24Space(), Transformation(forward, fiber, None, name="collision-tree")

    if family not in FAMILIES:
        raise MeasureError(f"unknown family {family!r}")
    if r is None:
        raise MeasureError(f"family {family} needs a base r")
    r = _check_rational(r)
    if family == UNILATERAL_SHIFT:
        tau = Transformation(
            lambda n: n + 1,
            lambda n: frozenset([n - 1]) if n >= 2 else frozenset(),
            None,
            name="shift",
        )
        return NaturalShiftSpace(r), tau
    if r == 1:
        raise MeasureError(f"invalid family parameter: {family} requires r != 1")
    tau = Transformation(lambda i: i + 1, lambda i: frozenset([i - 1]), lambda i: i - 1, name="shift")
    return IntegerSpace(r, valley=family == BILATERAL_VALLEY), tau


def _check_members(space: MeasureSpace, atoms: Iterable) -> frozenset:
    atoms = frozenset(atoms)
    for a in atoms:
        if a not in space:
            raise MeasureError(f"atom {a!r} not in space")
    return atoms


def measure_of(space: MeasureSpace, atoms: Iterable[AtomId]) -> Fraction:
    return sum((space.weight(a) for a in _check_members(space, atoms)), Fraction(0))


def preimage(tau: Transformation, atoms: Iterable[AtomId]) -> frozenset:
    out: set = set()
    for a in atoms:
        out.update(tau.preimage_rule(a))
    return frozenset(out)


def preimage_n(space: MeasureSpace, tau: Transformation, atoms: Iterable[AtomId], n: int) -> frozenset:
    """Exact fiber ``tau^{-n}(atoms)``."""
    if n < 0:
        raise MeasureError("n must be nonnegative")
    current = _check_members(space, atoms)
    for _ in range(n):
        if not current:
            break
        current = preimage(tau, current)
    return current


def forward_image_n(space: MeasureSpace, tau: Transformation, atoms: Iterable[AtomId], n: int) -> frozenset:
    if n < 0:
        raise MeasureError("n must be nonnegative")
    current = _check_members(space, atoms)
    for _ in range(n):
        current = frozenset(tau.forward(a) for a in current)
    return current


def inverse_image_n(space: MeasureSpace, tau: Transformation, atoms, n: int) -> frozenset:
    """``tau^n`` for signed n: forward images for n >= 0, fibers for n < 0."""
    return forward_image_n(space, tau, atoms, n) if n >= 0 else preimage_n(space, tau, atoms, -n)


def check_injective(space: MeasureSpace, tau: Transformation, window: SpaceWindow):
    """Look for two window atoms with the same image."""
    from .verdict import CONFIRMED, REFUTED, Verdict

    if not window.atoms:
        raise MeasureError("window must be nonempty")
    seen: dict = {}
    for a in window.atoms:
        b = tau.forward(a)
        if b in seen:
            first = seen[b]
            return Verdict(
                REFUTED,
                witness={"collision": {"atoms": [first, a], "image": b}},
                evidence=[{"kind": "collision", "atoms": [first, a], "image": b}],
                note=f"tau({first!r}) = {b!r} = tau({a!r})",
                horizon=window.size,
            )
        seen[b] = a
    return Verdict(
        CONFIRMED,
        witness={"window_size": window.size},
        note="no collision among window atoms (horizon-qualified)",
        horizon=window.size,
    )
