"""Algebra of quantum access structures.

Players are numbered 0..n-1 in declaration order.  A subset of players is a
plain int bitmask with player ``i`` at bit ``i``; an access structure is the
antichain of its inclusion-minimal authorized subsets.  All operations are
exact set algebra over these masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

MAX_PLAYERS = 16  # exhaustive 2^n checks stay cheap below this


class AccessStructureError(ValueError):
    """Malformed or inadmissible access-structure input."""


def mask_from_indices(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_from_mask(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def _rev_mask(mask: int, n: int) -> int:
    # same subset with player 0 as the most significant bit
    r = 0
    for i in range(n):
        if (mask >> i) & 1:
            r |= 1 << (n - 1 - i)
    return r


def _canon_key(mask: int, n: int) -> tuple[int, tuple[int, ...]]:
    # display order: by cardinality, then lexicographic on member indices
    return (mask.bit_count(), indices_from_mask(mask))


@dataclass(frozen=True)
class AccessStructure:
    """Monotone family of authorized player subsets, stored as its antichain
    of minimal sets in canonical order."""

    player_count: int
    minimal_sets: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.player_count < 1:
            raise AccessStructureError("player_count must be >= 1")
        if self.player_count > MAX_PLAYERS:
            raise AccessStructureError(
                f"player_count {self.player_count} exceeds the cap of {MAX_PLAYERS} "
                "players (exhaustive subset checks would not terminate in reason)"
            )
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(f"P{i}" for i in range(self.player_count))
            )
        if len(self.labels) != self.player_count:
            raise AccessStructureError("one label per player required")
        full = (1 << self.player_count) - 1
        for m in self.minimal_sets:
            if m == 0:
                raise AccessStructureError("empty set cannot be authorized")
            if m & ~full:
                raise AccessStructureError("minimal set references unknown player")
        # antichain check: no minimal set contains another
        for a in self.minimal_sets:
            for b in self.minimal_sets:
                if a != b and (a & b) == a:
                    raise AccessStructureError(
                        "minimal sets must form an antichain; use normalize()"
                    )
        if list(self.minimal_sets) != sorted(
            set(self.minimal_sets), key=lambda m: _canon_key(m, self.player_count)
        ):
            raise AccessStructureError("minimal sets not in canonical order")

    # -- predicates ---------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.minimal_sets

    @property
    def full_mask(self) -> int:
        return (1 << self.player_count) - 1

    def is_authorized(self, subset: int) -> bool:
        """True iff some minimal set is contained in ``subset``."""
        if subset & ~self.full_mask:
            raise AccessStructureError("subset references unknown player")
        return any((m & subset) == m for m in self.minimal_sets)

    def is_quantum_admissible(self) -> bool:
        """True iff every pair of minimal sets intersects (no-cloning bound)."""
        ms = self.minimal_sets
        return all(
            ms[i] & ms[j] for i in range(len(ms)) for j in range(i + 1, len(ms))
        )

    def is_maximal(self) -> bool:
        """Exhaustive check that exactly one of S, S^c is authorized for all S."""
        full = self.full_mask
        return all(
            self.is_authorized(s) != self.is_authorized(full ^ s)
            for s in range(full + 1)
        )

    # -- constructors and transforms ----------------------------------------

    def maximalize(self) -> "AccessStructure":
        """Smallest-first completion to a maximal admissible superstructure.

        Candidate subsets are scanned in ascending (cardinality, mask) order
        with player 0 at the most significant mask bit; whenever neither a
        subset nor its complement is authorized, the subset is adopted as a
        new minimal set.  Deterministic and idempotent.
        """
        if self.is_empty:
            raise AccessStructureError("cannot maximalize an empty structure")
        if not self.is_quantum_admissible():
            raise AccessStructureError("cannot maximalize an inadmissible structure")
        n = self.player_count
        full = self.full_mask
        current = self
        order = sorted(
            range(1, full + 1), key=lambda s: (s.bit_count(), _rev_mask(s, n))
        )
        for s in order:
            if not current.is_authorized(s) and not current.is_authorized(full ^ s):
                current = normalize(n, (*current.minimal_sets, s), self.labels)
        return current

    def remove_player(self, player: int) -> "AccessStructure":
        """Structure over the remaining players: exactly the minimal sets that
        avoid ``player``, reindexed.  May come out empty."""
        if not 0 <= player < self.player_count:
            raise AccessStructureError(f"player {player} not in roster")
        if self.player_count == 1:
            raise AccessStructureError("cannot remove the only player")
        low = (1 << player) - 1
        kept = [
            (m & low) | ((m >> 1) & ~low)
            for m in self.minimal_sets
            if not (m >> player) & 1
        ]
        labels = self.labels[:player] + self.labels[player + 1 :]
        return normalize(self.player_count - 1, kept, labels)

    # -- naming helpers ------------------------------------------------------

    def subset_name(self, mask: int) -> str:
        if mask == 0:
            return "{}"
        return "".join(self.labels[i] for i in indices_from_mask(mask))

    def subset_from_names(self, names) -> int:
        index = {lab: i for i, lab in enumerate(self.labels)}
        m = 0
        for name in names:
            if name not in index:
                raise AccessStructureError(f"unknown player name {name!r}")
            m |= 1 << index[name]
        return m

    def describe(self) -> str:
        return "<" + ", ".join(self.subset_name(m) for m in self.minimal_sets) + ">"


def normalize(player_count: int, minimal_sets, labels=()) -> AccessStructure:
    """Build the antichain of inclusion-minimal sets generating the same
    monotone family; duplicates and supersets are dropped, empty sets rejected."""
    sets = list(dict.fromkeys(minimal_sets))
    if any(m == 0 for m in sets):
        raise AccessStructureError("empty set cannot be authorized")
    minimal = [
        m
        for m in sets
        if not any(other != m and (other & m) == other for other in sets)
    ]
    minimal = sorted(set(minimal), key=lambda m: _canon_key(m, player_count))
    return AccessStructure(player_count, tuple(minimal), tuple(labels))


# -- text format --------------------------------------------------------------
#
#   # comment
#   players: A B C E
#   minimal: A B C
#   minimal: B E


def parse_structure(text: str) -> AccessStructure:
    labels: tuple[str, ...] | None = None
    raw_sets: list[int] = []
    index: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("players:"):
            if labels is not None:
                raise AccessStructureError(f"line {lineno}: duplicate players line")
            names = line[len("players:") :].split()
            if not names:
                raise AccessStructureError(f"line {lineno}: no players declared")
            if len(set(names)) != len(names):
                raise AccessStructureError(f"line {lineno}: duplicate player name")
            if "DISCARDED" in names:
                raise AccessStructureError(f"line {lineno}: reserved name DISCARDED")
            labels = tuple(names)
            index = {lab: i for i, lab in enumerate(labels)}
        elif line.startswith("minimal:"):
            if labels is None:
                raise AccessStructureError(
                    f"line {lineno}: minimal line before players line"
                )
            names = line[len("minimal:") :].split()
            if not names:
                raise AccessStructureError(f"line {lineno}: empty minimal set")
            mask = 0
            for name in names:
                if name not in index:
                    raise AccessStructureError(
                        f"line {lineno}: unknown player {name!r}"
                    )
                mask |= 1 << index[name]
            raw_sets.append(mask)
        else:
            raise AccessStructureError(f"line {lineno}: unrecognized line {line!r}")
    if labels is None:
        raise AccessStructureError("missing players line")
    return normalize(len(labels), raw_sets, labels)


def format_structure(a: AccessStructure) -> str:
    lines = ["players: " + " ".join(a.labels)]
    for m in a.minimal_sets:
        lines.append("minimal: " + " ".join(a.labels[i] for i in indices_from_mask(m)))
    return "\n".join(lines) + "\n"
