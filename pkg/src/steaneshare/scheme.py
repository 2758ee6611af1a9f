"""Share trees: compiling access structures into concatenated 7-qubit-code schemes.

A tree describes how one logical qubit is recursively encoded.  Every Encode
node spends one code block whose seven physical positions are split into three
share slots: P1 holds positions 1-4, P2 position 5, P3 positions 6-7.  A slot
either holds plain leaves (all owned by one player, or all discarded) or one
identical child subtree per physical position.  P1 is always the slot that is
discarded or handed to the central share; recursion prefers P2, then P3, which
keeps parity readout on positions 5-7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .access import AccessStructure, indices_from_mask, normalize

DISCARDED = -1
SLOT_WIDTHS = (4, 1, 2)
SLOT_NAMES = ("P1", "P2", "P3")

MAX_COMPILE_DEPTH = 8
MAX_LEAVES = 4096


class SchemeError(ValueError):
    """Tree construction or validation failure."""


@dataclass(frozen=True)
class Leaf:
    owner: int  # player index, or DISCARDED


@dataclass(frozen=True)
class Encode:
    slots: tuple[tuple["Node", ...], tuple["Node", ...], tuple["Node", ...]]

    def __post_init__(self):
        widths = tuple(len(s) for s in self.slots)
        if widths != SLOT_WIDTHS:
            raise SchemeError(f"slot widths must be {SLOT_WIDTHS}, got {widths}")


Node = Union[Leaf, Encode]


def _walk(node: Node, depth: int, out: list[tuple[int, int]]):
    if isinstance(node, Leaf):
        out.append((node.owner, depth))
        return
    for slot in node.slots:
        for child in slot:
            _walk(child, depth + 1, out)


def _validate(node: Node):
    if isinstance(node, Leaf):
        return
    for slot_idx, slot in enumerate(node.slots):
        if any(child != slot[0] for child in slot[1:]):
            raise SchemeError("all positions of one slot must carry the same share")
        if slot_idx > 0 and slot[0] == Leaf(DISCARDED):
            raise SchemeError("discarded shares may only occupy slot P1")
        for child in slot:
            _validate(child)


@dataclass(frozen=True)
class SchemeTree:
    """An encoding tree plus its derived leaf layout.

    ``layout[i] = (owner, depth)`` for leaf ``i`` in depth-first order, where
    depth counts Encode ancestors.
    """

    root: Node
    labels: tuple[str, ...]
    structure: AccessStructure | None = None
    layout: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    @classmethod
    def from_root(
        cls, root: Node, labels, structure: AccessStructure | None = None
    ) -> "SchemeTree":
        _validate(root)
        leaves: list[tuple[int, int]] = []
        _walk(root, 0, leaves)
        for owner, _ in leaves:
            if owner != DISCARDED and not 0 <= owner < len(labels):
                raise SchemeError(f"leaf owner {owner} outside roster")
        return cls(root, tuple(labels), structure, tuple(leaves))

    @property
    def leaf_count(self) -> int:
        return len(self.layout)

    @property
    def player_count(self) -> int:
        return len(self.labels)

    @property
    def depth(self) -> int:
        return max(d for _, d in self.layout)

    def leaves_of(self, subset: int) -> tuple[int, ...]:
        """Leaf indices owned by the players of ``subset`` (never discarded ones)."""
        return tuple(
            i
            for i, (owner, _) in enumerate(self.layout)
            if owner != DISCARDED and (subset >> owner) & 1
        )

    @property
    def live_leaves(self) -> tuple[int, ...]:
        return tuple(
            i for i, (owner, _) in enumerate(self.layout) if owner != DISCARDED
        )

    @property
    def discarded_leaves(self) -> tuple[int, ...]:
        return tuple(
            i for i, (owner, _) in enumerate(self.layout) if owner == DISCARDED
        )


def tree_authorized(tree: SchemeTree, subset: int) -> bool:
    """Recursive recoverability: a node is accessible when it is a leaf owned
    by the subset, or an Encode node with at least two accessible slots; a
    slot is accessible when all its positions are."""

    def node_ok(node: Node) -> bool:
        if isinstance(node, Leaf):
            return node.owner != DISCARDED and (subset >> node.owner) & 1 == 1
        good = sum(1 for slot in node.slots if all(node_ok(c) for c in slot))
        return good >= 2

    return node_ok(tree.root)


@dataclass(frozen=True)
class SchemeStats:
    total_leaves: int
    discarded_leaves: int
    per_player: tuple[tuple[str, int], ...]
    depth: int
    encode_nodes: int


def stats(tree: SchemeTree) -> SchemeStats:
    counts = {label: 0 for label in tree.labels}
    discarded = 0
    for owner, _ in tree.layout:
        if owner == DISCARDED:
            discarded += 1
        else:
            counts[tree.labels[owner]] += 1

    def count_encodes(node: Node) -> int:
        if isinstance(node, Leaf):
            return 0
        return 1 + sum(count_encodes(c) for slot in node.slots for c in slot)

    return SchemeStats(
        total_leaves=tree.leaf_count,
        discarded_leaves=discarded,
        per_player=tuple(counts.items()),
        depth=tree.depth,
        encode_nodes=count_encodes(tree.root),
    )


# -- builders ------------------------------------------------------------------


def _leaves(owner: int, k: int) -> tuple[Node, ...]:
    return tuple(Leaf(owner) for _ in range(k))


def _omega_chain(payloads: list[Node], central: Node) -> Node:
    """Chain of Encode nodes realizing the central-share family: at every
    level P1 holds the central share; P3 holds share i at level i; the bottom
    level's P2 holds the last share.  Requires >= 2 payload shares."""
    n = len(payloads)
    if n < 2:
        raise SchemeError("omega chain needs at least two shares")
    node: Node = Encode(
        ((central,) * 4, (payloads[n - 1],), (payloads[n - 2],) * 2)
    )
    for d in range(n - 2, 0, -1):
        node = Encode(((central,) * 4, (node,), (payloads[d - 1],) * 2))
    return node


def build_23() -> SchemeTree:
    """The base (2,3) threshold block: one code block split A/B/C."""
    root = Encode((_leaves(0, 4), _leaves(1, 1), _leaves(2, 2)))
    structure = AccessStructure(3, (0b011, 0b101, 0b110), ("A", "B", "C"))
    return SchemeTree.from_root(root, ("A", "B", "C"), structure)


def _omega_structure(n: int) -> AccessStructure:
    labels = tuple(f"A{i + 1}" for i in range(n + 1))
    if n == 1:
        return AccessStructure(2, (0b01,), labels)
    full = (1 << n) - 1
    pairs = tuple((1 << i) | (1 << n) for i in range(n))
    return normalize(n + 1, (full,) + pairs, labels)


def build_omega(n: int) -> SchemeTree:
    """Maximal structure with central share A_{n+1}: authorized sets contain
    either all of A_1..A_n or the central share plus any other share."""
    if n < 1:
        raise SchemeError("build_omega requires n >= 1")
    structure = _omega_structure(n)
    if n == 1:
        # degenerate: the whole qubit goes to A_1, the central share is empty
        return SchemeTree.from_root(Leaf(0), structure.labels, structure)
    root = _omega_chain([Leaf(i) for i in range(n)], Leaf(n))
    return SchemeTree.from_root(root, structure.labels, structure)


def build_nn(n: int) -> SchemeTree:
    """(n,n) threshold scheme: the central-share chain with every central
    leaf discarded, so only the full player set can recover."""
    if n < 2:
        raise SchemeError("build_nn requires n >= 2")
    labels = tuple(f"A{i + 1}" for i in range(n))
    structure = AccessStructure(n, ((1 << n) - 1,), labels)
    root = _omega_chain([Leaf(i) for i in range(n)], Leaf(DISCARDED))
    return SchemeTree.from_root(root, labels, structure)


# -- the general compiler --------------------------------------------------------


def _assign_discards(node: Node, owner: int) -> Node:
    if isinstance(node, Leaf):
        return Leaf(owner) if node.owner == DISCARDED else node
    return Encode(
        tuple(tuple(_assign_discards(c, owner) for c in slot) for slot in node.slots)
    )


def _share_block(members: tuple[int, ...]) -> Node:
    """Share one qubit to a group so that only the whole group recovers it:
    the central-share chain over the members with the central share discarded.
    A single member holds the qubit outright."""
    if len(members) == 1:
        return Leaf(members[0])
    return _omega_chain([Leaf(m) for m in members], Leaf(DISCARDED))


def _compile_node(a: AccessStructure, gmap: tuple[int, ...], depth: int) -> Node:
    if depth > MAX_COMPILE_DEPTH:
        raise SchemeError(
            f"compile recursion exceeded depth cap {MAX_COMPILE_DEPTH}; "
            "the structure expands too deeply"
        )
    ms = a.minimal_sets
    if len(ms) == 1 and ms[0].bit_count() == 1:
        return Leaf(gmap[indices_from_mask(ms[0])[0]])

    if a.is_maximal():
        # purification case: remove the lowest-indexed participating player,
        # compile the reduced structure, then hand every discarded share to
        # the removed player
        union = 0
        for m in ms:
            union |= m
        x = indices_from_mask(union)[0]
        reduced = a.remove_player(x)
        sub_gmap = gmap[:x] + gmap[x + 1 :]
        sub = _compile_node(reduced, sub_gmap, depth + 1)
        return _assign_discards(sub, gmap[x])

    # non-maximal case: one share per minimal set, each spread over its group,
    # plus a central share compiled under the maximalized structure
    blocks = [
        _share_block(tuple(gmap[i] for i in indices_from_mask(m))) for m in ms
    ]
    if len(blocks) == 1:
        return blocks[0]
    central = _compile_node(a.maximalize(), gmap, depth + 1)
    if len(blocks) == 2:
        # two expanded children: first share to P2, second to P3, central to P1
        return Encode(((central,) * 4, (blocks[0],), (blocks[1],) * 2))
    return _omega_chain(blocks, central)


def _count_leaves(node: Node, memo: dict[int, int]) -> int:
    # subtrees are shared objects, so count over the DAG before walking
    cached = memo.get(id(node))
    if cached is not None:
        return cached
    if isinstance(node, Leaf):
        total = 1
    else:
        total = sum(_count_leaves(c, memo) for slot in node.slots for c in slot)
    memo[id(node)] = total
    return total


def compile_structure(a: AccessStructure) -> SchemeTree:
    """Compile an admissible structure into a share tree whose recoverability
    matches ``a.is_authorized`` on every subset."""
    if a.is_empty:
        raise SchemeError("cannot compile an empty structure")
    if not a.is_quantum_admissible():
        raise SchemeError(
            "structure is not quantum-admissible: "
            "two authorized sets are disjoint"
        )
    root = _compile_node(a, tuple(range(a.player_count)), 0)
    count = _count_leaves(root, {})
    if count > MAX_LEAVES:
        raise SchemeError(
            f"compiled tree needs {count} physical qubits, "
            f"above the cap of {MAX_LEAVES}"
        )
    return SchemeTree.from_root(root, a.labels, a)


# -- text format ----------------------------------------------------------------
#
#   players: A B C
#   encode
#     slot P1
#       leaf owner=A
#       ...


def format_tree(tree: SchemeTree) -> str:
    lines = ["players: " + " ".join(tree.labels)]

    def emit(node: Node, indent: int):
        pad = "  " * indent
        if isinstance(node, Leaf):
            name = "DISCARDED" if node.owner == DISCARDED else tree.labels[node.owner]
            lines.append(f"{pad}leaf owner={name}")
            return
        lines.append(f"{pad}encode")
        for slot_name, slot in zip(SLOT_NAMES, node.slots):
            lines.append(f"{pad}  slot {slot_name}")
            for child in slot:
                emit(child, indent + 2)

    emit(tree.root, 0)
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> SchemeTree:
    lines: list[tuple[int, int, str]] = []  # (lineno, indent, content)
    labels: tuple[str, ...] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip())
        if indent % 2:
            raise SchemeError(f"line {lineno}: odd indentation")
        content = stripped.strip()
        if content.startswith("players:"):
            if labels is not None or lines:
                raise SchemeError(f"line {lineno}: players line must come first")
            names = content[len("players:") :].split()
            if not names or len(set(names)) != len(names) or "DISCARDED" in names:
                raise SchemeError(f"line {lineno}: bad players line")
            labels = tuple(names)
            continue
        lines.append((lineno, indent // 2, content))
    if labels is None:
        raise SchemeError("missing players line")
    if not lines:
        raise SchemeError("missing tree body")
    index = {lab: i for i, lab in enumerate(labels)}
    pos = 0

    def parse_node(level: int) -> Node:
        nonlocal pos
        if pos >= len(lines):
            raise SchemeError("unexpected end of tree")
        lineno, indent, content = lines[pos]
        if indent != level:
            raise SchemeError(f"line {lineno}: unexpected indentation")
        if content.startswith("leaf "):
            pos += 1
            if not content.startswith("leaf owner="):
                raise SchemeError(f"line {lineno}: malformed leaf line")
            name = content[len("leaf owner=") :]
            if name == "DISCARDED":
                return Leaf(DISCARDED)
            if name not in index:
                raise SchemeError(f"line {lineno}: unknown owner {name!r}")
            return Leaf(index[name])
        if content != "encode":
            raise SchemeError(f"line {lineno}: expected 'encode' or 'leaf', got {content!r}")
        pos += 1
        slots = []
        for slot_name, width in zip(SLOT_NAMES, SLOT_WIDTHS):
            if pos >= len(lines):
                raise SchemeError(f"line {lineno}: encode node truncated")
            slineno, sindent, scontent = lines[pos]
            if sindent != level + 1 or scontent != f"slot {slot_name}":
                raise SchemeError(f"line {slineno}: expected 'slot {slot_name}'")
            pos += 1
            slots.append(tuple(parse_node(level + 2) for _ in range(width)))
        return Encode(tuple(slots))

    root = parse_node(0)
    if pos != len(lines):
        raise SchemeError(f"line {lines[pos][0]}: trailing content after tree")
    return SchemeTree.from_root(root, labels, None)
