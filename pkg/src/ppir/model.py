"""Database-side world model: messages, class partition, labels, side info.

A database stores f messages of L symbols each over GF(q), partitioned into
Gamma >= 2 disjoint classes of sizes mu_1..mu_Gamma.  The class assignment
(which message index sits at which position of which class) is private to
the database; the public handle on a message is its label pair
(class index, identifier), with identifiers drawn at random from a wide
range so they reveal nothing about positions, class sizes or f.

Side information is a set of held messages with exactly k_i of them from
class i.  The user-facing view of side information is the label-pair set
plus the per-class counts; the underlying index set exists only for
auditing and never feeds the decoding path.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from .errors import EnumerationCapError, ParameterError

DEFAULT_IDENTIFIER_RANGE = (1, 2**32)


def as_rng(seed) -> random.Random:
    """Accept a seed or an existing random.Random."""
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


@dataclass(frozen=True)
class InstanceParams:
    """Shape of one problem instance.

    class_sizes: mu_i, one entry per class (at least two classes).
    side_counts: k_i with 0 <= k_i <= mu_i - 1, so every class keeps at
        least one message the user does not hold.
    msg_len:     symbols per message.
    q:           field order for the stored symbols.
    """

    class_sizes: tuple[int, ...]
    side_counts: tuple[int, ...]
    msg_len: int = 1
    q: int = 2

    def __post_init__(self):
        object.__setattr__(self, "class_sizes", tuple(int(m) for m in self.class_sizes))
        object.__setattr__(self, "side_counts", tuple(int(k) for k in self.side_counts))
        if len(self.class_sizes) < 2:
            raise ParameterError("at least two classes are required")
        if len(self.side_counts) != len(self.class_sizes):
            raise ParameterError("side_counts must have one entry per class")
        for mu, k in zip(self.class_sizes, self.side_counts):
            if mu < 1:
                raise ParameterError("class sizes must be positive")
            if k < 0:
                raise ParameterError("side counts must be nonnegative")
            if mu < k + 1:
                raise ParameterError(
                    f"class of size {mu} with {k} side messages leaves nothing new "
                    "(mixed side information regime is out of protocol scope)"
                )
        if self.msg_len < 1:
            raise ParameterError("msg_len must be positive")
        if self.q < 2:
            raise ParameterError("q must be at least 2")

    @property
    def num_classes(self) -> int:
        return len(self.class_sizes)

    @property
    def num_messages(self) -> int:
        return sum(self.class_sizes)

    @property
    def total_side(self) -> int:
        return sum(self.side_counts)

    def side_family_size(self) -> int:
        out = 1
        for mu, k in zip(self.class_sizes, self.side_counts):
            out *= math.comb(mu, k)
        return out


@dataclass(frozen=True)
class DatabaseLayout:
    """Private index mapping of one database instance.

    class_members[i] is the ordered tuple of message indices in class i
    (position within the tuple is the sub-class position); labels[i] holds
    the matching random identifiers.
    """

    params: InstanceParams
    class_members: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[int, ...], ...]
    _pos_by_label: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        f = self.params.num_messages
        seen = [m for members in self.class_members for m in members]
        if sorted(seen) != list(range(f)):
            raise ParameterError("class members must partition the message indices")
        for members, labs, mu in zip(self.class_members, self.labels, self.params.class_sizes):
            if len(members) != mu or len(labs) != mu:
                raise ParameterError("class member/label lengths must match class sizes")
            if len(set(labs)) != mu:
                raise ParameterError("identifiers must be unique within a class")
        pos = {}
        for i, labs in enumerate(self.labels):
            for p, ident in enumerate(labs):
                pos[(i, ident)] = p
        object.__setattr__(self, "_pos_by_label", pos)

    @property
    def class_of(self) -> tuple[int, ...]:
        out = [0] * self.params.num_messages
        for i, members in enumerate(self.class_members):
            for m in members:
                out[m] = i
        return tuple(out)

    def position_of(self, label) -> int:
        return self._pos_by_label[label]

    def index_of(self, label) -> int:
        i, _ = label
        return self.class_members[i][self.position_of(label)]


@dataclass(frozen=True)
class MessageStore:
    layout: DatabaseLayout
    messages: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        p = self.layout.params
        if len(self.messages) != p.num_messages:
            raise ParameterError("store must hold one row per message")
        for row in self.messages:
            if len(row) != p.msg_len:
                raise ParameterError("message rows must have msg_len symbols")
            for s in row:
                if not 0 <= s < p.q:
                    raise ParameterError("symbols must lie in [0, q)")

    def message_for(self, label):
        return self.messages[self.layout.index_of(label)]


@dataclass(frozen=True)
class SideInfo:
    """User-side view of held messages: label pairs and per-class counts.

    The raw index set is audit-only; decoding code must not touch it.
    """

    per_class_counts: tuple[int, ...]
    label_set: tuple[tuple[int, int], ...]
    _indices: tuple[int, ...] = field(repr=False)

    def audit_index_set(self) -> tuple[int, ...]:
        return self._indices

    def labels_in_class(self, i: int):
        return tuple(lab for lab in self.label_set if lab[0] == i)


def build_layout(params: InstanceParams, seed, identifier_range=DEFAULT_IDENTIFIER_RANGE):
    """Uniformly random class assignment plus fresh identifiers."""
    rng = as_rng(seed)
    lo, hi = identifier_range
    span = hi - lo + 1
    if any(mu > span for mu in params.class_sizes):
        raise ParameterError("identifier range too small for the class sizes")
    indices = list(range(params.num_messages))
    rng.shuffle(indices)
    members = []
    labels = []
    at = 0
    for mu in params.class_sizes:
        members.append(tuple(indices[at: at + mu]))
        at += mu
        seen = set()
        labs = []
        while len(labs) < mu:
            v = rng.randint(lo, hi)
            if v not in seen:
                seen.add(v)
                labs.append(v)
        labels.append(tuple(labs))
    return DatabaseLayout(params, tuple(members), tuple(labels))


def random_store(layout: DatabaseLayout, seed) -> MessageStore:
    """Independent uniform symbols for every message."""
    rng = as_rng(seed)
    p = layout.params
    rows = tuple(
        tuple(rng.randrange(p.q) for _ in range(p.msg_len))
        for _ in range(p.num_messages)
    )
    return MessageStore(layout, rows)


def _side_from_positions(layout: DatabaseLayout, positions_by_class) -> SideInfo:
    labels = []
    indices = []
    counts = []
    for i, positions in enumerate(positions_by_class):
        counts.append(len(positions))
        for p in positions:
            labels.append((i, layout.labels[i][p]))
            indices.append(layout.class_members[i][p])
    return SideInfo(tuple(counts), tuple(sorted(labels)), tuple(sorted(indices)))


def _validate_counts(layout, side_counts):
    params = layout.params
    counts = params.side_counts if side_counts is None else tuple(side_counts)
    if len(counts) != params.num_classes:
        raise ParameterError("side_counts must have one entry per class")
    for mu, k in zip(params.class_sizes, counts):
        if not 0 <= k <= mu:
            raise ParameterError(f"side count {k} invalid for class of size {mu}")
    return counts


def sample_side_info(layout: DatabaseLayout, seed, side_counts=None) -> SideInfo:
    """Uniform draw over all side-information sets with the given profile."""
    rng = as_rng(seed)
    counts = _validate_counts(layout, side_counts)
    positions = [
        tuple(sorted(rng.sample(range(mu), k)))
        for mu, k in zip(layout.params.class_sizes, counts)
    ]
    return _side_from_positions(layout, positions)


def enumerate_side_info_sets(layout: DatabaseLayout, side_counts=None, cap=100_000):
    """All side-information sets with the given profile, in canonical order."""
    counts = _validate_counts(layout, side_counts)
    total = 1
    for mu, k in zip(layout.params.class_sizes, counts):
        total *= math.comb(mu, k)
    if total > cap:
        raise EnumerationCapError(f"{total} side-information sets exceed cap {cap}")
    per_class = [
        list(itertools.combinations(range(mu), k))
        for mu, k in zip(layout.params.class_sizes, counts)
    ]
    return [
        _side_from_positions(layout, combo)
        for combo in itertools.product(*per_class)
    ]


def held_messages(store: MessageStore, side: SideInfo) -> dict:
    """Hand the user the message values for its side-information labels.

    Models the acquisition phase: the database (which knows the mapping)
    serves label-addressed messages; the user then only ever works with
    labels and values.
    """
    return {lab: store.message_for(lab) for lab in side.label_set}


def positional_side_info(layout: DatabaseLayout, side: SideInfo) -> SideInfo:
    """Re-key side information by within-class position instead of identifier.

    Used by the fully-identifiable variant, where the user knows each held
    message's position inside its ordered class.
    """
    labels = tuple(sorted((i, layout.position_of((i, a))) for i, a in side.label_set))
    return SideInfo(side.per_class_counts, labels, side.audit_index_set())
