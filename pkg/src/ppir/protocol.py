"""Retrieval protocols: query, answer and decode for the three variants.

Unidentified side information (scheme "usi"): the user reveals only the
per-class side counts {k_i}.  The server answers class by class: when
k_i + 1 < mu_i - k_i it sends k_i + 1 uniformly random messages of the class
uncoded (with their label pairs); otherwise it encodes the whole class with
a systematic [2*mu_i - k_i, mu_i] MDS code and sends the mu_i - k_i parity
rows.  Either way the user ends up with at least one new message per class,
and the query and answer never depend on the desired class or on which
particular messages the user holds, only on the public counts.

Parity payload headers carry the class's identifier list in systematic
order plus the code length.  The user is oblivious of class sizes and
positions, so decoding needs this metadata; handing it over is harmless
because privacy constrains the server's view, not the user's.

The multi-message scheme ("musi", demand lambda >= 1) generalizes the
branch rule with k_i + lambda in place of k_i + 1 and requires
mu_i >= k_i + lambda.  The fully-identifiable scheme ("fsi") instead picks
one position per class (side-information positions where known, uniform
otherwise), and the server responds with the parity rows of a single
[2*Gamma - eta + 1, Gamma] code across the picked messages.

Servers and users are pure functions of their inputs and seeds; a session
is query -> answer -> decode, and independent sessions share no state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DecodeMetadataError,
    InsufficientInformationError,
    ParameterError,
    ProtocolViolationError,
    UnsupportedParametersError,
)
from .mds import make_mds
from .model import MessageStore, SideInfo, as_rng


@dataclass(frozen=True)
class Query:
    scheme: str  # "usi" | "musi" | "fsi"
    side_counts: tuple[int, ...] | None = None
    demand: int = 1
    picks: tuple[int, ...] | None = None  # fsi: one position per class
    known_count: int | None = None  # fsi: how many picks the user can name
    # fsi, user-local decode hint; never serialized (would reveal which picks
    # are side information to anyone reading the wire)
    known_flags: tuple[bool, ...] | None = None


@dataclass(frozen=True)
class ClassPayload:
    class_id: int
    mode: str  # "uncoded" | "parity"
    labels: tuple[tuple[int, int], ...] | None
    identifier_order: tuple[int, ...] | None
    code_length: int | None
    symbols: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class JointPayload:
    """Cross-class parity block used by the fsi scheme."""

    picks: tuple[int, ...]
    known_count: int
    code_length: int
    symbols: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Answer:
    q: int
    msg_len: int
    payloads: tuple
    extras: tuple = ()  # empty for honest servers; audited byte-for-byte


@dataclass(frozen=True)
class RetrievalResult:
    decoded: tuple  # ((class, identifier-or-position), symbols) for new messages
    new_from_class: tuple[int, ...]

    @property
    def total_new(self) -> int:
        return sum(self.new_from_class)


def class_plan(mu: int, k: int, demand: int = 1):
    """Per-class branch: ("uncoded", rows) or ("parity", rows)."""
    if mu < k + demand:
        raise UnsupportedParametersError(
            f"class of size {mu} cannot yield {demand} new messages past {k} held"
        )
    if k + demand < mu - k:
        return "uncoded", k + demand
    return "parity", mu - k


def expected_download_rows(class_sizes, side_counts, demand: int = 1) -> int:
    return sum(
        min(k + demand, mu - k) for mu, k in zip(class_sizes, side_counts)
    )


# --- unidentified side information -----------------------------------------


def usi_query(v: int, side: SideInfo, demand: int = 1) -> Query:
    """The query is the count profile alone; v never enters it."""
    if demand < 1:
        raise ParameterError("demand must be at least 1")
    scheme = "usi" if demand == 1 else "musi"
    return Query(scheme=scheme, side_counts=tuple(side.per_class_counts), demand=demand)


def uncoded_choice_space(mu: int, k: int, demand: int = 1):
    """All position subsets the server may send for an uncoded class."""
    return list(itertools.combinations(range(mu), k + demand))


def usi_answer(query: Query, store: MessageStore, seed=None, selections=None) -> Answer:
    """Build the per-class answer.

    selections optionally fixes the uncoded position subsets (one tuple per
    class, None for parity classes); the exact privacy audit uses it to
    enumerate the server's randomness instead of sampling it.
    """
    if query.scheme not in ("usi", "musi"):
        raise ParameterError(f"not a count-profile query: {query.scheme}")
    layout = store.layout
    params = layout.params
    if len(query.side_counts) != params.num_classes:
        raise ParameterError("query count profile does not match the database")
    rng = as_rng(seed) if selections is None else None
    payloads = []
    for i, (mu, k) in enumerate(zip(params.class_sizes, query.side_counts)):
        mode, rows = class_plan(mu, k, query.demand)
        if mode == "uncoded":
            if selections is None:
                pos = tuple(sorted(rng.sample(range(mu), rows)))
            else:
                pos = tuple(selections[i])
            payloads.append(
                ClassPayload(
                    class_id=i,
                    mode="uncoded",
                    labels=tuple((i, layout.labels[i][p]) for p in pos),
                    identifier_order=None,
                    code_length=None,
                    symbols=tuple(store.messages[layout.class_members[i][p]] for p in pos),
                )
            )
        else:
            n = 2 * mu - k
            if n > params.q:
                raise UnsupportedParametersError(
                    f"class {i} needs a [{n}, {mu}] code but q={params.q}"
                )
            code = make_mds(n, mu, params.q)
            class_rows = [store.messages[m] for m in layout.class_members[i]]
            payloads.append(
                ClassPayload(
                    class_id=i,
                    mode="parity",
                    labels=None,
                    identifier_order=layout.labels[i],
                    code_length=n,
                    symbols=tuple(code.parity_rows(class_rows)),
                )
            )
    return Answer(q=params.q, msg_len=params.msg_len, payloads=tuple(payloads))


def decode_answer(
    answer: Answer,
    side: SideInfo,
    side_values,
    demand: int = 1,
    code_factory=make_mds,
) -> RetrievalResult:
    """Recover every new message the answer yields, class by class.

    side_values maps each side-information label pair to its held symbols.
    code_factory builds the (n, k, q) erasure code named by parity headers.
    """
    side_labels = set(side.label_set)
    decoded = []
    counts = {}
    for payload in answer.payloads:
        if isinstance(payload, JointPayload):
            raise ParameterError("joint payloads decode via fsi_decode")
        i = payload.class_id
        if payload.mode == "uncoded":
            new = [
                (lab, tuple(row))
                for lab, row in zip(payload.labels, payload.symbols)
                if lab not in side_labels
            ]
            if len(new) < demand:
                raise ProtocolViolationError(
                    f"uncoded class {i} yields {len(new)} new messages, expected >= {demand}"
                )
        else:
            idents = payload.identifier_order
            mu = len(idents)
            n = payload.code_length
            pos_of = {a: p for p, a in enumerate(idents)}
            mine = side.labels_in_class(i)
            known = []
            for lab in mine:
                if lab[1] not in pos_of:
                    raise DecodeMetadataError(
                        f"held label {lab} missing from the class {i} header"
                    )
                known.append((pos_of[lab[1]], side_values[lab]))
            known.extend(
                (mu + r, row) for r, row in enumerate(payload.symbols)
            )
            if len(known) < mu:
                raise ProtocolViolationError(
                    f"class {i} decode is underdetermined ({len(known)} of {mu} rows)"
                )
            code = code_factory(n, mu, answer.q)
            try:
                full = code.erasure_decode(known)
            except InsufficientInformationError as exc:
                raise ProtocolViolationError(str(exc)) from exc
            held_pos = {pos_of[lab[1]] for lab in mine}
            new = [
                ((i, idents[p]), full[p])
                for p in range(mu)
                if p not in held_pos
            ]
            if len(new) < demand:
                raise ProtocolViolationError(
                    f"parity class {i} yields {len(new)} new messages, expected >= {demand}"
                )
        decoded.extend(new)
        counts[i] = len(new)
    order = sorted(counts)
    if order != list(range(len(order))):
        raise ProtocolViolationError(f"answer does not cover classes 0..{len(order) - 1}")
    return RetrievalResult(tuple(decoded), tuple(counts[i] for i in order))


def usi_decode(
    answer: Answer, side: SideInfo, side_values, v: int, code_factory=make_mds
) -> RetrievalResult:
    result = decode_answer(answer, side, side_values, demand=1, code_factory=code_factory)
    if result.new_from_class[v] < 1:
        raise ProtocolViolationError(f"no new message from desired class {v}")
    return result


# --- multi-message variant ---------------------------------------------------


def musi_answer(query: Query, store: MessageStore, seed=None, selections=None) -> Answer:
    if query.demand < 1:
        raise ParameterError("demand must be at least 1")
    return usi_answer(query, store, seed=seed, selections=selections)


def musi_decode(
    answer: Answer, side: SideInfo, side_values, desired_classes, demand: int
) -> RetrievalResult:
    result = decode_answer(answer, side, side_values, demand=demand)
    for v in desired_classes:
        if result.new_from_class[v] < demand:
            raise ProtocolViolationError(
                f"class {v} yielded {result.new_from_class[v]} < {demand} new messages"
            )
    return result


# --- fully identifiable side information -------------------------------------


def fsi_query(v: int, side: SideInfo, class_sizes, seed=None) -> Query:
    """Pick one position per class; side-information positions where known.

    side must be position-keyed (see model.positional_side_info).  The
    number of pinned picks is eta - 1 with eta = max(#side classes, 1): when
    the desired class holds side information the other side classes are
    pinned, otherwise one side class is dropped at random so the pinned
    count never depends on v.
    """
    rng = as_rng(seed)
    num_classes = len(class_sizes)
    positions = [set() for _ in range(num_classes)]
    for i, p in side.label_set:
        positions[i].add(p)
    side_classes = [i for i in range(num_classes) if positions[i]]
    eta = max(len(side_classes), 1)
    if v in side_classes:
        pinned = [i for i in side_classes if i != v]
    elif side_classes:
        drop = rng.choice(side_classes)
        pinned = [i for i in side_classes if i != drop]
    else:
        pinned = []
    picks = []
    flags = []
    for i, mu in enumerate(class_sizes):
        if i == v:
            fresh = [p for p in range(mu) if p not in positions[i]]
            if not fresh:
                raise ParameterError(
                    f"desired class {v} has no new message (size {mu}, all held)"
                )
            picks.append(rng.choice(fresh))
            flags.append(False)
        elif i in pinned:
            picks.append(rng.choice(sorted(positions[i])))
            flags.append(True)
        else:
            picks.append(rng.randrange(mu))
            flags.append(False)
    return Query(
        scheme="fsi",
        picks=tuple(picks),
        known_count=eta - 1,
        known_flags=tuple(flags),
    )


def fsi_answer(query: Query, store: MessageStore) -> Answer:
    """Parity rows of one [2*Gamma - eta + 1, Gamma] code over the picks."""
    if query.scheme != "fsi":
        raise ParameterError(f"not an fsi query: {query.scheme}")
    layout = store.layout
    params = layout.params
    num_classes = params.num_classes
    if len(query.picks) != num_classes:
        raise ParameterError("fsi query must pick one position per class")
    n = 2 * num_classes - query.known_count
    if n > params.q:
        raise UnsupportedParametersError(
            f"joint code needs length {n} but q={params.q}"
        )
    code = make_mds(n, num_classes, params.q)
    rows = [
        store.messages[layout.class_members[i][p]]
        for i, p in enumerate(query.picks)
    ]
    return Answer(
        q=params.q,
        msg_len=params.msg_len,
        payloads=(
            JointPayload(
                picks=query.picks,
                known_count=query.known_count,
                code_length=n,
                symbols=tuple(code.parity_rows(rows)),
            ),
        ),
    )


def fsi_decode(
    answer: Answer, query: Query, side: SideInfo, side_values, v: int, code_factory=make_mds
) -> RetrievalResult:
    """Place known picks at their systematic slots, erasure-decode, read off v."""
    if len(answer.payloads) != 1 or not isinstance(answer.payloads[0], JointPayload):
        raise ProtocolViolationError("fsi answer must carry a single joint payload")
    payload = answer.payloads[0]
    num_classes = len(payload.picks)
    positions = [set() for _ in range(num_classes)]
    for i, p in side.label_set:
        positions[i].add(p)
    known = []
    for i, p in enumerate(payload.picks):
        if p in positions[i]:
            known.append((i, side_values[(i, p)]))
    known.extend(
        (num_classes + r, row) for r, row in enumerate(payload.symbols)
    )
    if len(known) < num_classes:
        raise ProtocolViolationError(
            f"fsi decode is underdetermined ({len(known)} of {num_classes} rows)"
        )
    code = code_factory(payload.code_length, num_classes, answer.q)
    try:
        full = code.erasure_decode(known)
    except InsufficientInformationError as exc:
        raise ProtocolViolationError(str(exc)) from exc
    decoded = []
    counts = [0] * num_classes
    for i, p in enumerate(payload.picks):
        if p not in positions[i]:
            decoded.append(((i, p), full[i]))
            counts[i] = 1
    if counts[v] < 1:
        raise ProtocolViolationError(f"fsi pick for class {v} was not new")
    return RetrievalResult(tuple(decoded), tuple(counts))


# --- cost accounting ----------------------------------------------------------


def download_cost(answer: Answer) -> int:
    """Total downloaded symbols."""
    return sum(len(p.symbols) * answer.msg_len for p in answer.payloads)


def achieved_rate(answer: Answer, msg_len: int) -> Fraction:
    """Message length over download cost, as an exact rational."""
    if msg_len != answer.msg_len:
        raise ParameterError("msg_len does not match the answer")
    return Fraction(msg_len, download_cost(answer))
