"""Executable privacy verification.

The scheme's privacy claim is distributional: the joint law of the query
and answer must carry no information about the desired class v or the
side-information index set S.  For enumerable instances, audit_exact checks
this exactly: per (v, S) pair it verifies the queries are byte-identical
and reconstructs the full answer distribution by enumerating the server's
randomness, then reports the maximum pairwise total-variation distance
(which must be exactly zero).  For larger instances, audit_statistical
samples the whole experiment and computes a plug-in mutual-information
estimate between (v, S) and a bucketed digest of the wire bytes.

Both audits condition on one fixed message realization.  The formal
constraint includes the stored messages inside the mutual information, but
the query is drawn before seeing them and the answer is a deterministic
function of (query, messages), so independence given the messages is
equivalent to the unconditional statement: I(V,S; Q,A,W) =
I(V,S; W) + I(V,S; Q,A | W) = 0 + I(V,S; Q,A | W).

The audit interface deliberately hands the server the true (v, side) so
that leaky server implementations are expressible; three shipped mutants
(class-biased selection, side-dependent parity row count, class tag in the
answer) demonstrate the audit fails them, making the audit itself testable.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EnumerationCapError, ParameterError
from .model import (
    DatabaseLayout,
    MessageStore,
    as_rng,
    enumerate_side_info_sets,
    random_store,
    sample_side_info,
)
from .protocol import Query, class_plan, uncoded_choice_space, usi_answer, usi_query
from .wire import answer_to_json, canonical_bytes, query_to_json


class UsiServer:
    """Honest server: answers from (query, store, randomness) alone."""

    name = "honest"

    def choice_space(self, query: Query, layout: DatabaseLayout):
        spaces = []
        for mu, k in zip(layout.params.class_sizes, query.side_counts):
            mode, _ = class_plan(mu, k, query.demand)
            if mode == "uncoded":
                spaces.append(uncoded_choice_space(mu, k, query.demand))
            else:
                spaces.append([None])
        return spaces

    def answer_for(self, query, store, choice, v=None, side=None):
        return usi_answer(query, store, selections=choice)

    def answer_random(self, query, store, rng, v=None, side=None):
        spaces = self.choice_space(query, store.layout)
        choice = tuple(space[rng.randrange(len(space))] for space in spaces)
        return self.answer_for(query, store, choice, v=v, side=side)


class ClassBiasedServer(UsiServer):
    """Mutant: pins the desired class's uncoded selection instead of sampling."""

    name = "class-biased-selection"

    def answer_for(self, query, store, choice, v=None, side=None):
        layout = store.layout
        fixed = list(choice)
        if v is not None:
            mu, k = layout.params.class_sizes[v], query.side_counts[v]
            mode, rows = class_plan(mu, k, query.demand)
            if mode == "uncoded":
                fixed[v] = tuple(range(rows))
        return usi_answer(query, store, selections=tuple(fixed))


class SideParityDropServer(UsiServer):
    """Mutant: drops a parity row for half the side sets.

    The drop condition is the parity of the held messages' within-class
    positions, which always splits a nontrivial side family (flip one held
    position and the parity flips), so the leak is present whenever there
    is anything to leak.
    """

    name = "side-parity-drop"

    def answer_for(self, query, store, choice, v=None, side=None):
        answer = usi_answer(query, store, selections=choice)
        if side is None or not side.label_set:
            return answer
        layout = store.layout
        if sum(layout.position_of(lab) for lab in side.label_set) % 2:
            return answer
        payloads = list(answer.payloads)
        for i, p in enumerate(payloads):
            if p.mode == "parity" and p.symbols:
                payloads[i] = type(p)(
                    class_id=p.class_id,
                    mode=p.mode,
                    labels=p.labels,
                    identifier_order=p.identifier_order,
                    code_length=p.code_length,
                    symbols=p.symbols[:-1],
                )
                break
        return type(answer)(
            q=answer.q, msg_len=answer.msg_len, payloads=tuple(payloads),
            extras=answer.extras,
        )


class ClassTagServer(UsiServer):
    """Mutant: appends the desired class to the answer metadata."""

    name = "class-tag"

    def answer_for(self, query, store, choice, v=None, side=None):
        answer = usi_answer(query, store, selections=choice)
        tag = 0 if v is None else v % store.layout.params.q
        return type(answer)(
            q=answer.q, msg_len=answer.msg_len, payloads=answer.payloads,
            extras=answer.extras + (("class-hint", tag),),
        )


MUTANT_SERVERS = (ClassBiasedServer, SideParityDropServer, ClassTagServer)


@dataclass(frozen=True)
class AuditVerdict:
    mode: str  # "exact" | "statistical"
    verdict: str  # "pass" | "fail"
    query_invariant: bool
    answer_tv_distance: Fraction | None = None
    tv_table: tuple = ()
    mi_estimate: float | None = None
    mi_threshold: float | None = None
    trials: int = 0
    buckets: int = 0
    server: str = "honest"
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        doc = {
            "mode": self.mode,
            "verdict": self.verdict,
            "query_invariant": self.query_invariant,
            "server": self.server,
        }
        if self.mode == "exact":
            tv = self.answer_tv_distance
            doc["answer_tv_distance"] = {"num": tv.numerator, "den": tv.denominator}
            doc["tv_table"] = [
                {
                    "first": list(a),
                    "second": list(b),
                    "tv": {"num": t.numerator, "den": t.denominator},
                }
                for a, b, t in self.tv_table
            ]
        else:
            doc["mi_estimate"] = self.mi_estimate
            doc["mi_threshold"] = self.mi_threshold
            doc["trials"] = self.trials
            doc["buckets"] = self.buckets
        doc.update(self.notes)
        return doc


def exact_audit_work(layout: DatabaseLayout, demand: int = 1) -> int:
    """|side family| * num_classes * server randomness support."""
    params = layout.params
    support = 1
    for mu, k in zip(params.class_sizes, params.side_counts):
        mode, _ = class_plan(mu, k, demand)
        if mode == "uncoded":
            support *= math.comb(mu, k + demand)
    return params.side_family_size() * params.num_classes * support


def audit_exact(
    store: MessageStore,
    server: UsiServer | None = None,
    cap: int = 50_000,
    demand: int = 1,
) -> AuditVerdict:
    """Enumerate every (v, S) pair and the server's randomness exactly."""
    server = server or UsiServer()
    layout = store.layout
    params = layout.params
    work = exact_audit_work(layout, demand)
    if work > cap:
        raise EnumerationCapError(
            f"exact audit needs {work} enumerations (cap {cap}); "
            "fall back to audit_statistical"
        )
    sides = enumerate_side_info_sets(layout, cap=cap)
    query_bytes = set()
    distributions = {}
    for v in range(params.num_classes):
        for s_idx, side in enumerate(sides):
            query = usi_query(v, side, demand=demand)
            query_bytes.add(canonical_bytes(query_to_json(query)))
            spaces = server.choice_space(query, layout)
            counts = {}
            total = 0
            for choice in itertools.product(*spaces):
                answer = server.answer_for(query, store, choice, v=v, side=side)
                blob = canonical_bytes(answer_to_json(answer))
                counts[blob] = counts.get(blob, 0) + 1
                total += 1
            key = tuple(sorted(counts.items()))
            distributions.setdefault(key, []).append((v, s_idx, counts, total))
    query_invariant = len(query_bytes) == 1

    # pairs with identical distributions have distance zero, so the table
    # lists one entry per pair of distinct distributions; `groups` records
    # which (v, side-index) pairs share a distribution
    reps = list(distributions.values())
    max_tv = Fraction(0)
    table = []
    for (group_a, group_b) in itertools.combinations(reps, 2):
        va, sa, counts_a, total_a = group_a[0]
        vb, sb, counts_b, total_b = group_b[0]
        keys = set(counts_a) | set(counts_b)
        diff = sum(
            abs(counts_a.get(x, 0) * total_b - counts_b.get(x, 0) * total_a)
            for x in keys
        )
        tv = Fraction(diff, 2 * total_a * total_b)
        table.append(((va, sa), (vb, sb), tv))
        max_tv = max(max_tv, tv)
    passed = query_invariant and max_tv == 0
    return AuditVerdict(
        mode="exact",
        verdict="pass" if passed else "fail",
        query_invariant=query_invariant,
        answer_tv_distance=max_tv,
        tv_table=tuple(table),
        server=server.name,
        notes={
            "pairs": params.num_classes * len(sides),
            "work": work,
            "groups": [[(v, s) for v, s, _, _ in group] for group in reps],
        },
    )


def _plugin_mi_qary(counts, q: int) -> float:
    """Plug-in mutual information of a joint histogram, in q-ary units."""
    n = sum(counts.values())
    margin_x = {}
    margin_y = {}
    for (x, y), c in counts.items():
        margin_x[x] = margin_x.get(x, 0) + c
        margin_y[y] = margin_y.get(y, 0) + c
    mi = 0.0
    for (x, y), c in counts.items():
        mi += (c / n) * math.log(c * n / (margin_x[x] * margin_y[y]))
    return mi / math.log(q)


def audit_statistical(
    layout: DatabaseLayout,
    trials: int,
    seed,
    server: UsiServer | None = None,
    buckets: int = 64,
    demand: int = 1,
    blocks: int = 16,
) -> AuditVerdict:
    """Sampled audit for instances too large to enumerate.

    Trials are grouped into blocks; each block draws one store and one
    server randomness realization from the model's priors, then varies
    (v, S) across its trials.  This pairing is what gives the estimator
    power: for an honest server the digest of the wire bytes is constant
    inside a block (the answer reads nothing but query, store and its own
    randomness), so the plug-in mutual information between (v, S) and the
    digest is exactly zero, while a server that leaks even one symbol of v
    or S shifts the digest within blocks and contributes roughly the
    leaked entropy.  Without the pairing, fresh store randomness hashed
    into the digest would mask any leak.

    The estimate is the block-conditional plug-in mutual information in
    q-ary units; the pass threshold is twice its first-order bias bound,
    sum_b w_b (Kx_b - 1)(Ky_b - 1) / (N_b ln q), floored at one
    pseudo-count 1/(N ln q).
    """
    if trials < 1:
        raise ParameterError("trials must be positive")
    server = server or UsiServer()
    params = layout.params
    rng = as_rng(seed)
    blocks = max(1, min(blocks, trials))
    sizes = [trials // blocks + (1 if b < trials % blocks else 0) for b in range(blocks)]
    query_blobs = set()
    mi_sum = 0.0
    bias_sum = 0.0
    kx_max = ky_max = 0
    for n_b in sizes:
        store = random_store(layout, rng)
        probe = usi_query(0, sample_side_info(layout, rng), demand=demand)
        spaces = server.choice_space(probe, layout)
        choice = tuple(space[rng.randrange(len(space))] for space in spaces)
        counts = {}
        for _ in range(n_b):
            v = rng.randrange(params.num_classes)
            side = sample_side_info(layout, rng)
            query = usi_query(v, side, demand=demand)
            answer = server.answer_for(query, store, choice, v=v, side=side)
            qb = canonical_bytes(query_to_json(query))
            query_blobs.add(qb)
            digest = hashlib.blake2b(
                qb + canonical_bytes(answer_to_json(answer)), digest_size=8
            ).digest()
            y = int.from_bytes(digest, "big") % buckets
            x = (v, side.label_set)
            counts[(x, y)] = counts.get((x, y), 0) + 1
        w = n_b / trials
        mi_sum += w * _plugin_mi_qary(counts, params.q)
        kx = len({x for x, _ in counts})
        ky = len({y for _, y in counts})
        kx_max = max(kx_max, kx)
        ky_max = max(ky_max, ky)
        bias_sum += w * (kx - 1) * (ky - 1) / (n_b * math.log(params.q))
    threshold = max(bias_sum, 1 / (trials * math.log(params.q)))
    query_invariant = len(query_blobs) == 1
    passed = query_invariant and mi_sum < threshold
    return AuditVerdict(
        mode="statistical",
        verdict="pass" if passed else "fail",
        query_invariant=query_invariant,
        mi_estimate=mi_sum,
        mi_threshold=threshold,
        trials=trials,
        buckets=buckets,
        server=server.name,
        notes={"alphabet_x": kx_max, "alphabet_y": ky_max, "blocks": blocks},
    )


def audit_fsi_query_exact(layout: DatabaseLayout, cap: int = 50_000) -> AuditVerdict:
    """V-invariance of the positional-scheme query distribution.

    The positional query necessarily depends on the held positions, so the
    check marginalizes over the side-information prior and the scheme's
    random picks: for each v, enumerate (S, drop choice, picks) with exact
    weights and compare the resulting wire-query distributions across v.
    """
    from fractions import Fraction as F

    from .model import positional_side_info

    params = layout.params
    sides = enumerate_side_info_sets(layout, cap=cap)
    side_weight = F(1, len(sides))
    dists = []
    for v in range(params.num_classes):
        dist = {}
        for side in sides:
            pos_side = positional_side_info(layout, side)
            positions = [set() for _ in range(params.num_classes)]
            for i, p in pos_side.label_set:
                positions[i].add(p)
            side_classes = [i for i in range(params.num_classes) if positions[i]]
            if v in side_classes:
                drop_options = [None]
            elif side_classes:
                drop_options = side_classes
            else:
                drop_options = [None]
            drop_weight = side_weight / len(drop_options)
            for drop in drop_options:
                pinned = [i for i in side_classes if i not in (v, drop)]
                per_class = []
                for i, mu in enumerate(params.class_sizes):
                    if i == v:
                        opts = [p for p in range(mu) if p not in positions[i]]
                    elif i in pinned:
                        opts = sorted(positions[i])
                    else:
                        opts = list(range(mu))
                    per_class.append(opts)
                pick_count = math.prod(len(o) for o in per_class)
                w = drop_weight / pick_count
                eta = max(len(side_classes), 1)
                for picks in itertools.product(*per_class):
                    query = Query(scheme="fsi", picks=picks, known_count=eta - 1)
                    blob = canonical_bytes(query_to_json(query))
                    dist[blob] = dist.get(blob, F(0)) + w
        dists.append(dist)
    max_tv = F(0)
    for a, b in itertools.combinations(range(len(dists)), 2):
        keys = set(dists[a]) | set(dists[b])
        tv = sum(abs(dists[a].get(x, F(0)) - dists[b].get(x, F(0))) for x in keys) / 2
        max_tv = max(max_tv, tv)
    passed = max_tv == 0
    return AuditVerdict(
        mode="exact",
        verdict="pass" if passed else "fail",
        query_invariant=passed,
        answer_tv_distance=max_tv,
        server="fsi-user",
        notes={"scope": "query-marginal-v-invariance"},
    )
