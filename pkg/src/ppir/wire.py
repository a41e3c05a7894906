"""Canonical JSON wire formats.

Every document carries a "format" tag with a version suffix; readers reject
unknown tags.  Canonical bytes are json.dumps with sorted keys and compact
separators, so byte-identity comparisons (privacy audits, replay) are
deterministic.  Symbols serialize as plain integers in [0, q).
"""

from __future__ import annotations

import json

from .errors import WireFormatError
from .model import DatabaseLayout, InstanceParams, MessageStore, SideInfo
from .protocol import Answer, ClassPayload, JointPayload, Query

QUERY_FORMAT = "ppir.query/1"
ANSWER_FORMAT = "ppir.answer/1"
SIDE_FORMAT = "ppir.side/1"
DATABASE_FORMAT = "ppir.database/1"
CODE_FORMAT = "ppir.code/1"


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def _expect(doc, fmt):
    if not isinstance(doc, dict) or doc.get("format") != fmt:
        raise WireFormatError(f"expected a {fmt} document")
    return doc


# --- query --------------------------------------------------------------------


def query_to_json(query: Query) -> dict:
    doc = {"format": QUERY_FORMAT, "scheme": query.scheme}
    if query.scheme in ("usi", "musi"):
        doc["side_counts"] = list(query.side_counts)
        doc["demand"] = query.demand
    elif query.scheme == "fsi":
        # known_flags stay user-local; the wire carries picks and the count
        doc["picks"] = list(query.picks)
        doc["known_count"] = query.known_count
    else:
        raise WireFormatError(f"unknown scheme {query.scheme!r}")
    return doc


def query_from_json(doc: dict) -> Query:
    _expect(doc, QUERY_FORMAT)
    scheme = doc.get("scheme")
    try:
        if scheme in ("usi", "musi"):
            return Query(
                scheme=scheme,
                side_counts=tuple(int(k) for k in doc["side_counts"]),
                demand=int(doc["demand"]),
            )
        if scheme == "fsi":
            return Query(
                scheme="fsi",
                picks=tuple(int(p) for p in doc["picks"]),
                known_count=int(doc["known_count"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed query document: {exc}") from exc
    raise WireFormatError(f"unknown scheme {scheme!r}")


# --- answer -------------------------------------------------------------------


def _payload_to_json(payload) -> dict:
    if isinstance(payload, ClassPayload):
        doc = {"class_id": payload.class_id, "mode": payload.mode,
               "symbols": [list(r) for r in payload.symbols]}
        if payload.mode == "uncoded":
            doc["labels"] = [list(lab) for lab in payload.labels]
        else:
            doc["identifier_order"] = list(payload.identifier_order)
            doc["code_length"] = payload.code_length
        return doc
    if isinstance(payload, JointPayload):
        return {
            "mode": "joint-parity",
            "picks": list(payload.picks),
            "known_count": payload.known_count,
            "code_length": payload.code_length,
            "symbols": [list(r) for r in payload.symbols],
        }
    raise WireFormatError(f"unknown payload type {type(payload).__name__}")


def _payload_from_json(doc: dict):
    try:
        mode = doc["mode"]
        symbols = tuple(tuple(int(s) for s in row) for row in doc["symbols"])
        if mode == "uncoded":
            return ClassPayload(
                class_id=int(doc["class_id"]),
                mode="uncoded",
                labels=tuple((int(i), int(a)) for i, a in doc["labels"]),
                identifier_order=None,
                code_length=None,
                symbols=symbols,
            )
        if mode == "parity":
            return ClassPayload(
                class_id=int(doc["class_id"]),
                mode="parity",
                labels=None,
                identifier_order=tuple(int(a) for a in doc["identifier_order"]),
                code_length=int(doc["code_length"]),
                symbols=symbols,
            )
        if mode == "joint-parity":
            return JointPayload(
                picks=tuple(int(p) for p in doc["picks"]),
                known_count=int(doc["known_count"]),
                code_length=int(doc["code_length"]),
                symbols=symbols,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed payload: {exc}") from exc
    raise WireFormatError(f"unknown payload mode {mode!r}")


def answer_to_json(answer: Answer) -> dict:
    return {
        "format": ANSWER_FORMAT,
        "q": answer.q,
        "msg_len": answer.msg_len,
        "payloads": [_payload_to_json(p) for p in answer.payloads],
        "extras": [list(e) if isinstance(e, (list, tuple)) else e for e in answer.extras],
    }


def answer_from_json(doc: dict) -> Answer:
    _expect(doc, ANSWER_FORMAT)
    try:
        return Answer(
            q=int(doc["q"]),
            msg_len=int(doc["msg_len"]),
            payloads=tuple(_payload_from_json(p) for p in doc["payloads"]),
            extras=tuple(tuple(e) if isinstance(e, list) else e for e in doc.get("extras", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed answer document: {exc}") from exc


# --- side information -----------------------------------------------------------


def side_to_json(side: SideInfo, side_values) -> dict:
    """User-side bundle: labels, counts and the held message values."""
    return {
        "format": SIDE_FORMAT,
        "per_class_counts": list(side.per_class_counts),
        "labels": [list(lab) for lab in side.label_set],
        "messages": [list(side_values[lab]) for lab in side.label_set],
    }


def side_from_json(doc: dict):
    _expect(doc, SIDE_FORMAT)
    try:
        labels = tuple((int(i), int(a)) for i, a in doc["labels"])
        values = {
            lab: tuple(int(s) for s in row)
            for lab, row in zip(labels, doc["messages"])
        }
        side = SideInfo(
            per_class_counts=tuple(int(k) for k in doc["per_class_counts"]),
            label_set=labels,
            _indices=(),
        )
        return side, values
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed side-information document: {exc}") from exc


# --- database (layout + store) ---------------------------------------------------


def database_to_json(store: MessageStore) -> dict:
    layout = store.layout
    p = layout.params
    return {
        "format": DATABASE_FORMAT,
        "params": {
            "class_sizes": list(p.class_sizes),
            "side_counts": list(p.side_counts),
            "msg_len": p.msg_len,
            "q": p.q,
        },
        "class_of": list(layout.class_of),
        "positions": [list(m) for m in layout.class_members],
        "labels": [list(l) for l in layout.labels],
        "messages": [list(r) for r in store.messages],
    }


def database_from_json(doc: dict) -> MessageStore:
    _expect(doc, DATABASE_FORMAT)
    try:
        p = doc["params"]
        params = InstanceParams(
            class_sizes=tuple(int(m) for m in p["class_sizes"]),
            side_counts=tuple(int(k) for k in p["side_counts"]),
            msg_len=int(p["msg_len"]),
            q=int(p["q"]),
        )
        layout = DatabaseLayout(
            params=params,
            class_members=tuple(tuple(int(m) for m in c) for c in doc["positions"]),
            labels=tuple(tuple(int(a) for a in c) for c in doc["labels"]),
        )
        messages = tuple(tuple(int(s) for s in r) for r in doc["messages"])
        return MessageStore(layout, messages)
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed database document: {exc}") from exc


# --- generator matrices ------------------------------------------------------------


def code_to_json(code) -> dict:
    return {
        "format": CODE_FORMAT,
        "n": code.n,
        "k": code.k,
        "q": code.field.q,
        "generator": [list(r) for r in code.generator],
    }
