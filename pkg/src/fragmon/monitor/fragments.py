"""Fragments, fragment sets and the line-delimited JSON fragment file."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Union

FORMAT_VERSION = 1
SIGNATURE_ALPHABET = frozenset("TFU")

RunId = Union[int, str]


class FragmentFormatError(ValueError):
    pass


class ConditionSetMismatch(FragmentFormatError):
    """Fragments were produced under a different condition set."""

    def __init__(self, found: str, expected: str):
        self.found = found
        self.expected = expected
        super().__init__(f"condition-set hash mismatch: fragments use {found}, expected {expected}")


@dataclass(frozen=True)
class FragmentMeta:
    """Provenance of a fragment. Evaluation-only: reconstruction never reads it."""

    run_id: RunId
    installation_id: str = "local"
    start_index: Optional[int] = None
    end_index: Optional[int] = None


@dataclass(frozen=True)
class Fragment:
    start: str
    events: tuple[str, ...]
    end: str
    meta: Optional[FragmentMeta] = None

    def __post_init__(self):
        if not self.events:
            raise ValueError("a fragment holds at least one event")
        if len(self.start) != len(self.end):
            raise ValueError("start and end signatures differ in length")
        if not (set(self.start) | set(self.end)) <= SIGNATURE_ALPHABET:
            raise ValueError("signatures are strings over T/F/U")

    def content_key(self) -> tuple:
        return (self.start, self.events, self.end)

    def __str__(self) -> str:
        return f"({', '.join(self.start)}) {' '.join(self.events)} ({', '.join(self.end)})"


def _sort_key(f: Fragment) -> tuple:
    m = f.meta
    if m is None:
        return (1, "", "", -1) + f.content_key()
    return (0, m.installation_id, str(m.run_id), -1 if m.start_index is None else m.start_index) + f.content_key()


@dataclass(frozen=True)
class FragmentSet:
    fragments: tuple[Fragment, ...] = ()
    cshash: str = ""

    def __len__(self) -> int:
        return len(self.fragments)

    def __iter__(self):
        return iter(self.fragments)

    @property
    def installations(self) -> set[str]:
        return {f.meta.installation_id for f in self.fragments if f.meta is not None}

    @property
    def signature_length(self) -> Optional[int]:
        return len(self.fragments[0].start) if self.fragments else None

    def validate(self) -> None:
        """Same-run fragments must not overlap; all signatures share one length."""
        lengths = {len(f.start) for f in self.fragments}
        if len(lengths) > 1:
            raise FragmentFormatError(f"signatures of different lengths: {sorted(lengths)}")
        spans: dict[tuple, list[tuple[int, int]]] = {}
        for f in self.fragments:
            m = f.meta
            if m is None or m.start_index is None or m.end_index is None:
                continue
            if m.end_index - m.start_index + 1 != len(f.events):
                raise FragmentFormatError(f"fragment indices [{m.start_index}, {m.end_index}] "
                                          f"do not match {len(f.events)} events")
            spans.setdefault((m.installation_id, str(m.run_id)), []).append((m.start_index, m.end_index))
        for key, ranges in spans.items():
            ranges.sort()
            for (a0, a1), (b0, _) in zip(ranges, ranges[1:]):
                if b0 <= a1:
                    raise FragmentFormatError(f"overlapping fragments in run {key}: {a0}-{a1} and {b0}")

    @classmethod
    def merge(cls, sets: Iterable["FragmentSet"]) -> "FragmentSet":
        """Order-independent union; refuses sets built on different condition sets."""
        sets = [s for s in sets]
        hashes = {s.cshash for s in sets if len(s)}
        if len(hashes) > 1:
            a, b = sorted(hashes)[:2]
            raise ConditionSetMismatch(a, b)
        cshash = hashes.pop() if hashes else next((s.cshash for s in sets if s.cshash), "")
        frags = sorted((f for s in sets for f in s.fragments), key=_sort_key)
        return cls(tuple(frags), cshash)


def fragment_record(f: Fragment, cshash: str, production: bool = False) -> dict:
    m = f.meta
    rec = {
        "v": FORMAT_VERSION,
        "cshash": cshash,
        "run": m.run_id if m else None,
        "inst": m.installation_id if m else None,
        "start": f.start,
        "events": list(f.events),
        "end": f.end,
    }
    if not production and m is not None:
        if m.start_index is not None:
            rec["i0"] = m.start_index
        if m.end_index is not None:
            rec["i1"] = m.end_index
    return rec


def fragment_from_record(rec: dict) -> tuple[Fragment, str]:
    try:
        if rec["v"] != FORMAT_VERSION:
            raise FragmentFormatError(f"unsupported fragment format version {rec['v']!r}")
        meta = None
        if rec.get("run") is not None or rec.get("inst") is not None:
            meta = FragmentMeta(rec.get("run"), rec.get("inst") or "local", rec.get("i0"), rec.get("i1"))
        frag = Fragment(rec["start"], tuple(rec["events"]), rec["end"], meta)
        return frag, rec["cshash"]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FragmentFormatError):
            raise
        raise FragmentFormatError(f"malformed fragment record: {exc}") from exc


def write_fragments(fs: FragmentSet, sink: TextIO, production: bool = False) -> int:
    for f in fs.fragments:
        sink.write(json.dumps(fragment_record(f, fs.cshash, production), separators=(",", ":")))
        sink.write("\n")
    return len(fs.fragments)


def parse_fragment_lines(lines: Iterable[str], expected_cshash: Optional[str] = None) -> FragmentSet:
    frags = []
    found: Optional[str] = None
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FragmentFormatError(f"line {n}: invalid JSON: {exc}") from exc
        frag, cshash = fragment_from_record(rec)
        if expected_cshash is not None and cshash != expected_cshash:
            raise ConditionSetMismatch(cshash, expected_cshash)
        if found is not None and cshash != found:
            raise ConditionSetMismatch(cshash, found)
        found = cshash
        frags.append(frag)
    fs = FragmentSet(tuple(frags), found or expected_cshash or "")
    fs.validate()
    return fs


def read_fragments(source: Union[TextIO, Iterable[str]], expected_cshash: Optional[str] = None) -> FragmentSet:
    """Read one or more concatenated fragment files."""
    return parse_fragment_lines(source, expected_cshash)
