"""Tablature domain model: tunings, note events, parsers and validation.

Two text formats are supported. Note-annotation documents are JSON with a
header and one event array per string. Simple tab files are line based:
'#' comments, "tuning:" / "duration:" / "source:" headers and
"<onset> <duration> <string> <fret>" event lines.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import ParseError, ValidationError

MAX_FRET = 19
N_STRINGS = 6


@dataclass(frozen=True)
class Tuning:
    """Open-string MIDI pitches, string 1 (highest) through string 6 (lowest)."""

    open_midi: tuple[int, ...]
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "open_midi", tuple(int(m) for m in self.open_midi))
        if len(self.open_midi) != N_STRINGS:
            raise ValidationError(f"tuning needs {N_STRINGS} strings, got {len(self.open_midi)}")
        for midi in self.open_midi:
            if not 21 <= midi <= 108:
                raise ValidationError(f"open-string midi {midi} outside [21, 108]")

    def open_for(self, string: int) -> int:
        if not 1 <= string <= N_STRINGS:
            raise ValidationError(f"string {string} out of range 1..{N_STRINGS}")
        return self.open_midi[string - 1]


STANDARD_TUNING = Tuning((64, 59, 55, 50, 45, 40), name="standard")


def _tuning_from_midi(open_midi: Iterable[int]) -> Tuning:
    open_midi = tuple(int(m) for m in open_midi)
    if open_midi == STANDARD_TUNING.open_midi:
        return STANDARD_TUNING
    return Tuning(open_midi)


def note_to_midi(string: int, fret: int, tuning: Tuning = STANDARD_TUNING,
                 max_fret: int = MAX_FRET) -> int:
    """MIDI pitch sounded by fretting `string` at `fret` under `tuning`."""
    if not 1 <= string <= N_STRINGS:
        raise ValidationError(f"string {string} out of range 1..{N_STRINGS}")
    if not 0 <= fret <= max_fret:
        raise ValidationError(f"fret {fret} out of range 0..{max_fret}")
    return tuning.open_midi[string - 1] + fret


@dataclass(frozen=True)
class NoteEvent:
    """One note: seconds-based onset/duration plus fretboard position."""

    onset: float
    duration: float
    string: int
    fret: int
    velocity_tag: Optional[str] = None

    @property
    def offset(self) -> float:
        return self.onset + self.duration

    def midi(self, tuning: Tuning) -> int:
        return tuning.open_midi[self.string - 1] + self.fret


@dataclass(frozen=True)
class Tablature:
    """An immutable performance transcript; events kept sorted by (onset, string)."""

    events: tuple[NoteEvent, ...]
    tuning: Tuning = STANDARD_TUNING
    total_duration: float = 0.0
    source_id: str = ""

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=lambda e: (e.onset, e.string, e.fret)))
        object.__setattr__(self, "events", ordered)

    def events_on(self, string: int) -> list[NoteEvent]:
        return [e for e in self.events if e.string == string]

    @property
    def positions(self) -> set[tuple[int, int]]:
        return {(e.string, e.fret) for e in self.events}


@dataclass(frozen=True)
class Violation:
    """One broken tablature rule; `events` are indices into Tablature.events."""

    rule: str
    events: tuple[int, ...]
    message: str


def validate_tablature(tab: Tablature, max_fret: int = MAX_FRET) -> list[Violation]:
    """Check every tablature invariant; returns [] iff the tab is well formed."""
    violations: list[Violation] = []
    for i, e in enumerate(tab.events):
        if e.onset < 0:
            violations.append(Violation("negative-onset", (i,),
                                        f"event {i}: onset {e.onset} < 0"))
        if e.duration <= 0:
            violations.append(Violation("non-positive-duration", (i,),
                                        f"event {i}: duration {e.duration} <= 0"))
        if not 1 <= e.string <= N_STRINGS:
            violations.append(Violation("string-out-of-range", (i,),
                                        f"event {i}: string {e.string} not in 1..{N_STRINGS}"))
        if not 0 <= e.fret <= max_fret:
            violations.append(Violation("fret-out-of-range", (i,),
                                        f"event {i}: fret {e.fret} not in 0..{max_fret}"))
        if e.duration > 0 and e.offset > tab.total_duration:
            violations.append(Violation("exceeds-total-duration", (i,),
                                        f"event {i}: ends at {e.offset} past "
                                        f"total_duration {tab.total_duration}"))
    for string in range(1, N_STRINGS + 1):
        indexed = [(i, e) for i, e in enumerate(tab.events) if e.string == string]
        for (i, a), (j, b) in zip(indexed, indexed[1:]):
            if a.offset > b.onset:
                violations.append(Violation("string-overlap", (i, j),
                                            f"events {i} and {j} overlap on string {string}"))
    return violations


def _raise_if_invalid(tab: Tablature, max_fret: int) -> Tablature:
    violations = validate_tablature(tab, max_fret=max_fret)
    if violations:
        raise ValidationError("; ".join(v.message for v in violations))
    return tab


def _truncate_overlaps(events: list[NoteEvent]) -> list[NoteEvent]:
    """Clip each event at the next onset on its string; drop zero-length leftovers."""
    out: list[NoteEvent] = []
    for string in range(1, N_STRINGS + 1):
        on_string = sorted((e for e in events if e.string == string),
                           key=lambda e: e.onset)
        for cur, nxt in zip(on_string, on_string[1:]):
            if cur.offset > nxt.onset:
                cur = replace(cur, duration=nxt.onset - cur.onset)
            if cur.duration > 0:
                out.append(cur)
        if on_string:
            out.append(on_string[-1])
    return out


# ---------------------------------------------------------------------------
# Note-annotation documents (JSON)
# ---------------------------------------------------------------------------

_STRING_KEYS = tuple(f"string_{s}" for s in range(1, N_STRINGS + 1))


def parse_note_annotations(text: str, max_fret: int = MAX_FRET) -> Tablature:
    """Parse a JSON note-annotation document into a validated Tablature."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object")

    source_id = doc.get("source_id", "")
    if not isinstance(source_id, str):
        raise ParseError("field 'source_id' must be a string")
    total = doc.get("total_duration")
    if not isinstance(total, (int, float)) or isinstance(total, bool) or total < 0:
        raise ParseError("field 'total_duration' must be a non-negative number")
    tuning_field = doc.get("tuning")
    if (not isinstance(tuning_field, list) or len(tuning_field) != N_STRINGS
            or not all(isinstance(m, int) for m in tuning_field)):
        raise ParseError(f"field 'tuning' must be a list of {N_STRINGS} integers")
    tuning = _tuning_from_midi(tuning_field)

    events: list[NoteEvent] = []
    for string, key in enumerate(_STRING_KEYS, start=1):
        notes = doc.get(key, [])
        if not isinstance(notes, list):
            raise ParseError(f"field '{key}' must be an array")
        for k, rec in enumerate(notes):
            where = f"{key}[{k}]"
            if not isinstance(rec, dict):
                raise ParseError(f"{where}: expected an object")
            for name, kinds in (("time", (int, float)), ("duration", (int, float)),
                                ("midi", (int,))):
                if name not in rec:
                    raise ParseError(f"{where}: missing field '{name}'")
                if not isinstance(rec[name], kinds) or isinstance(rec[name], bool):
                    raise ParseError(f"{where}: field '{name}' has the wrong type")
            fret = rec["midi"] - tuning.open_for(string)
            if not 0 <= fret <= max_fret:
                raise ValidationError(
                    f"{where}: midi {rec['midi']} not attainable on string {string} "
                    f"(fret {fret} outside 0..{max_fret})")
            events.append(NoteEvent(onset=float(rec["time"]),
                                    duration=float(rec["duration"]),
                                    string=string, fret=fret))

    tab = Tablature(tuple(events), tuning=tuning, total_duration=float(total),
                    source_id=source_id)
    return _raise_if_invalid(tab, max_fret)


def serialize_note_annotations(tab: Tablature) -> str:
    """Inverse of parse_note_annotations; parse(serialize(t)) == t."""
    doc: dict = {
        "source_id": tab.source_id,
        "total_duration": tab.total_duration,
        "tuning": list(tab.tuning.open_midi),
    }
    for string, key in enumerate(_STRING_KEYS, start=1):
        doc[key] = [
            {"time": e.onset, "duration": e.duration, "midi": e.midi(tab.tuning)}
            for e in tab.events_on(string)
        ]
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Simple tab files (line based)
# ---------------------------------------------------------------------------

def parse_simple_tab(text: str, max_fret: int = MAX_FRET, auto_truncate: bool = False,
                     source_id: str = "") -> Tablature:
    """Parse the line-based tab format into a validated Tablature.

    Same-string overlaps are rejected unless `auto_truncate` is set, in which
    case each earlier event is clipped at the next onset on its string.
    """
    tuning = STANDARD_TUNING
    total: Optional[float] = None
    events: list[NoteEvent] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if key == "tuning":
                try:
                    midis = [int(tok) for tok in value.split()]
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: bad tuning value {value!r}") from exc
                if len(midis) != N_STRINGS:
                    raise ParseError(f"line {lineno}: tuning needs {N_STRINGS} values")
                tuning = _tuning_from_midi(midis)
            elif key == "duration":
                try:
                    total = float(value)
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: bad duration value {value!r}") from exc
            elif key == "source":
                source_id = value
            else:
                raise ParseError(f"line {lineno}: unknown header {key!r}")
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            onset, duration = float(fields[0]), float(fields[1])
            string, fret = int(fields[2]), int(fields[3])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if not 1 <= string <= N_STRINGS:
            raise ValidationError(f"line {lineno}: string {string} out of range 1..{N_STRINGS}")
        if not 0 <= fret <= max_fret:
            raise ValidationError(f"line {lineno}: fret {fret} out of range 0..{max_fret}")
        if onset < 0 or duration <= 0:
            raise ValidationError(f"line {lineno}: need onset >= 0 and duration > 0")
        events.append(NoteEvent(onset=onset, duration=duration, string=string, fret=fret))

    if auto_truncate:
        events = _truncate_overlaps(events)
    if total is None:
        total = max((e.offset for e in events), default=0.0)
    tab = Tablature(tuple(events), tuning=tuning, total_duration=total,
                    source_id=source_id)
    return _raise_if_invalid(tab, max_fret)


def serialize_simple_tab(tab: Tablature) -> str:
    """Inverse of parse_simple_tab; parse(serialize(t)) == t."""
    lines = []
    if tab.source_id:
        lines.append(f"source: {tab.source_id}")
    lines.append("tuning: " + " ".join(str(m) for m in tab.tuning.open_midi))
    lines.append(f"duration: {tab.total_duration!r}")
    for e in tab.events:
        lines.append(f"{e.onset!r} {e.duration!r} {e.string} {e.fret}")
    return "\n".join(lines) + "\n"
