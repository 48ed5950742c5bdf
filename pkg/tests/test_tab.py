import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabsynth.errors import ParseError, ValidationError
from tabsynth.tab import (MAX_FRET, NoteEvent, STANDARD_TUNING, Tablature, Tuning,
                          note_to_midi, parse_note_annotations, parse_simple_tab,
                          serialize_note_annotations, serialize_simple_tab,
                          validate_tablature)

from conftest import annotation_doc


class TestTuning:
    def test_standard_preset(self):
        assert STANDARD_TUNING.open_midi == (64, 59, 55, 50, 45, 40)
        assert STANDARD_TUNING.name == "standard"
        # strictly decreasing from string 1 to string 6
        midis = STANDARD_TUNING.open_midi
        assert all(a > b for a, b in zip(midis, midis[1:]))

    def test_needs_six_strings(self):
        with pytest.raises(ValidationError):
            Tuning((64, 59, 55, 50, 45))

    def test_rejects_out_of_range_midi(self):
        with pytest.raises(ValidationError):
            Tuning((64, 59, 55, 50, 45, 20))
        with pytest.raises(ValidationError):
            Tuning((109, 59, 55, 50, 45, 40))


class TestNoteToMidi:
    def test_open_low_e(self):
        assert note_to_midi(6, 0, STANDARD_TUNING) == 40

    def test_high_e_fret_12(self):
        assert note_to_midi(1, 12, STANDARD_TUNING) == 76

    def test_g_string_fret_5(self):
        assert note_to_midi(3, 5, STANDARD_TUNING) == 60

    @pytest.mark.parametrize("string,fret", [(0, 0), (7, 0), (1, -1), (1, 20)])
    def test_bounds(self, string, fret):
        with pytest.raises(ValidationError):
            note_to_midi(string, fret, STANDARD_TUNING)


class TestParseAnnotations:
    def test_single_note(self):
        doc = annotation_doc("t", [(6, 0.5, 1.0, 45)], 2.0)
        tab = parse_note_annotations(doc)
        assert len(tab.events) == 1
        e = tab.events[0]
        assert (e.string, e.fret, e.onset, e.duration) == (6, 5, 0.5, 1.0)

    def test_empty_lists(self):
        tab = parse_note_annotations(annotation_doc("t", [], 3.25))
        assert tab.events == ()
        assert tab.total_duration == 3.25

    def test_unattainable_midi(self):
        doc = annotation_doc("t", [(1, 0.0, 1.0, 63)], 2.0)  # fret would be -1
        with pytest.raises(ValidationError, match="string_1"):
            parse_note_annotations(doc)

    def test_midi_above_max_fret(self):
        doc = annotation_doc("t", [(6, 0.0, 1.0, 60)], 2.0)  # fret would be 20
        with pytest.raises(ValidationError):
            parse_note_annotations(doc)

    def test_json_syntax_error_reports_line(self):
        with pytest.raises(ParseError, match="line"):
            parse_note_annotations('{"source_id": "x",\n  broken')

    def test_missing_field_reports_location(self):
        doc = json.loads(annotation_doc("t", [(6, 0.0, 1.0, 45)], 2.0))
        del doc["string_6"][0]["midi"]
        with pytest.raises(ParseError, match=r"string_6\[0\]"):
            parse_note_annotations(json.dumps(doc))

    def test_event_past_total_duration(self):
        doc = annotation_doc("t", [(6, 1.5, 1.0, 45)], 2.0)
        with pytest.raises(ValidationError):
            parse_note_annotations(doc)

    def test_midi_reproduced_by_note_to_midi(self):
        notes = [(6, 0.0, 0.5, 43), (3, 0.5, 0.5, 58), (1, 1.0, 0.5, 76)]
        tab = parse_note_annotations(annotation_doc("t", notes, 2.0))
        source = {(s, t): m for s, t, _, m in [(n[0], n[1], n[2], n[3]) for n in notes]}
        for e in tab.events:
            assert note_to_midi(e.string, e.fret, tab.tuning) == source[(e.string, e.onset)]


class TestParseSimpleTab:
    def test_event_line(self):
        tab = parse_simple_tab("0.000 0.500 6 3\n")
        assert len(tab.events) == 1
        e = tab.events[0]
        assert (e.onset, e.duration, e.string, e.fret) == (0.0, 0.5, 6, 3)

    def test_headers_and_comments(self):
        text = ("# a comment\n"
                "tuning: 64 59 55 50 45 40\n"
                "duration: 2.5\n"
                "0.0 0.5 6 3  # trailing comment\n")
        tab = parse_simple_tab(text)
        assert tab.total_duration == 2.5
        assert tab.tuning is STANDARD_TUNING

    def test_string_out_of_range(self):
        with pytest.raises(ValidationError, match="string 7"):
            parse_simple_tab("0.0 0.5 7 3\n")

    def test_bad_line_reports_number(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_simple_tab("0.0 0.5 6 3\n0.6 oops 6 3\n")

    def test_overlap_rejected_by_default(self):
        text = "0.0 1.0 6 3\n0.5 1.0 6 5\n"
        with pytest.raises(ValidationError, match="overlap"):
            parse_simple_tab(text)

    def test_overlap_truncated_with_flag(self):
        text = "0.0 1.0 6 3\n0.5 1.0 6 5\n"
        tab = parse_simple_tab(text, auto_truncate=True)
        first = [e for e in tab.events if e.fret == 3][0]
        assert first.duration == pytest.approx(0.5)
        assert validate_tablature(tab) == []

    def test_same_onset_overlap_drops_earlier(self):
        text = "0.0 1.0 6 3\n0.0 1.0 6 5\n"
        tab = parse_simple_tab(text, auto_truncate=True)
        assert len(tab.events) == 1
        assert tab.events[0].fret == 5

    def test_duration_defaults_to_last_offset(self):
        tab = parse_simple_tab("0.0 0.5 6 3\n1.0 0.25 5 0\n")
        assert tab.total_duration == 1.25


class TestValidate:
    def test_well_formed(self):
        tab = parse_simple_tab("0.0 0.5 6 3\n0.5 0.5 6 5\n1.0 0.5 5 0\n")
        assert validate_tablature(tab) == []

    def test_fret_out_of_range(self):
        tab = Tablature((NoteEvent(0.0, 1.0, 6, 25),), total_duration=2.0)
        rules = [v.rule for v in validate_tablature(tab)]
        assert rules == ["fret-out-of-range"]

    def test_overlap_names_both_events(self):
        tab = Tablature((NoteEvent(0.0, 1.0, 6, 3), NoteEvent(0.5, 1.0, 6, 5)),
                        total_duration=2.0)
        violations = validate_tablature(tab)
        assert any(v.rule == "string-overlap" and len(v.events) == 2
                   for v in violations)

    def test_touching_events_do_not_overlap(self):
        tab = Tablature((NoteEvent(0.0, 0.5, 6, 3), NoteEvent(0.5, 0.5, 6, 5)),
                        total_duration=1.0)
        assert validate_tablature(tab) == []


@st.composite
def tablatures(draw):
    """Valid tablatures: per-string non-overlapping events on a coarse grid."""
    events = []
    for string in range(1, 7):
        n = draw(st.integers(min_value=0, max_value=3))
        cursor = 0.0
        for _ in range(n):
            gap = draw(st.floats(min_value=0.0, max_value=0.5, allow_nan=False))
            duration = draw(st.floats(min_value=0.05, max_value=0.8, allow_nan=False))
            fret = draw(st.integers(min_value=0, max_value=MAX_FRET))
            onset = cursor + gap
            events.append(NoteEvent(onset=onset, duration=duration,
                                    string=string, fret=fret))
            cursor = onset + duration
    total = max((e.offset for e in events), default=0.0)
    extra = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    return Tablature(tuple(events), STANDARD_TUNING, total + extra, "prop_tab")


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(tablatures())
    def test_simple_tab_round_trip(self, tab):
        assert parse_simple_tab(serialize_simple_tab(tab)) == tab

    @settings(max_examples=60, deadline=None)
    @given(tablatures())
    def test_annotation_round_trip(self, tab):
        assert parse_note_annotations(serialize_note_annotations(tab)) == tab

    @settings(max_examples=40, deadline=None)
    @given(tablatures())
    def test_parsed_tabs_validate_clean(self, tab):
        parsed = parse_simple_tab(serialize_simple_tab(tab), auto_truncate=True)
        assert validate_tablature(parsed) == []
