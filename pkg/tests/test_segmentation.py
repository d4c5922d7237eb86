import random

import pytest

from screenwright.errors import ProviderUnavailable, UnorderedInput
from screenwright.perception import DialogueLine
from screenwright.providers import ProviderClient
from screenwright.segmentation import (
    SEPARATOR_TOKEN,
    CoarseSegment,
    MarkedTranscript,
    SeparatorMarker,
    coarse_split,
    insert_separators,
    order_transcript,
    render_line,
    render_marked,
)


class StubClient(ProviderClient):
    def __init__(self, replies, role="reasoner"):
        super().__init__(role, 1)
        self.replies = list(replies)
        self.calls = 0

    def complete(self, parts, max_tokens=None):
        self.calls += 1
        reply = self.replies.pop(0)
        if isinstance(reply, Exception):
            raise reply
        return reply


def line(start, end, text="words", speaker=None):
    return DialogueLine(start=start, end=end, text=text, speaker=speaker)


def random_timeline(rng: random.Random, max_lines=12):
    lines = []
    t = rng.uniform(0.0, 3.0)
    for _ in range(rng.randint(0, max_lines)):
        duration = rng.uniform(0.2, 2.5)
        lines.append(line(round(t, 3), round(t + duration, 3)))
        gap = rng.choice([0.0, 0.4, 1.9, 2.0, 2.0001, 2.6, 5.0, rng.uniform(0, 6)])
        t += duration + gap
    return lines


class TestOrderTranscript:
    def test_sorts_by_start_then_end(self):
        a, b, c = line(2.0, 3.0, "b"), line(0.0, 2.0, "a"), line(2.0, 2.5, "c")
        assert order_transcript([a, b, c]) == (b, c, a)

    def test_equal_spans_keep_arrival_order(self):
        first = line(1.0, 2.0, "first")
        second = line(1.0, 2.0, "second")
        assert order_transcript([first, second]) == (first, second)
        assert order_transcript([second, first]) == (second, first)


class TestInsertSeparators:
    def test_marks_long_gaps_only(self):
        lines = [line(0.0, 1.0), line(1.5, 3.5), line(6.0, 7.0)]
        marked = insert_separators(lines)
        assert len(marked.separators) == 1
        marker = marked.separators[0]
        assert marker == SeparatorMarker(number=1, time=3.5, gap=2.5)
        assert marked.items.index(marker) == 2

    def test_exact_threshold_gap_is_not_marked(self):
        marked = insert_separators([line(0.0, 1.0), line(3.0, 4.0)])
        assert marked.separators == ()

    def test_just_over_threshold_is_marked(self):
        marked = insert_separators([line(0.0, 1.0), line(3.0001, 4.0)])
        assert len(marked.separators) == 1

    def test_numbers_count_up_from_one(self):
        lines = [line(0.0, 1.0), line(4.0, 5.0), line(9.0, 10.0)]
        marked = insert_separators(lines)
        assert [m.number for m in marked.separators] == [1, 2]

    def test_custom_threshold(self):
        lines = [line(0.0, 1.0), line(2.5, 3.0)]
        assert insert_separators(lines, 1.0).separators != ()
        assert insert_separators(lines, 2.0).separators == ()

    def test_unordered_input_rejected(self):
        with pytest.raises(UnorderedInput):
            insert_separators([line(5.0, 6.0), line(0.0, 1.0)])

    def test_empty_and_single(self):
        assert insert_separators([]).items == ()
        marked = insert_separators([line(0.0, 1.0)])
        assert len(marked.lines) == 1
        assert marked.separators == ()

    def test_separator_law_oracle(self):
        # separator iff gap strictly greater than the threshold, anchored at
        # the previous line's end, numbered in order
        rng = random.Random(1337)
        for case in range(1000):
            lines = random_timeline(rng)
            marked = insert_separators(lines)
            expected = []
            for prev, cur in zip(lines, lines[1:]):
                gap = cur.start - prev.end
                if gap > 2.0:
                    expected.append((prev.end, gap))
            got = [(m.time, m.gap) for m in marked.separators]
            assert [
                (pytest.approx(t), pytest.approx(g)) for t, g in expected
            ] == got, f"case {case}"
            assert [m.number for m in marked.separators] == list(
                range(1, len(expected) + 1)
            )
            assert marked.lines == tuple(lines)


class TestRendering:
    def test_render_line_format(self):
        assert render_line(line(0.5, 1.25, "Hello.", "Ann")) == "[0.5s-1.2s] Ann: Hello."
        assert render_line(line(2.0, 3.0, "Hi.")) == "[2.0s-3.0s] Speaker: Hi."

    def test_render_marked_interleaves_tokens(self):
        marked = insert_separators([line(0.0, 1.0, "one"), line(4.0, 5.0, "two")])
        text = render_marked(marked)
        assert text.splitlines() == [
            "[0.0s-1.0s] Speaker: one",
            f"{SEPARATOR_TOKEN} <#1>",
            "[4.0s-5.0s] Speaker: two",
        ]


def segments_partition(segments, lines):
    recombined = [ln for segment in segments for ln in segment.lines]
    return recombined == list(lines)


class TestCoarseSplit:
    def marked_three_parts(self):
        lines = [line(0.0, 1.0, "a"), line(4.0, 5.0, "b"), line(9.0, 10.0, "c")]
        return insert_separators(lines)

    def test_no_dialogue_is_zero_segments(self, templates):
        client = StubClient([])
        outcome = coarse_split(MarkedTranscript(items=()), client, templates)
        assert outcome.segments == ()
        assert client.calls == 0

    def test_no_separators_skips_the_model(self, templates):
        marked = insert_separators([line(0.0, 1.0), line(1.5, 2.0)])
        client = StubClient([])
        outcome = coarse_split(marked, client, templates)
        assert client.calls == 0
        assert len(outcome.segments) == 1
        assert outcome.segments[0].lines == marked.lines
        assert outcome.used_fallback is False

    def test_splits_at_confirmed_markers(self, templates):
        outcome = coarse_split(self.marked_three_parts(), StubClient(["[2]"]), templates)
        assert [len(s.lines) for s in outcome.segments] == [2, 1]
        assert outcome.segments[0].start == 0.0
        assert outcome.segments[0].end == 5.0
        assert outcome.segments[1].start == 9.0
        assert outcome.used_fallback is False
        assert [s.segment_id for s in outcome.segments] == [0, 1]

    def test_confirming_no_markers_keeps_one_segment(self, templates):
        outcome = coarse_split(self.marked_three_parts(), StubClient(["[]"]), templates)
        assert len(outcome.segments) == 1

    def test_loose_integer_reply_accepted(self, templates):
        outcome = coarse_split(self.marked_three_parts(), StubClient(["1, 2"]), templates)
        assert len(outcome.segments) == 3

    def test_repair_can_recover(self, templates):
        client = StubClient(["the markers are lovely", "[1]"])
        outcome = coarse_split(self.marked_three_parts(), client, templates)
        assert client.calls == 2
        assert len(outcome.segments) == 2
        assert outcome.used_fallback is False

    def test_double_garbage_falls_back_to_all_markers(self, templates):
        client = StubClient(["nonsense", "[0, 9]"])
        outcome = coarse_split(self.marked_three_parts(), client, templates)
        assert outcome.used_fallback is True
        assert [len(s.lines) for s in outcome.segments] == [1, 1, 1]

    def test_provider_outage_propagates(self, templates):
        client = StubClient([ProviderUnavailable("down")])
        with pytest.raises(ProviderUnavailable):
            coarse_split(self.marked_three_parts(), client, templates)

    def test_fuzz_partition_and_boundary_legality(self, templates):
        rng = random.Random(777)
        for _ in range(300):
            lines = random_timeline(rng)
            marked = insert_separators(lines)
            markers = [m.number for m in marked.separators]
            if markers and rng.random() < 0.5:
                chosen = sorted(rng.sample(markers, rng.randint(0, len(markers))))
                replies = [str(chosen)]
            else:
                replies = ["garbage", "more garbage"]
            outcome = coarse_split(marked, StubClient(replies), templates)
            assert segments_partition(outcome.segments, lines)
            # generated lines never overlap, so segment spans are disjoint
            spans = [(s.start, s.end) for s in outcome.segments]
            for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
                assert prev_end <= next_start
            for segment in outcome.segments:
                assert segment.start <= segment.end
            # every cut happens at a marker the transcript actually contains
            legal_cut_starts = set()
            for i, item in enumerate(marked.items):
                if isinstance(item, SeparatorMarker):
                    nxt = marked.items[i + 1]
                    legal_cut_starts.add(nxt.start)
            for segment in outcome.segments[1:]:
                assert segment.start in legal_cut_starts
