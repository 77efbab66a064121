"""Greedy line packing: wrap points, oversize flags, error edges."""

import pytest

from flexdoc.flow import FlowPlan, flow_pack


class TestRowWrap:
    def test_three_items_wrap_after_two(self):
        plan = flow_pack([("a", 100.0), ("b", 100.0), ("c", 100.0)],
                         "row-wrap", 250.0)
        assert plan.lines == (("a", "b"), ("c",))
        assert plan.oversize == ()

    def test_exact_fit_stays_on_line(self):
        plan = flow_pack([("a", 100.0), ("b", 150.0)], "row-wrap", 250.0)
        assert plan.lines == (("a", "b"),)

    def test_one_px_over_wraps(self):
        plan = flow_pack([("a", 100.0), ("b", 151.0)], "row-wrap", 250.0)
        assert plan.lines == (("a",), ("b",))

    def test_single_oversize_item_flagged(self):
        plan = flow_pack([("a", 300.0)], "row-wrap", 250.0)
        assert plan.oversize == ("a",)
        assert plan.lines == (("a",),)

    def test_oversize_mid_stream_gets_own_line(self):
        plan = flow_pack([("a", 100.0), ("big", 400.0), ("b", 100.0)],
                         "row-wrap", 250.0)
        assert plan.lines == (("a",), ("big",), ("b",))
        assert plan.oversize == ("big",)

    def test_order_is_preserved(self):
        items = [(f"e{i}", 80.0) for i in range(7)]
        plan = flow_pack(items, "row-wrap", 250.0)
        flattened = [eid for line in plan.lines for eid in line]
        assert flattened == [eid for eid, _ in items]
        assert all(len(line) <= 3 for line in plan.lines)

    def test_empty_input(self):
        plan = flow_pack([], "row-wrap", 250.0)
        assert plan == FlowPlan(lines=(), oversize=())


class TestColumn:
    def test_column_stacks_one_per_line(self):
        plan = flow_pack([("a", 100.0), ("b", 10.0)], "column", 250.0)
        assert plan.lines == (("a",), ("b",))

    def test_column_flags_oversize_too(self):
        plan = flow_pack([("a", 400.0)], "column", 250.0)
        assert plan.oversize == ("a",)


class TestValidation:
    def test_zero_width_rejected(self):
        with pytest.raises(ValueError):
            flow_pack([("a", 10.0)], "row-wrap", 0.0)

    def test_negative_width_rejected(self):
        with pytest.raises(ValueError):
            flow_pack([("a", 10.0)], "column", -5.0)

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValueError):
            flow_pack([("a", 10.0)], "diagonal", 250.0)
