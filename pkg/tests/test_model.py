from dataclasses import FrozenInstanceError

import pytest

from flexdoc.model import (
    Alternative,
    NEUTRAL_PREFERENCES,
    PreferenceState,
    Rect,
    Viewport,
    assign_detail_levels,
    boundary_position,
    is_boundary,
)


def _alt(aid, modality, rank, size, text=None, font=None):
    return Alternative(id=aid, element_id="e", modality=modality, rank=rank,
                       preferred_size=size, text=text, preferred_font_size=font)


class TestDetailLevels:
    def test_text_ordered_by_characters(self):
        alts = assign_detail_levels((
            _alt("long", "text", 1, (100, 80), text="word " * 50, font=14),
            _alt("short", "text", 2, (100, 30), text="word " * 10, font=14),
        ))
        levels = {a.id: a.detail_level for a in alts}
        assert levels == {"short": 0, "long": 1}

    def test_images_ordered_by_preferred_area(self):
        alts = assign_detail_levels((
            _alt("small", "image", 2, (100, 50)),
            _alt("big", "image", 1, (200, 150)),
        ))
        levels = {a.id: a.detail_level for a in alts}
        assert levels == {"small": 0, "big": 1}

    def test_metric_ties_break_by_rank(self):
        alts = assign_detail_levels((
            _alt("second", "image", 2, (100, 100)),
            _alt("first", "image", 1, (100, 100)),
        ))
        levels = {a.id: a.detail_level for a in alts}
        assert levels == {"first": 0, "second": 1}

    def test_levels_cover_zero_to_k_minus_one(self):
        alts = assign_detail_levels(tuple(
            _alt(f"a{i}", "image", i + 1, (10.0 * (i + 1), 10)) for i in range(4)))
        assert sorted(a.detail_level for a in alts) == [0, 1, 2, 3]


class TestPreferences:
    def test_neutral_prefs_have_no_active_sliders(self):
        assert NEUTRAL_PREFERENCES.active_sliders() == {}

    def test_half_slider_counts_as_absent(self):
        prefs = PreferenceState(sliders={"image": 0.5, "text": 0.8})
        assert prefs.active_sliders() == {"text": 0.8}

    def test_types_are_immutable(self):
        with pytest.raises(FrozenInstanceError):
            NEUTRAL_PREFERENCES.no_scroll = True
        with pytest.raises(FrozenInstanceError):
            Rect(0, 0, 1, 1).w = 5


class TestBoundaries:
    def test_positions(self):
        vp = Viewport(width=800, height=600)
        assert boundary_position("@left", vp) == 0
        assert boundary_position("@top", vp) == 0
        assert boundary_position("@right", vp) == 800
        assert boundary_position("@bottom", vp) == 600

    def test_non_boundary_rejected(self):
        with pytest.raises(ValueError):
            boundary_position("col1", Viewport(10, 10))
        assert is_boundary("@left")
        assert not is_boundary("col1")


class TestDocumentHelpers:
    def test_with_pin_returns_new_document(self, news_doc):
        pinned = news_doc.with_pin("hero", Rect(10, 20, 300, 200))
        assert news_doc.element("hero").pinned_geometry is None
        assert pinned.element("hero").pinned_geometry == Rect(10, 20, 300, 200)
        unpinned = pinned.with_pin("hero", None)
        assert unpinned.element("hero").pinned_geometry is None

    def test_templates_by_rank(self, news_doc):
        assert [t.id for t in news_doc.templates_by_rank()] == [
            "three-col", "two-col", "one-col"]

    def test_area_lookup(self, news_doc):
        tpl = news_doc.template("three-col")
        assert "lede" in tpl.area_of("lede").elements
        with pytest.raises(KeyError):
            tpl.area_of("nope")
