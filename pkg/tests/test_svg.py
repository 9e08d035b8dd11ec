"""Chart rendering: determinism, scale rules, degradation, well-formedness."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import pytest

from imagecensus import svg
from imagecensus.errors import EmptyData, NonFiniteCoordinate

AXES = svg.AxesSpec(title="test title", x_label="xs", y_label="ys")


def parsed(document: str) -> ET.Element:
    return ET.fromstring(document)


class TestScatter:
    def test_single_point_centers(self):
        doc = svg.render_scatter([(0.0, 0.0, "p")], AXES)
        assert '<circle cx="342.00" cy="233.00"' in doc
        parsed(doc)

    def test_two_points_pad_five_percent(self):
        doc = svg.render_scatter([(0.0, 0.0, "a"), (10.0, 10.0, "b")], AXES)
        assert ">-0.5</text>" in doc
        assert ">10.5</text>" in doc
        assert doc.count("<circle") == 2

    def test_highlight_style_and_order(self):
        doc = svg.render_scatter(
            [(0.0, 0.0, "plain", False), (1.0, 1.0, "hot", True)], AXES
        )
        assert svg.HIGHLIGHT_STYLE in doc
        assert doc.index(svg.MARKER_STYLE) < doc.index(svg.HIGHLIGHT_STYLE)

    def test_labels_become_tooltips(self):
        doc = svg.render_scatter([(0.0, 0.0, "class<1>")], AXES)
        assert "<title>class&lt;1&gt;</title>" in doc

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteCoordinate):
            svg.render_scatter([(0.0, math.nan, "p")], AXES)
        with pytest.raises(NonFiniteCoordinate):
            svg.render_scatter([(math.inf, 0.0, "p")], AXES)

    def test_empty_rejected(self):
        with pytest.raises(EmptyData):
            svg.render_scatter([], AXES)

    def test_deterministic(self):
        points = [(0.1, 0.7, "a"), (0.4, 0.2, "b", True)]
        assert svg.render_scatter(points, AXES) == svg.render_scatter(points, AXES)

    def test_viewport(self):
        root = parsed(svg.render_scatter([(1.0, 2.0, "p")], AXES))
        assert root.get("width") == "640"
        assert root.get("height") == "480"
        assert root.get("viewBox") == "0 0 640 480"

    def test_axes_text_escaped(self):
        doc = svg.render_scatter(
            [(0.0, 0.0, "p")],
            svg.AxesSpec(title="a<b", x_label="x&y", y_label="y"),
        )
        assert "a&lt;b" in doc
        assert "x&amp;y" in doc


class TestBars:
    def test_bars_in_given_order(self):
        doc = svg.render_bars([("beta", 3.0), ("alpha", 1.0)], AXES)
        assert doc.count(f'style="{svg.BAR_STYLE}"') == 2
        assert doc.index(">beta</text>") < doc.index(">alpha</text>")

    def test_zero_is_on_scale(self):
        # one positive bar still scales from zero: the bottom tick sits at
        # the 5% pad below it, not at the bar's own minimum
        doc = svg.render_bars([("a", 5.0)], AXES)
        assert ">-0.25</text>" in doc

    def test_value_labels(self):
        doc = svg.render_bars([("a", 3.0), ("b", 1.5)], AXES)
        assert ">3</text>" in doc
        assert ">1.5</text>" in doc

    def test_negative_bar_renders(self):
        parsed(svg.render_bars([("down", -2.0), ("up", 2.0)], AXES))

    def test_empty_and_nonfinite(self):
        with pytest.raises(EmptyData):
            svg.render_bars([], AXES)
        with pytest.raises(NonFiniteCoordinate):
            svg.render_bars([("a", math.nan)], AXES)


class TestViolins:
    def test_spread_group_gets_outline(self):
        doc = svg.render_violins([("G", (0.1, 0.2, 0.3, 0.4))], AXES)
        assert "<polygon" in doc
        assert f'style="{svg.BOX_STYLE}"' in doc
        parsed(doc)

    def test_single_value_group_box_only(self):
        doc = svg.render_violins([("S", (0.5,))], AXES)
        assert "<polygon" not in doc
        assert f'style="{svg.BOX_STYLE}"' in doc

    def test_zero_spread_group_box_only(self):
        doc = svg.render_violins([("Z", (0.5, 0.5, 0.5))], AXES)
        assert "<polygon" not in doc

    def test_group_names_labeled(self):
        doc = svg.render_violins([("Toy", (0.1, 0.9)), ("Hound", (0.4, 0.6))], AXES)
        assert ">Toy</text>" in doc
        assert ">Hound</text>" in doc

    def test_empty_rejected(self):
        with pytest.raises(EmptyData):
            svg.render_violins([], AXES)
        with pytest.raises(EmptyData):
            svg.render_violins([("G", ())], AXES)

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteCoordinate):
            svg.render_violins([("G", (0.1, math.inf))], AXES)

    def test_deterministic(self):
        groups = [("G", (0.2, 0.4, 0.9)), ("H", (0.5,))]
        assert svg.render_violins(groups, AXES) == svg.render_violins(groups, AXES)


class TestPlaceholder:
    def test_title_and_message(self):
        doc = svg.render_placeholder("missing panel", "not computed")
        assert ">missing panel</text>" in doc
        assert ">not computed</text>" in doc
        assert "<line" not in doc
        parsed(doc)
