"""
Tests for CSV and SVG exports
"""

import csv
import io
import os
import sys

import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../.."))

from inobody.bodies import FamilySpec, build_family
from inobody.errors import DomainError
from inobody.export import fmt, report_csv, report_svg


class TestCsv:
    """Test width-function tables"""

    def test_blowup_widths(self):
        """One row per sample with float and exact columns"""
        report = build_family(FamilySpec("blowup-p2", {"u": 3, "v": 1}))
        rows = list(csv.reader(io.StringIO(report_csv(report))))
        assert rows[0] == ["index", "t", "width", "t_exact", "width_exact"]
        assert len(rows) == 1 + len(report.width_fns[0].samples)
        assert ["2", "4", "1.5", "4", "3/2"] in rows

    def test_fmt(self):
        """12 significant digits"""
        assert fmt(1) == "1"
        assert fmt(2 / 3) == "0.666666666667"


class TestSvg:
    """Test planar drawings"""

    def test_planar_body(self):
        """n = 2 draws the tilted body with its vertex labels"""
        svg = report_svg(build_family(FamilySpec("blowup-p2")))
        assert svg.startswith("<svg")
        assert "<polygon" in svg
        assert "(3, 2)" in svg

    def test_slice_of_three_dimensional_body(self):
        """n = 3 draws the slice nu_1 = t"""
        report = build_family(FamilySpec("product-curves", {"n": 3}))
        assert "slice nu_1 = 1" in report_svg(report)
        assert "slice nu_1 = 3/2" in report_svg(report, "3/2")

    def test_errors(self):
        """No body, wrong dimension or a slice outside [0, mu]"""
        with pytest.raises(DomainError):
            report_svg(build_family(FamilySpec("jacobian-hyper")))
        with pytest.raises(DomainError):
            report_svg(build_family(FamilySpec("product-curves", {"n": 4})))
        with pytest.raises(DomainError):
            report_svg(build_family(FamilySpec("product-curves", {"n": 3})), 5)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
