# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Acceptance runs of the four evaluation cases on the default survey."""

import sys
from pathlib import Path

import pytest

# Add src to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root / "src"))

from core.run_config import RunConfig  # noqa: E402
from evaluation.cases import run_case  # noqa: E402

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2]


def _reports(case_id: int, seeds=None, **case):
    config = RunConfig(case={"case_id": case_id, "seeds": seeds or SEEDS, **case})
    return run_case(config)


class TestCorrespondenceCase:
    """Tests for correspondence quality and the effect of correspondences."""

    @pytest.fixture(scope="class")
    def reports(self):
        """Case 1 over three seeds."""
        return _reports(1)

    def test_correspondence_quality(self, reports):
        """Kept pairs are about one sample spacing apart and raw matches are mostly good."""
        for report in reports:
            quality = report.correspondence_quality
            assert quality is not None and quality.count > 0
            assert 0.7 * report.gsd <= quality.mean <= 1.5 * report.gsd
            assert report.raw_inlier_ratio >= 0.4

    def test_attitude_and_cloud_improve(self, reports):
        """Correspondences improve yaw, pitch and the cloud on every seed."""
        for report in reports:
            assert report.factors["yaw"] >= 2.0, report.seed
            assert report.factors["pitch"] >= 1.5, report.seed
            assert report.factors["pointcloud-mean"] >= 3.0, report.seed

    def test_reports_repeat(self, reports):
        """A second run of one seed serialises identically."""
        again = _reports(1, seeds=[reports[0].seed])[0]
        assert again.model_dump_json() == reports[0].model_dump_json()


class TestDownsamplingCase:
    """Tests for thinning the correspondences."""

    def test_five_percent_is_enough(self):
        """Keeping 5% of the pairs costs at most half again the full-set RMSE."""
        (report,) = _reports(2, seeds=[0], fractions=[1.0, 0.5, 0.25, 0.05, 0.01, 0.005, 0.001])
        assert report.factors["rmse-ratio-0.05"] <= 1.5
        names = [row.name for row in report.rows]
        assert "fraction-0.5" in names
        assert report.row("dnc").fraction == 1.0

        thinned = [row for row in report.rows if row.fraction is not None]
        fractions = [row.fraction for row in thinned]
        assert fractions == sorted(fractions, reverse=True)
        counts = [row.correspondences for row in thinned]
        assert all(a > b for a, b in zip(counts, counts[1:])), counts
        ratios = [report.factors[f"rmse-ratio-{f:g}"] for f in fractions[1:]]
        # Fewer pairs never make the cloud noticeably better.
        assert all(b >= a - 0.1 for a, b in zip(ratios, ratios[1:])), ratios


class TestBoresightCase:
    """Tests for boresight estimation."""

    def test_estimated_close_to_known(self):
        """The estimated boresight nearly matches the known one and beats no calibration."""
        (report,) = _reports(3, seeds=[0])
        assert report.factors["estimated-vs-known"] <= 2.0
        assert report.factors["uncalibrated-vs-estimated"] >= 5.0
        assert report.row("dnc-estimated").boresight is not None

    def test_known_boresight_only(self):
        """Without estimation only the two reference rows are produced."""
        (report,) = _reports(3, seeds=[0], boresight_known=True)
        assert [row.name for row in report.rows] == ["direct-uncalibrated", "dnc-known"]
        assert report.factors == {}


class TestOutageCase:
    """Tests for GNSS outages."""

    def test_outages(self):
        """Correspondences bridge a single outage and restore height in a double one."""
        (report,) = _reports(4, seeds=[0])
        assert len(report.outages) == 2
        assert report.factors["single-pointcloud-mean"] >= 2.0
        assert report.factors["double-up"] >= 2.0
