"""Verification pipeline: classification, reports, determinism."""

import json

import numpy as np
import pytest

from whitneygeo.immersions import make_spec
from whitneygeo.verify import (
    Tolerances,
    classify_equality,
    report_to_csv_row,
    report_to_json,
    report_to_markdown,
    run_case,
    CSV_COLUMNS,
)


@pytest.fixture(scope="module")
def whitney_report():
    return run_case(make_spec("whitney_c0", 2, r=1.0), resolution=48, seed=0)


@pytest.fixture(scope="module")
def torus_report():
    return run_case(make_spec("product_torus", 2), resolution=24, seed=0)


class TestClassifyLogic:
    def test_branches(self):
        tol = Tolerances()
        f = classify_equality
        assert f(1e-8, 1e-12, 1.0, tol, True) == "PARALLEL_BRANCH"
        assert f(1e-8, 1.0, 1e-10, tol, True) == "WHITNEY_BRANCH"
        assert f(1e-8, 1.0, 1.0, tol, True) == "UNRESOLVED"
        assert f(1e-3, 1.0, 1.0, tol, True) == "STRICT"
        assert f(1e-5, 1.0, 1.0, tol, True) == "UNRESOLVED"
        assert f(1e-8, 1e-12, 1.0, tol, False) == "UNRESOLVED"

    def test_tolerance_ordering_enforced(self):
        with pytest.raises(ValueError):
            Tolerances(strictness=1e-7, classification=1e-6)
        with pytest.raises(ValueError):
            Tolerances(classification=1e-10, inequality_slack=1e-9)


class TestCaseRuns:
    def test_whitney_branch(self, whitney_report):
        r = whitney_report
        assert r.classification == "WHITNEY_BRANCH"
        assert abs(r.integrals["defect_normalized"]) < 1e-10
        assert not r.hard_failures
        assert r.residual_sup["whitney_residual"] < 1e-10

    def test_parallel_branch_torus(self, torus_report):
        r = torus_report
        assert r.classification == "PARALLEL_BRANCH"
        assert abs(r.integrals["defect_normalized"]) < 1e-12
        assert r.residual_sup["sup_nabla_h"] < 1e-12
        assert not r.hard_failures

    def test_parallel_branch_totally_geodesic(self):
        r = run_case(make_spec("totally_geodesic_cp", 2), resolution=24, seed=0)
        assert r.classification == "PARALLEL_BRANCH"
        assert not r.hard_failures

    def test_strict_perturbed(self):
        r = run_case(
            make_spec("perturbed", 2, epsilon=0.05, seed=3), resolution=48, seed=3
        )
        assert r.classification == "STRICT"
        assert r.integrals["defect_normalized"] > 1e-4
        assert not r.hard_failures
        assert r.residual_sup["rk4_step_drift"] < 1e-9

    def test_borderline_perturbation_reported_unresolved(self):
        # a tiny flow lands between the equality and strictness thresholds
        r = run_case(
            make_spec("perturbed", 2, epsilon=5e-4, seed=3), resolution=48, seed=3
        )
        assert r.classification == "UNRESOLVED"
        assert not r.hard_failures
        assert (
            Tolerances().classification
            < r.integrals["defect_normalized"]
            < Tolerances().strictness
        )

    def test_yano_gradient_fields_vanish(self, whitney_report):
        for key, val in whitney_report.yano.items():
            if key.startswith("richardson"):
                continue
            assert abs(val) < 1e-8

    def test_coarse_grid_flags_honestly(self):
        # at low resolution the integral certificates must not pass silently
        r = run_case(make_spec("whitney_c0", 2, r=1.0), resolution=16, seed=0)
        assert r.hard_failures
        assert r.classification == "UNRESOLVED"


class TestClassificationStability:
    def test_same_label_under_refinement(self):
        labels = set()
        for K in (24, 48):
            labels.add(
                run_case(make_spec("product_torus", 2), resolution=K).classification
            )
        assert labels == {"PARALLEL_BRANCH"}

    def test_whitney_label_under_refinement(self):
        labels = {
            run_case(make_spec("whitney_c0", 2, r=1.0), resolution=K).classification
            for K in (48, 64)
        }
        assert labels == {"WHITNEY_BRANCH"}


class TestReports:
    def test_json_schema_fields(self, whitney_report):
        doc = json.loads(report_to_json(whitney_report))
        for key in (
            "report_version", "case", "n", "parameters", "model",
            "model_self_test", "resolution", "num_nodes", "seed",
            "residual_sup", "residual_l2", "gap_minima", "integrals",
            "yano", "classification", "hard_failures", "conformal",
            "effective_config",
        ):
            assert key in doc
        assert doc["report_version"] == 1
        for key in ("volume", "ric_direction", "nabla_h_sq", "rhs_scaled",
                    "defect", "defect_normalized", "richardson_defect"):
            assert key in doc["integrals"]

    def test_csv_row_matches_columns(self, whitney_report):
        row = report_to_csv_row(whitney_report)
        assert len(row) == len(CSV_COLUMNS)
        assert row[0] == "whitney_c0"
        assert row[3] == "WHITNEY_BRANCH"

    def test_markdown_renders(self, torus_report):
        text = report_to_markdown(torus_report)
        assert "PARALLEL_BRANCH" in text
        assert "| check | sup residual |" in text

    def test_reports_byte_identical_across_runs(self):
        a = run_case(make_spec("product_torus", 2), resolution=16, seed=5)
        b = run_case(make_spec("product_torus", 2), resolution=16, seed=5)
        assert report_to_json(a) == report_to_json(b)

    def test_seed_changes_sampled_quantities_only(self):
        a = run_case(make_spec("product_torus", 2), resolution=16, seed=5)
        b = run_case(make_spec("product_torus", 2), resolution=16, seed=6)
        assert a.classification == b.classification
        assert a.integrals["defect_normalized"] == b.integrals["defect_normalized"]


class TestConformalBlock:
    def test_spread_control_totally_geodesic(self):
        r = run_case(
            make_spec("totally_geodesic_cp", 2), resolution=24, conformal=True
        )
        assert r.conformal["weyl_sup"] is None  # n < 4
        assert r.conformal["sectional_spread"] < 1e-9

    def test_whitney_two_sphere_has_spread(self):
        r = run_case(
            make_spec("whitney_c0", 2, r=1.0), resolution=24, conformal=True
        )
        assert r.conformal["sectional_spread"] > 1e-3


class TestIntegrateField:
    def test_divergence_identity_integral(self):
        from whitneygeo.verify import integrate_field

        res = integrate_field(
            make_spec("product_torus", 2), "yano_integrand", resolution=16
        )
        assert abs(res.value) < 1e-12
        assert res.resolved(1e-8)

    def test_volume_normalizer_field(self):
        from whitneygeo.verify import integrate_field
        import math

        res = integrate_field(
            make_spec("product_torus", 2, radii=(1.0, 1.0)),
            "h_norm2",
            resolution=16,
        )
        # |h|^2 = 1 for the unit bicircular torus scaled by the flat metric
        assert res.value == pytest.approx(2.0 * (2 * math.pi) ** 2, rel=1e-12)
