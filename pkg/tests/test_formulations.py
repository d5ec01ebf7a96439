"""Optimization-model export and the feasibility certificate."""

import numpy as np
import pytest

from conftest import random_loss_set

from bonusmalus import (
    QuadraticLoss,
    ScaledLossSet,
    SearchDomain,
    WeightsNotConvexCase,
    build_convex_model,
    build_owap_model,
    certificate_values,
    check_certificate,
    default_domain,
    minimize_owa,
    preset_weights,
)
from bonusmalus.formulations import big_m_value


def variable_counts(model):
    continuous = sum(1 for v in model.variables if v.kind == "continuous")
    binary = sum(1 for v in model.variables if v.kind == "binary")
    return continuous, binary


def constraint_counts(model):
    quadratic = sum(1 for c in model.constraints if c.kind == "convex-quadratic")
    linear = sum(1 for c in model.constraints if c.kind == "linear")
    return quadratic, linear


class TestMixedIntegerModel:
    def test_three_expert_counts(self, example1_set):
        model = build_owap_model(example1_set, preset_weights("max", 3), SearchDomain(upper=4.0))
        assert variable_counts(model) == (7, 9)  # y_1..3, z_1..3, P + 9 binaries
        quadratic, linear = constraint_counts(model)
        assert quadratic == 3
        assert linear == 9 + 2 + 3

    def test_single_expert_counts(self):
        loss_set = ScaledLossSet((QuadraticLoss(1.0, 2.0),), (1.0,))
        model = build_owap_model(loss_set, preset_weights("max", 1), SearchDomain(upper=2.0))
        assert variable_counts(model) == (3, 1)
        quadratic, linear = constraint_counts(model)
        assert quadratic == 1
        assert linear == 1 + 0 + 1  # one big-M link, one assignment row
        assert model.objective == ((1.0, "z_1"),)

    def test_big_m_from_domain_endpoints(self, example1_set):
        assert big_m_value(example1_set, SearchDomain(upper=4.0)) == pytest.approx(4.4)

    def test_big_m_dominates_scaled_losses(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            loss_set = random_loss_set(rng)
            domain = default_domain(loss_set)
            big_m = big_m_value(loss_set, domain)
            for premium in (
                domain.lower,
                domain.upper,
                *(loss.mean for loss in loss_set.losses),
            ):
                if domain.lower <= premium <= domain.upper:
                    assert big_m >= max(loss_set.scaled_values(premium))


class TestConvexModel:
    def test_max_weights_accepted(self, example1_set):
        model = build_convex_model(example1_set, preset_weights("max", 3))
        assert model.big_m is None

    def test_min_weights_rejected(self, example1_set):
        with pytest.raises(WeightsNotConvexCase):
            build_convex_model(example1_set, preset_weights("min", 3))

    def test_range_weights_rejected(self, example1_set):
        with pytest.raises(WeightsNotConvexCase):
            build_convex_model(example1_set, preset_weights("range", 3))

    def test_two_expert_counts(self):
        loss_set = ScaledLossSet((QuadraticLoss(1.0, 2.0), QuadraticLoss(2.0, 6.0)), (0.5, 0.5))
        model = build_convex_model(loss_set, preset_weights("sum", 2))
        quadratic, linear = constraint_counts(model)
        assert quadratic == 2
        assert linear == 4  # dual-assignment rows


class TestCertificate:
    def test_three_expert_certificate(self, example1_set):
        domain = SearchDomain(upper=4.0)
        weights = preset_weights("max", 3)
        model = build_owap_model(example1_set, weights, domain)
        solution = minimize_owa(example1_set, weights, domain)
        report = check_certificate(model, certificate_values(example1_set, solution))
        assert report.feasible, report.violations
        assert report.objective_value == pytest.approx(solution.loss_value, abs=1e-9)

    def test_random_panels_all_presets(self):
        rng = np.random.default_rng(52)
        for _ in range(30):
            loss_set = random_loss_set(rng)
            domain = default_domain(loss_set)
            n = len(loss_set)
            for token in ("sum", "max", "min", "median", "hurwicz:0.5"):
                weights = preset_weights(token, n)
                model = build_owap_model(loss_set, weights, domain)
                solution = minimize_owa(loss_set, weights, domain)
                report = check_certificate(model, certificate_values(loss_set, solution))
                assert report.feasible, (token, report.violations)
                assert abs(report.objective_value - solution.loss_value) <= 1e-6


class TestFileOutput:
    def test_write_both_files(self, example1_set, tmp_path):
        model = build_owap_model(example1_set, preset_weights("max", 3), SearchDomain(upper=4.0))
        lp_path, txt_path = model.write(tmp_path / "panel")
        assert lp_path.name == "panel.lp"
        assert txt_path.name == "panel.model.txt"
        lp_text = lp_path.read_text()
        assert lp_text.startswith("\\ owap")
        assert "Minimize" in lp_text and "Binary" in lp_text and lp_text.rstrip().endswith("End")
        assert "\\ quadratic loss_epigraph_1:" in lp_text

    def test_text_format_is_authoritative(self, example1_set):
        model = build_owap_model(example1_set, preset_weights("max", 3), SearchDomain(upper=4.0))
        text = model.text_format()
        assert "experts 3" in text
        assert "loss_epigraph_1 (convex-quadratic)" in text
        # exact repr of the quadratic coefficient survives
        assert repr(1.0 / 3.0) in text

    def test_deterministic_output(self, example1_set):
        model = build_owap_model(example1_set, preset_weights("max", 3), SearchDomain(upper=4.0))
        again = build_owap_model(example1_set, preset_weights("max", 3), SearchDomain(upper=4.0))
        assert model.lp_format() == again.lp_format()
        assert model.text_format() == again.text_format()
