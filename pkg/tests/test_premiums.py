"""Panel premiums, bonus-malus tables, and the property audit."""

import numpy as np
import pytest

from conftest import make_panel, nonnegative_presets
from reference_tables import (
    BETA_EXPERTS,
    GAMMA_EXPERTS,
    GRID_PRESETS,
    TABLE7,
    TABLE8,
)

from bonusmalus import (
    ClaimHistory,
    DegenerateCollective,
    Expert,
    ExpertPanel,
    Family,
    MomentMode,
    PriorSpec,
    audit_properties,
    bonus_malus,
    bonus_malus_table,
    collective_loss_set,
    lemaire_premium,
    minimize_owa,
    owa_bayes_premium,
    owa_collective_premium,
    preset_weights,
)

PG = Family.POISSON_GAMMA
GB = Family.GEOMETRIC_BETA


def two_expert_panel(specs):
    experts = tuple(
        Expert(f"expert-{i + 1}", PriorSpec(PG, a, b), 0.5)
        for i, (a, b) in enumerate(specs)
    )
    return ExpertPanel(experts, MomentMode.PREDICTIVE_AT_MEAN)


class TestCollectivePremium:
    def test_nonadditivity_panels(self):
        weights = preset_weights("max", 2)
        first = owa_collective_premium(two_expert_panel(((2, 10), (2, 20))), weights)
        second = owa_collective_premium(two_expert_panel(((3, 10), (7, 20))), weights)
        combined = owa_collective_premium(two_expert_panel(((5, 10), (9, 20))), weights)
        assert first.premium == pytest.approx(0.2, abs=1e-9)
        assert second.premium == pytest.approx(0.35, abs=1e-9)
        assert combined.premium == pytest.approx(0.5, abs=1e-9)
        assert combined.premium != pytest.approx(first.premium + second.premium, abs=1e-6)

    def test_single_expert_is_prior_mean(self):
        panel = ExpertPanel((Expert("solo", PriorSpec(PG, 2.0, 10.0), 1.0),))
        solution = owa_collective_premium(panel, preset_weights("max", 1))
        assert solution.premium == pytest.approx(0.2, abs=1e-12)

    def test_bayes_without_history_equals_collective(self, gamma_panel):
        weights = preset_weights("hurwicz:0.5", 4)
        collective = owa_collective_premium(gamma_panel, weights)
        bayes = owa_bayes_premium(gamma_panel, ClaimHistory(0, 0), weights)
        assert bayes.premium == pytest.approx(collective.premium, abs=1e-12)

    def test_sum_bayes_is_mean_of_posterior_means(self, gamma_panel):
        solution = owa_bayes_premium(gamma_panel, ClaimHistory(1, 0), preset_weights("sum", 4))
        expected = np.mean([a / (b + 1.0) for a, b in GAMMA_EXPERTS])
        assert solution.premium == pytest.approx(expected, abs=1e-9)
        assert solution.premium == pytest.approx(0.11662, abs=1e-5)


class TestLemaire:
    def test_beta_expert_one(self):
        expert = Expert("e1", PriorSpec(GB, 30.59, 6.66), 1.0)
        assert lemaire_premium(expert, ClaimHistory(1, 0)) == pytest.approx(96.7310, abs=1e-4)

    def test_beta_expert_four(self):
        expert = Expert("e4", PriorSpec(GB, 2.1, 3.2), 1.0)
        assert lemaire_premium(expert, ClaimHistory(1, 1)) == pytest.approx(68.7500, abs=1e-4)

    def test_no_history_is_base(self):
        expert = Expert("e", PriorSpec(PG, 1.3, 2.6), 1.0)
        assert lemaire_premium(expert, ClaimHistory(0, 0)) == pytest.approx(100.0)

    def test_full_beta_grids(self):
        for index, (a, b) in enumerate(BETA_EXPERTS, start=1):
            expert = Expert(f"e{index}", PriorSpec(GB, a, b), 1.0)
            for t in range(1, 5):
                for k in range(5):
                    value = lemaire_premium(expert, ClaimHistory(t, k))
                    assert value == pytest.approx(TABLE7[index][t - 1][k], abs=5e-4), (
                        index, t, k,
                    )


class TestBonusMalus:
    def test_base_is_100(self, gamma_panel, beta_panel):
        for panel in (gamma_panel, beta_panel):
            for token in GRID_PRESETS:
                weights = preset_weights(token, 4)
                value = bonus_malus(panel, ClaimHistory(0, 0), weights)
                assert value == pytest.approx(100.0, abs=1e-9)

    def test_gamma_sum_first_cell(self, gamma_panel):
        value = bonus_malus(gamma_panel, ClaimHistory(1, 0), preset_weights("sum", 4))
        assert value == pytest.approx(82.6582, abs=1.5)

    def test_beta_single_expert_first_cell(self):
        panel = ExpertPanel((Expert("e1", PriorSpec(GB, 30.59, 6.66), 1.0),))
        value = bonus_malus(panel, ClaimHistory(1, 0), preset_weights("max", 1))
        assert value == pytest.approx(96.7310, abs=1e-4)

    def test_degenerate_collective_raises(self):
        panel = ExpertPanel((Expert("zero", PriorSpec(PG, 1e-12, 1e6), 1.0),))
        with pytest.raises(DegenerateCollective):
            bonus_malus(panel, ClaimHistory(1, 0), preset_weights("max", 1))


class TestTables:
    def test_zero_period_table(self, beta_panel):
        table = bonus_malus_table(beta_panel, preset_weights("sum", 4), 0, 4)
        assert table.rows == ((100.0,),)
        assert table.to_csv().splitlines()[1] == "0,100.0000,,,,"

    def test_beta_sum_first_cell(self, beta_panel):
        table = bonus_malus_table(beta_panel, preset_weights("sum", 4), 4, 4)
        assert table.cell(1, 0) == pytest.approx(56.8821, abs=0.05)

    def test_full_beta_grids(self, beta_panel):
        for token in GRID_PRESETS:
            table = bonus_malus_table(beta_panel, preset_weights(token, 4), 4, 4)
            for t in range(1, 5):
                for k in range(5):
                    assert table.cell(t, k) == pytest.approx(
                        TABLE8[token][t - 1][k], abs=0.25
                    ), (token, t, k)

    def test_beta_min_matches_third_expert(self, beta_panel):
        table = bonus_malus_table(beta_panel, preset_weights("min", 4), 4, 4)
        expert = Expert("e3", PriorSpec(GB, *BETA_EXPERTS[2]), 1.0)
        for t in range(1, 5):
            for k in range(5):
                single = lemaire_premium(expert, ClaimHistory(t, k))
                assert table.cell(t, k) == pytest.approx(single, abs=1e-3), (t, k)

    def test_csv_and_text_round_to_precision(self, beta_panel):
        table = bonus_malus_table(beta_panel, preset_weights("sum", 4), 1, 1)
        csv_text = table.to_csv(precision=2)
        assert csv_text.splitlines()[0] == "t\\k,0,1"
        assert csv_text.splitlines()[2].startswith("1,56.88,")
        text = table.to_text(precision=2)
        assert "56.88" in text

    def test_single_expert_collapse(self):
        # A panel of identical experts behaves like the expert alone.
        rng = np.random.default_rng(31)
        for _ in range(20):
            alpha = rng.uniform(0.3, 4.0)
            beta = rng.uniform(0.5, 8.0)
            copies = int(rng.integers(2, 6))
            solo = ExpertPanel((Expert("solo", PriorSpec(PG, alpha, beta), 1.0),))
            clones = ExpertPanel(
                tuple(
                    Expert(f"c{i}", PriorSpec(PG, alpha, beta), 1.0 / copies)
                    for i in range(copies)
                )
            )
            for token in nonnegative_presets(copies):
                weights = preset_weights(token, copies)
                expected = owa_collective_premium(solo, preset_weights("max", 1)).premium
                assert owa_collective_premium(clones, weights).premium == pytest.approx(
                    expected, abs=1e-9
                ), token


class TestMaxMinCoupling:
    def test_min_loss_value_is_smallest_scaled_loss(self, gamma_panel):
        weights = preset_weights("min", 4)
        solution = owa_collective_premium(gamma_panel, weights)
        scaled = collective_loss_set(gamma_panel).scaled_values(solution.premium)
        assert solution.loss_value == pytest.approx(min(scaled), abs=1e-12)

    def test_max_loss_value_is_largest_scaled_loss(self, gamma_panel):
        weights = preset_weights("max", 4)
        solution = owa_collective_premium(gamma_panel, weights)
        scaled = collective_loss_set(gamma_panel).scaled_values(solution.premium)
        assert solution.loss_value == pytest.approx(max(scaled), abs=1e-12)


class TestPropertyAudit:
    def test_all_checks_pass_on_gamma_panel(self, gamma_panel):
        for token in GRID_PRESETS:
            audit = audit_properties(gamma_panel, preset_weights(token, 4), trials=50)
            assert audit.passed, [c for c in audit.checks if not c.passed]

    def test_nonadditivity_witness_detail(self, gamma_panel):
        audit = audit_properties(gamma_panel, preset_weights("max", 4), trials=5)
        witness = {check.name: check for check in audit.checks}["additivity-counterexample"]
        assert witness.passed
        assert "0.5000" in witness.detail and "0.5500" in witness.detail

    def test_negative_weights_rejected(self, gamma_panel):
        with pytest.raises(ValueError):
            audit_properties(gamma_panel, preset_weights("range", 4))

    def test_constant_risk_is_exact(self, gamma_panel):
        from bonusmalus import QuadraticLoss, ScaledLossSet

        level = 3.0
        constant = ScaledLossSet(
            tuple(QuadraticLoss(level, level * level) for _ in range(4)),
            gamma_panel.confidences,
        )
        for token in GRID_PRESETS:
            solution = minimize_owa(constant, preset_weights(token, 4))
            assert solution.premium == pytest.approx(level, abs=1e-12), token


class TestPanelValidation:
    def test_confidences_must_sum_to_one(self):
        experts = (
            Expert("a", PriorSpec(PG, 1.0, 1.0), 0.5),
            Expert("b", PriorSpec(PG, 2.0, 1.0), 0.6),
        )
        with pytest.raises(ValueError):
            ExpertPanel(experts)

    def test_families_must_match(self):
        experts = (
            Expert("a", PriorSpec(PG, 1.0, 1.0), 0.5),
            Expert("b", PriorSpec(GB, 3.0, 1.0), 0.5),
        )
        with pytest.raises(ValueError):
            ExpertPanel(experts)

    def test_moment_mode_changes_gamma_tables(self):
        plugin = make_panel(GAMMA_EXPERTS, PG, MomentMode.PREDICTIVE_AT_MEAN)
        exact = make_panel(GAMMA_EXPERTS, PG, MomentMode.PRIOR_SECOND_MOMENT)
        weights = preset_weights("hurwicz:0.5", 4)
        a = bonus_malus(plugin, ClaimHistory(1, 0), weights)
        b = bonus_malus(exact, ClaimHistory(1, 0), weights)
        assert abs(a - b) > 1.0  # the active experts differ between modes

    def test_moment_mode_is_irrelevant_for_beta(self):
        plugin = make_panel(BETA_EXPERTS, GB, MomentMode.PREDICTIVE_AT_MEAN)
        exact = make_panel(BETA_EXPERTS, GB, MomentMode.PRIOR_SECOND_MOMENT)
        weights = preset_weights("hurwicz:0.5", 4)
        a = bonus_malus(plugin, ClaimHistory(2, 3), weights)
        b = bonus_malus(exact, ClaimHistory(2, 3), weights)
        assert a == pytest.approx(b, abs=1e-12)
