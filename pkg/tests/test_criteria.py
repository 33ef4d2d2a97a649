import numpy as np
import pytest

from factorstab.criteria import (
    CriterionCurve,
    WeightSequence,
    curves_to_csv_rows,
    evaluate_criteria,
    ic_baseline,
    sc1,
    sc2,
    sc3,
    weighted_select,
)
from factorstab.errors import DegenerateInput, InvalidInput
from factorstab.linalg import EigenSystem, sym_eig_desc
from factorstab.simulate import SimulationConfig, simulate_dataset
from factorstab.stability import InstabilityCurve, ins_curve


def make_ins(values):
    values = np.asarray(values, dtype=np.float64)
    return InstabilityCurve(
        kmax=len(values), n_splits=1, ins=values, raw=values[None, :]
    )


def make_eigs(values):
    values = np.asarray(values, dtype=np.float64)
    return EigenSystem(
        values=values,
        vectors=np.eye(len(values)),
        source_dim=(len(values), len(values)),
    )


STEP_INS = make_ins([0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])


class TestSC1:
    def test_penalty_vanishes_at_kmax(self):
        curve = sc1(make_ins([0.2] * 6))
        assert curve.penalty[-1] == 0.0
        assert curve.values[-1] == pytest.approx(0.2)

    def test_all_zero_ins_selects_kmax(self):
        curve = sc1(make_ins([0.0] * 10))
        assert curve.selected_k == 10

    def test_step_pattern_selects_truth(self):
        curve = sc1(STEP_INS)
        assert curve.selected_k == 4
        assert curve.value_at(4) == pytest.approx(0.6)

    def test_penalty_bounds_and_monotone(self):
        curve = sc1(make_ins([0.5] * 7))
        assert np.all(curve.penalty >= 0) and np.all(curve.penalty <= 1)
        assert np.all(np.diff(curve.penalty) < 0)


class TestSC2:
    def test_reduces_to_ins_at_kmax(self):
        eigs = make_eigs([5.0, 4.0, 3.0, 2.0, 1.0])
        curve = sc2(make_ins([0.1, 0.2, 0.3, 0.4, 0.37]), eigs)
        assert curve.penalty[-1] == 0.0
        assert curve.values[-1] == pytest.approx(0.37)

    def test_analytic_logs(self):
        e = np.e
        eigs = make_eigs([e - 1.0, e - 1.0, 0.0, 0.0])
        curve = sc2(make_ins([0.0] * 4), eigs)
        # l(0) = 2, l(1) = 1
        assert curve.penalty[0] == pytest.approx(0.5, abs=1e-12)

    def test_penalty_strictly_decreasing_while_positive(self):
        eigs = make_eigs([9.0, 5.0, 2.0, 1.0, 0.5])
        curve = sc2(make_ins([0.0] * 5), eigs)
        assert np.all(np.diff(curve.penalty) < 0)
        assert np.all(curve.penalty >= 0) and np.all(curve.penalty <= 1)

    def test_negative_eigenvalues_clamped(self):
        eigs = make_eigs([3.0, 1.0, -1e-9])
        curve = sc2(make_ins([0.0] * 3), eigs)
        assert np.isfinite(curve.values).all()

    def test_degenerate_zero_spectrum(self):
        with pytest.raises(DegenerateInput):
            sc2(make_ins([0.0] * 3), make_eigs([0.0, 0.0, 0.0]))

    def test_needs_enough_eigenvalues(self):
        with pytest.raises(InvalidInput):
            sc2(make_ins([0.0] * 5), make_eigs([1.0, 0.5]))


class TestSC3:
    def test_equal_eigenvalue_closed_form(self):
        # x with covariance = c * I_p: all eigenvalues equal c
        p, c = 6, 2.0
        x = np.sqrt(c) * np.eye(p) * np.sqrt(p)  # x.T x / p = c I
        sigma = sym_eig_desc((x.T @ x) / p).values
        assert np.allclose(sigma, c)
        curve = sc3(make_ins([0.0] * 4), x)
        ks = np.arange(1, 5)
        expected = np.log1p((p - ks) * c**2 / p) / np.log1p(c**2)
        assert np.allclose(curve.penalty, expected, atol=1e-10)

    def test_tail_identity_matches_full_decomposition(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((30, 12))
        curve = sc3(make_ins([0.0] * 5), x)
        sigma = sym_eig_desc((x.T @ x) / 30).values
        total = np.sum(sigma**2)
        for k in range(1, 6):
            tail = np.sum(sigma[k:] ** 2)
            expected = np.log1p(tail / 12) / np.log1p(total / 12)
            assert curve.penalty[k - 1] == pytest.approx(expected, rel=1e-8)

    def test_penalty_in_unit_interval(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((40, 20))
        curve = sc3(make_ins([0.0] * 8), x)
        assert np.all(curve.penalty >= 0) and np.all(curve.penalty <= 1)
        assert np.all(np.diff(curve.penalty) <= 0)

    def test_zero_matrix(self):
        with pytest.raises(DegenerateInput):
            sc3(make_ins([0.0] * 3), np.zeros((8, 8)))


class TestIC:
    def test_g_at_square_shape(self):
        x = np.random.default_rng(2).standard_normal((200, 200))
        curve = ic_baseline(x, 5)
        g = curve.penalty[0]
        assert g == pytest.approx((2.0 / 200.0) * np.log(100.0), rel=1e-12)
        assert g == pytest.approx(0.046051701859880914, rel=1e-12)

    def test_penalty_linear_in_k(self):
        x = np.random.default_rng(3).standard_normal((50, 30))
        curve = ic_baseline(x, 6)
        diffs = np.diff(curve.penalty)
        assert np.allclose(diffs, diffs[0]) and diffs[0] > 0

    def test_zero_tail_degenerate(self):
        rng = np.random.default_rng(4)
        scores = rng.standard_normal((20, 2))
        loadings = rng.standard_normal((10, 2))
        x = scores @ loadings.T  # rank 2: tails vanish beyond k = 2
        with pytest.raises(DegenerateInput):
            ic_baseline(x, 5)

    def test_no_instability_component(self):
        x = np.random.default_rng(5).standard_normal((40, 25))
        assert ic_baseline(x, 4).ins is None


class TestWeightedSelect:
    def test_reproduces_sc1(self):
        rng = np.random.default_rng(6)
        ins = make_ins(rng.uniform(0, 1, 10))
        kmax = 10
        c = (kmax - np.arange(1, kmax + 1)) / kmax
        # c ends at exactly 0 and WeightSequence wants strictly decreasing,
        # which (kmax-k)/kmax is
        w = WeightSequence(c=c, delta=0.05)
        ours = weighted_select(ins, w)
        ref = sc1(ins)
        assert np.array_equal(ours.values, ref.values)
        assert ours.selected_k == ref.selected_k

    def test_constant_gap_with_step_ins(self):
        kmax = 10
        c = np.linspace(0.9, 0.0, kmax)  # gap 0.1
        w = WeightSequence(c=c, delta=0.05)
        curve = weighted_select(STEP_INS, w)
        assert curve.selected_k == 4

    def test_zero_ins_selects_kmax(self):
        c = np.linspace(0.5, 0.05, 6)
        curve = weighted_select(make_ins([0.0] * 6), WeightSequence(c, 0.01))
        assert curve.selected_k == 6

    def test_non_decreasing_weights_rejected(self):
        with pytest.raises(InvalidInput):
            WeightSequence(np.array([0.5, 0.5, 0.1]), 0.1)
        with pytest.raises(InvalidInput):
            WeightSequence(np.array([0.1, 0.5]), 0.1)

    def test_length_mismatch(self):
        w = WeightSequence(np.array([0.5, 0.25, 0.1]), 0.05)
        with pytest.raises(InvalidInput):
            weighted_select(make_ins([0.0] * 4), w)

    def test_selection_conditions(self):
        # gaps of 0.1 with delta strictly below pass for any k_true;
        # the terminal spread must stay under 1 - delta
        w = WeightSequence(np.linspace(0.9, 0.0, 10), delta=0.05)
        assert w.satisfies_selection_conditions(4)
        tight = WeightSequence(np.linspace(0.9, 0.0, 10), delta=0.15)
        assert not tight.satisfies_selection_conditions(4)  # gaps only 0.1


class TestTieBreaking:
    def test_exact_tie_prefers_smallest_k(self):
        values = np.array([0.7, 0.3, 0.3, 0.9])
        curve = CriterionCurve(
            name="SC1", values=values, selected_k=int(np.argmin(values)) + 1,
            penalty=np.zeros(4),
        )
        assert curve.selected_k == 2

    def test_sc1_tie_through_api(self):
        # ins crafted so SC1 is exactly flat at its minimum for k = 2 and 3
        ins = make_ins([0.0, 0.0, 0.25, 1.0])
        curve = sc1(ins)
        v = curve.values
        assert v[1] == v[2] == 0.5
        assert curve.selected_k == 2


class TestSharedEvaluation:
    def test_consistent_with_individual_calls(self):
        cfg = SimulationConfig(n=150, p=60, n_factors=4, scenario="S1",
                               regime="i", seed=7)
        data = simulate_dataset(cfg)
        curve = ins_curve(data.x, 8, 3, seed=8)
        combined = evaluate_criteria(data.x, curve)
        from factorstab.linalg import cov_eigs

        eigs = cov_eigs(data.x, top=8)
        assert np.array_equal(combined["SC1"].values, sc1(curve).values)
        assert np.array_equal(combined["SC2"].values, sc2(curve, eigs).values)
        assert np.array_equal(combined["SC3"].values, sc3(curve, data.x).values)
        assert np.array_equal(
            combined["IC"].values, ic_baseline(data.x, 8).values
        )

    def test_unknown_name(self):
        x = np.random.default_rng(9).standard_normal((30, 10))
        curve = ins_curve(x, 4, 2, seed=10)
        with pytest.raises(InvalidInput):
            evaluate_criteria(x, curve, names=["SC1", "AIC"])


class TestCorollaryGapEmpirics:
    def test_sc2_gap_is_bounded_away_from_zero(self):
        # with p comparable to n and strong distinct signals, the per-step
        # penalty drop {l(k-1) - l(k)} / l(0) stays clearly positive up to K
        cfg = SimulationConfig(n=400, p=400, n_factors=4, scenario="S1",
                               regime="i", seed=11)
        data = simulate_dataset(cfg)
        curve = ins_curve(data.x, 10, 3, seed=12)
        from factorstab.linalg import cov_eigs

        result = sc2(curve, cov_eigs(data.x, top=10))
        penalty = np.concatenate([[1.0], result.penalty])  # l(0)/l(0) = 1
        gaps = -np.diff(penalty)[:4]
        assert np.all(gaps > 1e-3)


class TestCsvRows:
    def test_schema_and_roundtrip(self):
        x = np.random.default_rng(13).standard_normal((40, 20))
        curve = ins_curve(x, 4, 2, seed=14)
        curves = evaluate_criteria(x, curve)
        rows = curves_to_csv_rows(curves.values())
        assert rows[0] == "criterion,k,penalty,ins,value,selected"
        assert len(rows) == 1 + 4 * len(curves)
        body = [r.split(",") for r in rows[1:]]
        sc1_rows = [r for r in body if r[0] == "SC1"]
        assert [float(r[4]) for r in sc1_rows] == list(curves["SC1"].values)
        ic_rows = [r for r in body if r[0] == "IC"]
        assert all(r[3] == "" for r in ic_rows)  # no instability column
        assert sum(int(r[5]) for r in sc1_rows) == 1
