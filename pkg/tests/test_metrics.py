"""Metric arithmetic, rank bookkeeping, and the evaluation report."""

import numpy as np
import pytest

from loaddms.backtest import DmsResult, WindowConfig
from loaddms.errors import DataError
from loaddms.metrics import (EvalReport, ape, evaluate_run, improvement,
                             mape, nmae, rank_distribution, top_share)
from loaddms.pool.pool import ForecastMatrix


class TestMape:
    def test_perfect_forecast_is_zero(self):
        y = np.array([100.0, 250.0, 80.0])
        assert mape(y, y) == 0.0

    def test_two_point_example(self):
        assert mape([100.0, 200.0], [110.0, 180.0]) == pytest.approx(10.0)

    def test_single_point(self):
        assert mape([50.0], [49.0]) == pytest.approx(2.0)

    def test_rejects_nonpositive_actuals(self):
        with pytest.raises(DataError):
            mape([100.0, 0.0], [90.0, 10.0])

    @pytest.mark.parametrize("k", [0.5, 2.0, 10.0])
    def test_scale_invariance_exact(self, k):
        # Integer-valued series keep k*y exact in floating point, so the
        # scaled quotients are identical, not merely close.
        y = np.array([100.0, 220.0, 75.0, 160.0])
        pred = np.array([104.0, 209.0, 80.0, 150.0])
        assert mape(k * y, k * pred) == mape(y, pred)


class TestNmae:
    def test_perfect_forecast_is_zero(self):
        y = np.array([100.0, 250.0])
        assert nmae(y, y, 300.0) == 0.0

    def test_two_point_example(self):
        assert nmae([100.0, 200.0], [110.0, 180.0], 200.0) == pytest.approx(7.5)

    def test_constant_error_closed_form(self):
        y = np.full(20, 400.0)
        pred = y + 12.0
        assert nmae(y, pred, 600.0) == pytest.approx(100.0 * 12.0 / 600.0)

    def test_capacity_defaults_to_peak_actual(self):
        y = np.array([100.0, 200.0])
        pred = np.array([110.0, 180.0])
        assert nmae(y, pred) == nmae(y, pred, 200.0)

    def test_rejects_nonpositive_capacity(self):
        with pytest.raises(DataError):
            nmae([100.0], [90.0], 0.0)

    def test_scale_equivariance(self):
        y = np.array([100.0, 220.0, 75.0])
        pred = np.array([104.0, 209.0, 80.0])
        assert nmae(3.0 * y, 3.0 * pred, 3.0 * 250.0) == pytest.approx(
            nmae(y, pred, 250.0))


class TestImprovement:
    def test_halved_error_row(self):
        # Rounded two-decimal inputs land within 0.1 of the unrounded value.
        val = improvement(6.74, 3.23)
        assert val == pytest.approx(100.0 * (6.74 - 3.23) / 6.74)
        assert abs(val - 52.06) < 0.1

    def test_identity(self):
        assert improvement(4.2, 4.2) == 0.0

    def test_perfect_dms(self):
        assert improvement(5.0, 0.0) == 100.0

    def test_rejects_zero_base(self):
        with pytest.raises(DataError):
            improvement(0.0, 1.0)


class TestRankDistribution:
    def test_always_best_model(self):
        apes = np.column_stack([np.full(7, 1.0), np.full(7, 2.0),
                                np.full(7, 3.0)])
        counts = rank_distribution(apes)
        assert counts[0, 0] == 7
        assert counts[0, 1:].sum() == 0

    def test_alternating_pair(self):
        a = np.array([1.0, 2.0] * 5)
        b = np.array([2.0, 1.0] * 5)
        counts = rank_distribution(np.column_stack([a, b]))
        assert counts[0].tolist() == [5, 5]
        assert counts[1].tolist() == [5, 5]

    def test_counts_sum_to_steps(self, rng):
        apes = rng.random((40, 6))
        counts = rank_distribution(apes, selected=rng.integers(0, 6, 40))
        assert np.all(counts.sum(axis=1) == 40)
        assert counts.shape == (7, 6)

    def test_selected_row_counts_chosen_rank(self):
        apes = np.array([[1.0, 2.0], [2.0, 1.0], [1.0, 2.0]])
        counts = rank_distribution(apes, selected=[0, 0, 1])
        # chose rank 1, rank 2, rank 2
        assert counts[2].tolist() == [1, 2]


class TestTopShare:
    def test_always_rank_one(self):
        apes = np.column_stack([np.full(10, 1.0), np.full(10, 5.0)])
        assert top_share(apes, np.zeros(10, dtype=int), 1) == 1.0

    def test_mixed_selection(self):
        apes = np.array([[1.0, 2.0, 3.0]] * 4)
        sel = np.array([0, 1, 2, 2])
        assert top_share(apes, sel, 2) == pytest.approx(0.5)

    def test_rank_is_per_step_not_average(self):
        # Model 0 is best on average but worst at step 1; a per-step
        # definition must notice that.
        apes = np.array([[1.0, 5.0], [9.0, 2.0], [1.0, 5.0], [1.0, 5.0]])
        sel = np.array([0, 0, 0, 0])
        assert top_share(apes, sel, 1) == pytest.approx(0.75)


def _toy_run():
    T, N = 12, 3
    rng = np.random.default_rng(3)
    y = rng.uniform(90.0, 110.0, T)
    preds = y[:, None] + np.array([1.0, -2.0, 4.0])[None, :]
    ts = np.datetime64("2015-01-01T00") + np.arange(T).astype("timedelta64[h]")
    fmat = ForecastMatrix(preds=preds, y=y, timestamps=ts,
                          model_ids=["M1", "M2", "M3"])
    sel = np.zeros(T, dtype=np.int64)
    apes = fmat.ape()
    ranks = np.argsort(np.argsort(apes, axis=1, kind="stable"),
                       axis=1, kind="stable") + 1
    result = DmsResult(
        timestamps=ts, selected=sel,
        realized_rank=ranks[np.arange(T), sel],
        agent_index=np.repeat(np.arange(3), 4),
        dms_pred=preds[np.arange(T), sel], y=y,
        model_ids=["M1", "M2", "M3"], agents=[None, None, None],
        config=WindowConfig(top_k=2))
    return fmat, result


class TestEvalReport:
    def test_fields_and_identities(self):
        fmat, result = _toy_run()
        rep = evaluate_run(fmat, result, capacity=120.0)
        assert rep.capacity == 120.0
        assert rep.n_steps == 12
        assert rep.dms_mape == pytest.approx(rep.model_mape[0])
        assert rep.improvement_mape[0] == pytest.approx(0.0)
        assert np.all(rep.rank_counts.sum(axis=1) == 12)

    def test_default_capacity_is_peak_actual(self):
        fmat, result = _toy_run()
        rep = evaluate_run(fmat, result)
        assert rep.capacity == pytest.approx(float(fmat.y.max()))

    def test_text_and_csv_outputs(self, tmp_path):
        fmat, result = _toy_run()
        rep = evaluate_run(fmat, result)
        text = rep.to_text()
        assert "M2" in text and "DMS" in text and "NA" in text
        p = tmp_path / "eval.csv"
        rep.to_csv(p)
        lines = p.read_text().strip().splitlines()
        assert lines[0].startswith("model,mape_pct")
        assert len(lines) == 1 + 3 + 1
        assert lines[-1].startswith("DMS,")
        assert lines[-1].endswith("NA,NA")

    def test_rejects_short_forecast_matrix(self):
        fmat, result = _toy_run()
        clipped = ForecastMatrix(preds=fmat.preds[:6], y=fmat.y[:6],
                                 timestamps=fmat.timestamps[:6],
                                 model_ids=fmat.model_ids)
        with pytest.raises(DataError):
            evaluate_run(clipped, result)


def test_ape_matches_mape_mean(rng):
    y = rng.uniform(50.0, 150.0, 30)
    pred = y * rng.uniform(0.9, 1.1, 30)
    assert float(np.mean(ape(y, pred))) == pytest.approx(mape(y, pred))
