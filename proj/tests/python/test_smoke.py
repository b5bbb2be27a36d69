import math

import pytest

import churnlab


def test_generate_and_inspect():
    panel = churnlab.generate_synthetic(n=500, churn_rate=0.06, seed=3)
    assert len(panel) == 500
    assert panel.n_churners == 30
    assert panel.months == 36
    assert panel == churnlab.generate_synthetic(n=500, churn_rate=0.06, seed=3)
    assert panel != churnlab.generate_synthetic(n=500, churn_rate=0.06, seed=4)


def test_panel_csv_roundtrip(tmp_path):
    panel = churnlab.generate_synthetic(n=50, churn_rate=0.1, seed=1)
    path = str(tmp_path / "panel.csv")
    panel.save_csv(path)
    assert churnlab.load_csv(path) == panel


def test_aggregations():
    assert churnlab.agg_mean([1.0, 2.0, 3.0]) == pytest.approx(2.0)
    assert churnlab.agg_mean_first_diff([1.0, 2.0, 4.0, 8.0]) == pytest.approx(7.0 / 3.0)
    series = [1.0] * 30 + [2.0] * 6
    lags = churnlab.normalized_lagged(series)
    assert len(lags) == 6
    assert lags[0] == pytest.approx(2.0)


def test_logistic_fit_and_predict():
    X = [[1.0, 0.0], [0.9, 0.1], [-1.0, 0.2], [-1.1, -0.1]] * 5
    y = [1, 1, 0, 0] * 5
    model = churnlab.fit_l1_logistic(X, y, C=10.0)
    probs = model.predict_proba([[1.0, 0.0], [-1.0, 0.0]])
    assert probs[0] > 0.5 > probs[1]
    assert model.weights[0] > 0.0


def test_lstm_train_and_predict():
    seqs, labels = [], []
    for cls in (0, 1):
        for i in range(10):
            level = [1.0] * 4 if cls == 0 else [1.0, 0.6, 0.2, -0.2]
            seqs.append([v + 0.01 * i for v in level for _ in range(3)])
            labels.append(cls)
    model = churnlab.train_lstm(seqs, labels, hidden_units=3, epochs=20,
                                learning_rate=0.01, batch_size=10, seed=2)
    assert model.hidden == 3
    p = model.predict(seqs[0])
    assert 0.0 < p < 1.0


def test_metrics():
    assert churnlab.auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    scores = list(range(100, 0, -1))
    labels = [1] * 10 + [0] * 90
    assert churnlab.lift(scores, labels, fraction=0.1) == pytest.approx(10.0)
    closed = churnlab.empc(scores, labels)
    brute = churnlab.empc_bruteforce(scores, labels)
    assert closed >= 0.0
    assert math.isclose(closed, brute, abs_tol=1e-6 * 200.0)


def test_run_experiment_smoke(tmp_path):
    panel = churnlab.generate_synthetic(n=400, churn_rate=0.08, n_static=4, seed=5)
    out = churnlab.run_experiment(panel, specs=["static"], grid="smoke", seed=1,
                                  outer_k=2, inner_k=2, stack_k=2,
                                  out_dir=str(tmp_path / "res"))
    assert out["audit_violations"] == []
    assert len(out["rows"]) == 1
    row = out["rows"][0]
    assert row["model"] == "Only static"
    assert 0.0 <= row["auc"] <= 1.0
    assert (tmp_path / "res" / "report.csv").exists()
