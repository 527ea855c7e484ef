import pytest

import dqsops


def test_config_round_trip():
    cfg = dqsops.PipelineConfig()
    cfg.window_size = 250
    cfg.tau_mae = 0.3
    again = dqsops.parse_config(dqsops.serialize_config(cfg))
    assert again == cfg
    assert again.tau_mae == pytest.approx(0.3)
    with pytest.raises(dqsops.ConfigError):
        dqsops.parse_config("no_such_key = 1\n")


def test_divergences():
    assert dqsops.ks_statistic([1, 2, 3], [1, 2, 3]) == 0.0
    assert dqsops.ks_statistic([0, 0], [5, 5]) == 1.0
    assert dqsops.shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)  # bits
    assert dqsops.jensen_shannon_divergence([1, 0], [1, 0]) == 0.0
    h = dqsops.histogram([0.1, 0.2, 0.9], 2, 0.0, 1.0)
    assert h == pytest.approx([2 / 3, 1 / 3])


def test_window_scoring_and_missing_values():
    cfg = dqsops.PipelineConfig()
    clean = dqsops.synthetic_windows(cfg, 7, 20)
    values = [v for w in clean for v in w.present_values()]
    det = dqsops.AnomalyDetector.fit(values, cfg.anomaly_threshold_k)
    ref = dqsops.ReferenceDistribution.from_values(values, cfg.histogram_bins, 0.0, 60.0)
    refs = dqsops.make_references(cfg, det, ref)

    w = dqsops.generate_clean_window(99, 1000, 3)
    scores = dqsops.score_window(w, refs, cfg)
    assert set(scores) == {"accuracy", "completeness", "consistency", "timeliness", "skewness"}
    assert all(0.0 <= s <= 1.0 for s in scores.values())

    holes = dqsops.DataWindow(1, [None, 2.0, None, 4.0])
    assert holes.missing_count() == 2
    assert holes.values[0] is None


def test_mutation_is_exact():
    cfg = dqsops.PipelineConfig()
    plan = dqsops.MutationPlan.uniform(cfg, 0.0)
    plan.completeness_pct = 10
    plan.seed = 4
    w = dqsops.generate_clean_window(0, 200, 1)
    mutated, cells, shift = dqsops.mutate_window(w, plan)
    assert mutated.missing_count() == 20
    assert len(cells) == 20
    assert all(kind == dqsops.MutantClass.missing for _, kind in cells)
    assert shift is None
    with pytest.raises(dqsops.PlanInfeasible):
        plan.completeness_pct = 150
        dqsops.mutate_window(w, plan)


def test_aggregator_and_surrogate():
    order = [dqsops.Dimension.accuracy, dqsops.Dimension.completeness]
    rows = [[0.1 * i, 0.05 * i + 0.01 * (i % 3)] for i in range(20)]
    agg = dqsops.Aggregator.fit(rows, order)
    assert sum(l * l for l in agg.loadings) == pytest.approx(1.0)
    assert agg.consolidate(agg.mu) == pytest.approx(0.0)

    cfg = dqsops.PipelineConfig()
    x, y = [], []
    for i in range(60):
        w = dqsops.generate_clean_window(i, 300, 11)
        f = dqsops.extract_features(w, 0.0, 60.0)
        x.append(f)
        y.append(f[2])
    assert len(x[0]) == len(dqsops.FEATURE_NAMES)
    model = dqsops.SurrogateModel.train(x, y, cfg.forest, 1)
    preds = [model.predict(f) for f in x]
    report = dqsops.evaluate_oracle(y, preds)
    assert report.n_evaluated == 60
    assert report.mae < 0.5


def test_initialization_meets_tolerance():
    cfg = dqsops.PipelineConfig()
    cfg.window_size = 200
    cfg.reference_windows = 20
    cfg.batch_windows = 100
    cfg.max_windows = 300
    cfg.tau_fraction = 1.0
    cfg.forest.n_trees = 10
    init = dqsops.run_initialization(cfg, 3)
    assert init.validation.mae <= init.tau
    assert len(init.targets) > 0
