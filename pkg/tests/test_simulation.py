from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.config import load_run_config
from app.core.errors import ConfigError, DataError
from app.models.schemas import Method, MethodConfig, NoiseModel, RunConfig, SynthSpec
from app.simulation import runner
from app.simulation.runner import iteration_seed, run_method, simulate, split_indices
from app.simulation.synth import generate_dataset
from app.utils.io import dataset_from_frame

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def synth_dataset(**kwargs):
    frame = generate_dataset(SynthSpec(**kwargs))
    return dataset_from_frame(frame, group_col="group", feature_cols=["latitude", "longitude"], require_truth=True)


# ==================== GERADOR ====================

class TestSynth:
    def test_deterministic(self):
        first = generate_dataset(SynthSpec(n=100, seed=4))
        second = generate_dataset(SynthSpec(n=100, seed=4))
        pd.testing.assert_frame_equal(first, second)
        assert not generate_dataset(SynthSpec(n=100, seed=5))["pred"].equals(first["pred"])

    def test_group_noise_levels(self):
        frame = generate_dataset(SynthSpec(
            n=20000, noise=NoiseModel.GROUP_HETEROSKEDASTIC, n_groups=4, sigmas=[1.0, 2.0, 3.0, 5.0], seed=1
        ))
        errors = frame["truth"] - frame["pred"]
        for label, sigma in zip(["g1", "g2", "g3", "g4"], [1.0, 2.0, 3.0, 5.0]):
            sd = errors[frame["group"] == label].std()
            assert abs(sd - sigma) / sigma < 0.1, label

    def test_outcome_dependent_tails_are_noisier(self):
        frame = generate_dataset(SynthSpec(n=20000, noise=NoiseModel.OUTCOME_DEPENDENT, tail_factor=1.5, seed=2))
        errors = (frame["truth"] - frame["pred"]).abs()
        z = (frame["pred"] - 10.0).abs() / 2.0
        assert errors[z > 1.5].mean() > 2 * errors[z < 0.5].mean()

    def test_columns(self):
        frame = generate_dataset(SynthSpec(n=10, n_groups=2))
        assert list(frame.columns) == ["pred", "truth", "group", "latitude", "longitude"]
        assert set(frame["group"]) <= {"g1", "g2"}


# ==================== PARTIÇÕES E SEMENTES ====================

class TestSplits:
    def test_split_sizes_and_disjointness(self):
        calib, test = split_indices(11, 0.5, seed=3, index=0)
        assert len(calib) == 5 and len(test) == 6
        assert sorted([*calib, *test]) == list(range(11))

    def test_split_reproducible_per_iteration(self):
        a = split_indices(100, 0.5, seed=3, index=7)[0]
        b = split_indices(100, 0.5, seed=3, index=7)[0]
        c = split_indices(100, 0.5, seed=3, index=8)[0]
        assert a.tolist() == b.tolist() and a.tolist() != c.tolist()

    def test_split_needs_both_sides(self):
        with pytest.raises(DataError):
            split_indices(1, 0.5, seed=3, index=0)

    def test_iteration_seed(self):
        assert iteration_seed(1, 0) == iteration_seed(1, 0)
        assert iteration_seed(1, 0) != iteration_seed(1, 1)


# ==================== DESPACHO ====================

@pytest.mark.parametrize("entry,label", [
    ({"method": "conformal"}, "SCP"),
    ({"method": "conformal", "distance": {"enabled": True}}, "DWCP"),
    ({"method": "mondrian"}, "MCP"),
    ({"method": "ccp", "ccp": {"n_clusters": 2}}, "CCP"),
    ({"method": "bccp", "bccp": {"n_bins": 3}}, "BCCP(d)"),
    ({"method": "bccp", "bccp": {"n_bins": 3, "contiguize": True}}, "BCCP(c)"),
    ({"method": "bootstrap", "bootstrap": {"n_bootstrap": 200}}, "Bootstrap"),
    ({"method": "parametric", "parametric": {"dist": "logistic"}}, "Logistic"),
])
def test_run_method_dispatch(entry, label):
    data = synth_dataset(n=400, noise=NoiseModel.GROUP_HETEROSKEDASTIC, sigmas=[1.0, 3.0], seed=6)
    cfg = MethodConfig.model_validate(entry)
    assert cfg.display_label == label
    calib, test = data.subset(np.arange(200)), data.subset(np.arange(200, 400))
    table = run_method(cfg, calib, test, seed=1)
    assert len(table) == 200
    assert np.mean(table.covers(test.truth)) > 0.75


def test_parametric_with_supplied_pars_skips_calibration():
    data = synth_dataset(n=40, seed=6)
    cfg = MethodConfig.model_validate({"method": "parametric", "parametric": {"pars": {"sd": 2.0}}})
    table = run_method(cfg, data.subset(np.arange(20)), data.subset(np.arange(20, 40)), seed=1)
    np.testing.assert_allclose(table.upper - table.pred, 2.0 * 1.6448536269514722)


def test_grouped_methods_need_groups():
    frame = generate_dataset(SynthSpec(n=40, seed=6))
    data = dataset_from_frame(frame, require_truth=True)
    cfg = MethodConfig(method=Method.MONDRIAN)
    with pytest.raises(DataError):
        run_method(cfg, data.subset(np.arange(20)), data.subset(np.arange(20, 40)), seed=1)


def test_methods_inherit_top_level_values():
    config = RunConfig.model_validate({
        "alpha": 0.2,
        "score": "raw",
        "methods": [{"method": "conformal"}, {"method": "mondrian", "alpha": 0.05, "label": "MCP 95"}],
    })
    first, second = config.method_entries()
    assert (first.alpha, first.score.value, first.display_label) == (0.2, "raw", "SCP")
    assert (second.alpha, second.display_label) == (0.05, "MCP 95")


# ==================== SIMULAÇÃO ====================

SMALL_STUDY = {
    "n_iterations": 8,
    "group_col": "group",
    "methods": [
        {"method": "conformal"},
        {"method": "mondrian"},
        {"method": "ccp", "ccp": {"n_clusters": 2}},
        {"method": "bootstrap", "bootstrap": {"n_bootstrap": 100}},
        {"method": "bccp", "bccp": {"n_bins": 3}},
    ],
}


def test_simulation_independent_of_threads():
    data = synth_dataset(n=300, noise=NoiseModel.GROUP_HETEROSKEDASTIC, n_groups=3, sigmas=[1.0, 2.0, 4.0], seed=9)
    config = RunConfig.model_validate(SMALL_STUDY)
    single = simulate(config, data, threads=1)
    pooled = simulate(config, data, threads=4)
    pd.testing.assert_frame_equal(single.aggregate, pooled.aggregate)
    pd.testing.assert_frame_equal(single.groups, pooled.groups)
    pd.testing.assert_frame_equal(single.bins, pooled.bins)
    assert single.statuses["sucesso"] == 8


def test_simulation_rejects_duplicate_labels():
    data = synth_dataset(n=100, seed=9)
    config = RunConfig.model_validate({"methods": [{"method": "conformal"}, {"method": "conformal"}]})
    with pytest.raises(ConfigError):
        simulate(config, data)


def test_partial_iterations_are_recorded():
    data = synth_dataset(n=100, n_groups=40, seed=9)
    config = RunConfig.model_validate({
        "n_iterations": 3,
        "group_col": "group",
        "methods": [{"method": "conformal"}, {"method": "mondrian"}],
    })
    result = simulate(config, data)
    assert result.statuses["parcial"] == 3
    assert result.aggregate.set_index("method").loc["MCP", "iterations_failed"] == 3
    assert set(result.failures["method"]) == {"MCP"}


def test_single_balanced_bin_matches_standard():
    data = synth_dataset(n=200, seed=9)
    config = RunConfig.model_validate({
        "n_iterations": 2,
        "methods": [{"method": "conformal"}, {"method": "bccp", "bccp": {"n_bins": 1, "contiguize": True}}],
    })
    result = simulate(config, data)
    assert result.statuses["sucesso"] == 2
    aggregate = result.aggregate.set_index("method")
    assert aggregate.loc["BCCP(c)", "coverage"] == aggregate.loc["SCP", "coverage"]
    assert list(result.bins.columns) == ["method", "1", "mae"]


def test_bin_failure_does_not_abort_simulation(monkeypatch):
    def unavailable(cfg, calib_truths):
        raise DataError("bins indisponíveis")

    monkeypatch.setattr(runner, "bin_spec_for", unavailable)
    data = synth_dataset(n=200, seed=9)
    config = RunConfig.model_validate({
        "n_iterations": 3,
        "methods": [{"method": "conformal"}, {"method": "bccp", "bccp": {"n_bins": 2}}],
    })
    result = simulate(config, data)
    assert result.statuses["parcial"] == 3
    assert set(result.failures["method"]) == {"BCCP(d)"}
    assert result.aggregate.set_index("method").loc["SCP", "iterations_ok"] == 3


@pytest.mark.slow
def test_group_study_ordering():
    config = load_run_config(CONFIGS / "simulation_groups.toml", overrides={"n_iterations": 50})
    data = synth_dataset(**config.synth.model_dump())
    result = simulate(config, data, threads=4)
    mae = result.aggregate.set_index("method")["group_mae"]
    for local in ("MCP", "CCP", "DWCP"):
        for pooled in ("SCP", "Bootstrap", "Normal", "Logistic"):
            assert mae[local] < mae[pooled], (local, pooled)


@pytest.mark.slow
def test_bin_study_ordering():
    config = load_run_config(CONFIGS / "simulation_bins.toml", overrides={"n_iterations": 50})
    frame = generate_dataset(config.synth)
    data = dataset_from_frame(frame, require_truth=True)
    result = simulate(config, data, threads=4)
    mae = result.aggregate.set_index("method")["bin_mae"]
    assert mae["BCCP(d)"] < mae["SCP"]
    assert mae["BCCP(c)"] < mae["SCP"]
