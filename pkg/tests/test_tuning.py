import numpy as np
import pytest

from panda_lda.core import compute_suff_stats
from panda_lda.datagen import ModelKind, SimSpec, build_model, sample
from panda_lda.errors import InvalidInputError, TuningFailedError
from panda_lda.evaluation import empirical_error
from panda_lda.tuning import TuneGrid, fit_method, grid_search


@pytest.fixture(scope="module")
def problem():
    model = build_model(SimSpec(ModelKind.AR1, p=15, s=3))
    train = sample(model, 40, 40, seed=[1, 0])
    val = sample(model, 40, 40, seed=[1, 1])
    return model, compute_suff_stats(*train), val


def test_default_grid():
    g = TuneGrid()
    assert len(g.lambda_tilde_values) == 80
    assert g.lambda_tilde_values[0] == 0.1 and g.lambda_tilde_values[-1] == 8.0
    assert g.c_values == (20.0,)


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        TuneGrid((0.5, 0.2))
    with pytest.raises(InvalidInputError):
        TuneGrid((0.0, 0.2))
    with pytest.raises(InvalidInputError):
        TuneGrid(())


def test_single_point(problem):
    _, stats, val = problem
    res = grid_search(stats, *val, "PANDA", TuneGrid.single(1.3))
    assert res.best_lambda_tilde == 1.3 and len(res.curve) == 1


def test_curve_matches_refits(problem):
    _, stats, val = problem
    grid = TuneGrid((0.3, 0.8, 1.5, 3.0))
    for method in ("PANDA", "LPD", "AdaLDA"):
        res = grid_search(stats, *val, method, grid, warm_start=False)
        for row in res.curve:
            fit = fit_method(method, stats, row["lambda_tilde"], 20.0)
            assert row["val_error"] == empirical_error(fit.rule, *val)
        errs = [r["val_error"] for r in res.curve]
        assert min(errs) == empirical_error(res.best_fit.rule, *val)
        # ties break toward the smaller lambda-tilde
        first = grid.lambda_tilde_values[errs.index(min(errs))]
        assert res.best_lambda_tilde == first


def test_warm_vs_cold_selection(problem):
    _, stats, val = problem
    grid = TuneGrid(tuple(np.round(np.arange(0.2, 3.01, 0.2), 1)))
    step = 0.2
    for method in ("PANDA", "LPD"):
        warm = grid_search(stats, *val, method, grid, warm_start=True)
        cold = grid_search(stats, *val, method, grid, warm_start=False)
        assert abs(warm.best_lambda_tilde - cold.best_lambda_tilde) <= step + 1e-12


def test_population_risk_in_curve(problem):
    model, stats, val = problem
    res = grid_search(stats, *val, "PANDA", TuneGrid((0.5, 1.0)), model=model)
    assert all(0 < r["pop_risk"] <= 0.5 for r in res.curve)
    res = grid_search(stats, *val, "PANDA", TuneGrid((0.5, 1.0)))
    assert all(np.isnan(r["pop_risk"]) for r in res.curve)


def test_c_grid(problem):
    _, stats, val = problem
    res = grid_search(stats, *val, "PANDA", TuneGrid((0.5, 1.0), (1.0, 20.0)))
    assert len(res.curve) == 4 and res.best_c in (1.0, 20.0)


def test_empty_validation(problem):
    _, stats, _ = problem
    with pytest.raises(InvalidInputError):
        grid_search(stats, np.zeros((0, 15)), np.zeros((0, 15)), "PANDA", TuneGrid.single(1.0))


def test_all_failed(problem, monkeypatch):
    from panda_lda import tuning
    from panda_lda.errors import SolverDivergedError

    def boom(*args, **kwargs):
        raise SolverDivergedError("forced")

    monkeypatch.setitem(tuning.FITTERS, "PANDA", boom)
    _, stats, val = problem
    with pytest.raises(TuningFailedError) as info:
        grid_search(stats, *val, "PANDA", TuneGrid((0.5, 1.0)))
    assert len(info.value.diagnostics) == 2
