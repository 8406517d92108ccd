import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from irsource import (
    GridSpec,
    ForwardProblem,
    InvalidArgumentError,
    SpatialProfile,
    StrengthRecovery,
    TemporalProfile,
    VarianceTransformer,
    preset,
    reconstruction_error,
    synthesize_flux_ensemble,
    variance_series,
)


@pytest.fixture(scope="module")
def flux():
    cfg = preset("ex1")
    ens = synthesize_flux_ensemble(cfg.problem(), 2000, 0.0, 0)
    return cfg, ens


def test_params_and_clone():
    est = StrengthRecovery(alpha=0.5, points=(0.0,))
    assert est.get_params()["alpha"] == 0.5
    other = clone(est).set_params(max_iter=3)
    assert other.max_iter == 3 and est.max_iter == 500
    assert VarianceTransformer(centered=True).get_params() == {"centered": True, "h_t": 2**-7}


def test_transformer_matches_variance_series(flux):
    cfg, ens = flux
    V = VarianceTransformer(h_t=cfg.h_t).fit_transform(ens.noisy)
    for i, z in enumerate(cfg.boundary_points()):
        np.testing.assert_array_equal(V[i], variance_series(ens, z).values)


def test_pipeline_recovers_strength(flux):
    cfg, ens = flux
    pipe = make_pipeline(VarianceTransformer(h_t=cfg.h_t), StrengthRecovery(points=(0.0, 1.0), h_t=cfg.h_t))
    pipe.fit(ens.noisy)
    est = pipe[-1]
    assert est.strength_.shape == (128,) and est.n_iter_ > 0
    assert reconstruction_error(est.reconstruction_, TemporalProfile("sine")) < 0.15
    np.testing.assert_array_equal(est.predict([0.0, 0.25 + 1e-6]), est.strength_[[0, 32]])


def test_unfitted_and_invalid_inputs():
    with pytest.raises(NotFittedError):
        StrengthRecovery().predict([0.1])
    with pytest.raises(InvalidArgumentError):
        StrengthRecovery(points=(0.0,)).fit(np.ones((2, 8)))
    with pytest.raises(ValueError):
        VarianceTransformer().fit(np.full((3, 1, 4), np.nan))
    t = VarianceTransformer().fit(np.zeros((3, 2, 4)))
    with pytest.raises(InvalidArgumentError):
        t.transform(np.zeros((3, 1, 4)))
