import pytest

from irsource import PRESETS, ExperimentConfig, InvalidArgumentError, preset


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load_and_roundtrip(name):
    cfg = preset(name)
    assert cfg.name == name
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_preset_contents():
    ex1, ex2, ex3 = (preset(n) for n in PRESETS)
    assert (ex1.equation, ex1.dim, ex1.f, ex1.alpha, ex1.epsilon) == ("heat", 1, "sine", 1e-2, 2e-3)
    assert (ex2.equation, ex2.f, ex2.paths, ex2.alpha) == ("wave", "two_mode", 10_000, 5e-7)
    assert (ex3.dim, ex3.g, len(ex3.points)) == (2, "biquadratic", 3)
    assert ex3.grid().n_x == ex3.grid().n_y == 32


def test_snapped_points_of_2d_preset():
    coords = [z.coords for z in preset("ex3").problem().snapped_points()]
    assert coords == [(0.0, 0.1875), (0.59375, 0.0), (1.0, 0.40625)]


@pytest.mark.parametrize("change", [
    dict(equation="wave", dim=2, g="biquadratic", points=("0,0.5",)),
    dict(equation="diffusion"),
    dict(h_x=0.3),
    dict(alpha=0.0),
    dict(paths=0),
    dict(seed=-1),
    dict(window=(0.5, 0.2)),
    dict(points=("0,0.5",)),
    dict(g="biquadratic"),
    dict(f="square"),
])
def test_invalid_configs_rejected(change):
    with pytest.raises(InvalidArgumentError):
        preset("ex1").replace(**change)


def test_unknown_key_rejected():
    text = preset("ex1").to_ini() + "\n[extra]\nfoo = 1\n"
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_ini(text)


def test_load_from_file(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(preset("ex2").replace(seed=11).to_ini())
    assert ExperimentConfig.load(path).seed == 11
