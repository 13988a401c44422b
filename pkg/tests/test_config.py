from __future__ import annotations

from pathlib import Path

import pytest

from nolgat import constants
from nolgat.config import ExperimentConfig, get_paths, load_config, parse_config_text, save_config
from nolgat.errors import ConfigError


def test_defaults_follow_constants() -> None:
    config = ExperimentConfig.from_mapping({})
    assert config.knn_k == tuple(constants.DEFAULT_KNN_SWEEP)
    assert config.heads == (constants.DEFAULT_HEADS,)
    assert config.hidden == tuple(constants.DEFAULT_HIDDEN)
    assert config.model_config().heads == constants.DEFAULT_HEADS


def test_parse_config_text_reads_yaml_scalars() -> None:
    values = parse_config_text(
        "# comment\n"
        "knn_k = [3, 5]\n"
        "label_fraction = 0.2\n"
        "anneal = true\n"
        "featurizer = hashed-tf\n"
        "dataset_path =\n"
    )
    assert values == {
        "knn_k": [3, 5],
        "label_fraction": 0.2,
        "anneal": True,
        "featurizer": "hashed-tf",
        "dataset_path": None,
    }


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("epochs 10", "expected 'key = value'"),
        ("= 3", "missing key"),
        ("seed = 1\nseed = 2", "duplicate key 'seed'"),
        ("knn_k = [3,", "cannot parse"),
    ],
)
def test_parse_config_text_errors_name_the_line(text: str, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        parse_config_text(text, "exp.cfg")


def test_unknown_keys_are_rejected() -> None:
    with pytest.raises(ConfigError, match="learning_rat"):
        ExperimentConfig.from_mapping({"learning_rat": 0.1})


@pytest.mark.parametrize(
    "values",
    [
        {"epochs": "ten"},
        {"epochs": True},
        {"anneal": "yes"},
        {"knn_k": [3, "5"]},
        {"label_fraction": [0.1, 1.0]},
        {"repetitions": 0},
        {"featurizer": "doc2vec"},
        {"temperature": 0.0},
        {"relaxation_mode": "soft"},
        {"hidden": [128]},
        {"phi_hop": -1},
        {"workers": 0},
        {"anneal": True, "anneal_min": 2.0},
        {"beta1": 1.0},
    ],
)
def test_invalid_values_are_config_errors(values: dict) -> None:
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(values)


def test_scalars_widen_to_sweeps() -> None:
    config = ExperimentConfig.from_mapping({"knn_k": 7, "label_fraction": 0.3, "heads": [2, 1]})
    assert config.knn_k == (7,)
    assert config.label_fractions == (0.3,)
    assert config.model_config().heads == (2, 1)


def test_load_config_resolves_paths_against_its_directory(tmp_path: Path) -> None:
    config_dir = tmp_path / "exp"
    config_dir.mkdir()
    (config_dir / "run.cfg").write_text("dataset_path = data/nodes.csv\noutput_dir = out\nepochs = 5\n")
    config = load_config(config_dir / "run.cfg")
    assert config.dataset_path == str(config_dir / "data" / "nodes.csv")
    assert config.output_dir == str(config_dir / "out")
    assert config.epochs == 5


def test_load_config_reads_yaml(tmp_path: Path) -> None:
    (tmp_path / "run.yaml").write_text("knn_k: [4, 8]\nmlp_hidden: []\ncompare_baseline: true\n")
    config = load_config(tmp_path / "run.yaml")
    assert config.knn_k == (4, 8)
    assert config.mlp_hidden == ()
    assert config.compare_baseline is True


def test_load_config_rejects_bad_files(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.cfg")
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="flat mapping"):
        load_config(tmp_path / "list.yaml")


def test_saved_config_loads_back(tmp_path: Path) -> None:
    config = ExperimentConfig.from_mapping(
        {"knn_k": [3, 9], "label_fraction": [0.1, 0.2], "seed": 4, "output_dir": str(tmp_path / "out")}
    )
    path = save_config(config, tmp_path / "saved.yaml")
    assert load_config(path) == config


def test_echo_is_plain_and_sorted() -> None:
    echo = ExperimentConfig.from_mapping({"knn_k": [3]}).echo()
    assert list(echo) == sorted(echo)
    assert echo["knn_k"] == [3]
    assert echo["heads"] == [constants.DEFAULT_HEADS]


def test_paths_follow_nolgat_home(nolgat_home: Path) -> None:
    paths = get_paths()
    assert paths["home"] == nolgat_home
    assert paths["log_dir"].is_dir()
    assert paths["system_log"].parent == paths["log_dir"]
