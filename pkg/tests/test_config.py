import shutil
from pathlib import Path

import pytest
import yaml

from surveybot.config import DEFAULTS_DIR, ConfigError, load_config, load_default_config
from surveybot.questions import Instrument, Phase, QuestionKind
from surveybot.scoring import TRAITS

FLOW_PATH = DEFAULTS_DIR / "flow.yaml"


@pytest.fixture
def flow_dict():
    return yaml.safe_load(FLOW_PATH.read_text(encoding="utf-8"))


@pytest.fixture
def write_flow(tmp_path):
    def _write(data) -> Path:
        path = tmp_path / "flow.yaml"
        path.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
        return path

    return _write


def test_default_config_loads():
    config = load_default_config()
    assert config.locales == ("pl", "uk", "en")
    assert len(config.flow.tipi) == 10
    assert len(config.flow.competency) == 26
    assert len(config.flow.sus) == 10
    assert config.intent_threshold == 0.45
    assert config.send_delay_ms == 800
    assert config.max_attempts == 3


def test_default_scales_match_instruments():
    config = load_default_config()
    assert all(q.scale_min == 1 and q.scale_max == 7 for q in config.flow.tipi)
    assert all(q.scale_min == 1 and q.scale_max == 5 for q in config.flow.competency)
    assert all(q.scale_min == 1 and q.scale_max == 5 for q in config.flow.sus)


def test_competency_gated_on_employment():
    config = load_default_config()
    assert all(q.gating == "employed == yes" for q in config.flow.competency)
    assert all(q.gating is None for q in config.flow.tipi)


def test_flow_question_lookup():
    flow = load_default_config().flow
    spec = flow.by_id["tipi.3"]
    assert spec.instrument is Instrument.TIPI
    assert spec.index == 3
    assert flow.questions_for(Phase.FAREWELL)  # meta questions live here


def test_meta_questions_shape():
    config = load_default_config()
    kinds = {q.id: q.kind for q in config.flow.meta}
    assert kinds == {
        "meta.age": QuestionKind.NUMBER,
        "meta.it_skills": QuestionKind.SCALE,
        "meta.immigrant": QuestionKind.YES_NO,
        "meta.device": QuestionKind.SCALE,
    }


def test_bad_count_competency(flow_dict, write_flow):
    flow_dict["competency"]["questions"] = flow_dict["competency"]["questions"][:25]
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "BAD_COUNT"
    assert "competency" in str(err.value)


def test_bad_count_tipi(flow_dict, write_flow):
    flow_dict["tipi"]["questions"].append("tipi.q1")
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "BAD_COUNT"


def test_missing_translation(flow_dict, write_flow, tmp_path):
    catalog_dir = tmp_path / "catalogs"
    catalog_dir.mkdir()
    for item in DEFAULTS_DIR.glob("catalog.*.properties"):
        shutil.copy(item, catalog_dir / item.name)
    uk = catalog_dir / "catalog.uk.properties"
    lines = [
        line
        for line in uk.read_text(encoding="utf-8").splitlines()
        if not line.startswith("tipi.q7 ")
    ]
    uk.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict), catalog_dir=catalog_dir)
    assert err.value.code == "MISSING_TRANSLATION"
    assert "tipi.q7" in str(err.value)


def test_schema_error_bad_scale(flow_dict, write_flow):
    flow_dict["sus"]["scale"] = {"min": 5, "max": 1}
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"
    assert "sus" in str(err.value)


def test_schema_error_scale_beyond_seven(flow_dict, write_flow):
    flow_dict["tipi"]["scale"] = {"min": 1, "max": 9}
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"


def test_schema_error_unknown_handler(flow_dict, write_flow):
    flow_dict["intents"]["start"]["handler"] = "teleport"
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"


def test_schema_error_unknown_gating(flow_dict, write_flow):
    flow_dict["competency"]["gating"] = "age > 18"
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"


def test_intent_requires_all_locales(flow_dict, write_flow):
    del flow_dict["intents"]["start"]["triggers"]["uk"]
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"
    assert "uk" in str(err.value)


def test_tipi_key_must_cover_all_items(flow_dict, write_flow):
    flow_dict["tipi"]["key"]["extraversion"] = [1, 8]  # 8 is also conscientiousness's
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"


def test_tipi_key_direction_checked(flow_dict, write_flow):
    # direct slot must not name a reversed item
    flow_dict["tipi"]["key"]["extraversion"] = [6, 1]
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert err.value.code == "SCHEMA_ERROR"


def test_norms_parsed_with_overrides(flow_dict, write_flow):
    flow_dict["norms"]["competency"]["means"] = {3: 4.2}
    config = load_config(flow_path=write_flow(flow_dict))
    assert config.norms.competency_means[2] == 4.2
    assert config.norms.competency_means[0] == 3.0
    assert set(config.norms.trait_means) == set(TRAITS)


def test_error_message_carries_path(flow_dict, write_flow):
    flow_dict["norms"]["band_factor"] = -1
    with pytest.raises(ConfigError) as err:
        load_config(flow_path=write_flow(flow_dict))
    assert "norms.band_factor" in str(err.value)
