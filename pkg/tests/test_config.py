import pytest

from fbmgreeks import ConfigParseError, RegimeError, parse_config
from fbmgreeks.config import ScenarioConfig

MINIMAL = """\
estimator = pathwise-delta
hurst = 0.6
n2 = 8
paths = 100
alpha = 0.05
seed = 42

[model]
sigma = paper_sigma()
payoff = square()
x0 = 1
"""


def test_minimal_document_parses():
    config = parse_config(MINIMAL)
    assert config.estimator == "pathwise-delta"
    assert config.hurst == 0.6
    assert config.n2 == 8
    assert config.horizon == 1.0
    assert config.functions["sigma"].tag == "paper_sigma"


def test_preset_expansion():
    config = parse_config("estimator = pathwise-delta\nscenario = paper-8.2\nseed = 1\n")
    assert (config.hurst, config.n2, config.paths, config.alpha) == (0.6, 15, 500, 0.05)
    assert config.x0 == 1.0
    assert config.functions["sigma_tilde"].tag == "paper_sigma_tilde"


def test_explicit_keys_override_preset_and_overrides_override_both():
    text = "estimator = pathwise-delta\nscenario = paper-8.2\nseed = 1\nn2 = 12\n"
    config = parse_config(text)
    assert config.n2 == 12
    config = parse_config(text, {"n2": "10", "paths": "250"})
    assert config.n2 == 10 and config.paths == 250


def test_unknown_key_reports_line_number():
    text = MINIMAL + "wibble = 3\n"
    with pytest.raises(ConfigParseError) as err:
        parse_config(text)
    assert "wibble" in str(err.value)
    assert err.value.line == 12


def test_unknown_model_key_reports_line_number():
    bad = MINIMAL.replace("x0 = 1", "x0 = 1\nzeta = constant(1)")
    with pytest.raises(ConfigParseError) as err:
        parse_config(bad)
    assert err.value.line == 12


def test_syntax_error_reports_line():
    with pytest.raises(ConfigParseError) as err:
        parse_config("estimator pathwise-delta\n")
    assert err.value.line == 1


def test_duplicate_key_rejected():
    with pytest.raises(ConfigParseError) as err:
        parse_config("hurst = 0.6\nhurst = 0.7\n")
    assert err.value.line == 2


def test_empty_document_lists_required_fields():
    with pytest.raises(ConfigParseError) as err:
        parse_config("")
    message = str(err.value)
    for field in ("estimator", "hurst", "n2", "paths", "alpha", "seed"):
        assert field in message


def test_low_hurst_is_a_regime_error():
    with pytest.raises(RegimeError):
        parse_config(MINIMAL.replace("hurst = 0.6", "hurst = 0.4"))


def test_weight_delta_allows_brownian_hurst():
    text = MINIMAL.replace("pathwise-delta", "weight-delta").replace("hurst = 0.6", "hurst = 0.5")
    assert parse_config(text).hurst == 0.5


def test_out_of_range_values():
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("hurst = 0.6", "hurst = 1.3"))
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("alpha = 0.05", "alpha = 0"))
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("n2 = 8", "n2 = -2"))


def test_unknown_estimator_and_preset():
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("pathwise-delta", "super-greek"))
    with pytest.raises(ConfigParseError):
        parse_config("scenario = paper-9.9\n")


def test_bad_function_values():
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("paper_sigma()", "made_up()"))
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("paper_sigma()", "affine(1)"))
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL.replace("paper_sigma()", "affine(a,b)"))


def test_function_forms_bare_and_with_args():
    text = MINIMAL.replace("sigma = paper_sigma()", "sigma = paper_sigma").replace(
        "payoff = square()", "payoff = polynomial(0, 0, 1)"
    )
    config = parse_config(text)
    assert config.functions["sigma"].tag == "paper_sigma"
    assert config.functions["payoff"].params == (0.0, 0.0, 1.0)


def test_finance_requirements():
    with pytest.raises(ConfigParseError) as err:
        parse_config(MINIMAL.replace("pathwise-delta", "finance-mu"))
    message = str(err.value)
    assert "hurst2" in message and "model.mu" in message and "model.s0" in message


def test_vega_requires_direction():
    with pytest.raises(ConfigParseError) as err:
        parse_config(MINIMAL.replace("pathwise-delta", "pathwise-vega"))
    assert "sigma_tilde" in str(err.value)


def test_round_trip_is_identity():
    for text, overrides in [
        (MINIMAL, None),
        ("estimator = pathwise-vega\nscenario = paper-8.2\nseed = 9\nhorizon = 2\n", None),
        (MINIMAL, {"paths": "333"}),
    ]:
        config = parse_config(text, overrides)
        again = parse_config(config.to_text())
        assert again == config


def test_round_trip_with_output_section(tmp_path):
    text = MINIMAL + "\n[output]\nreport = out/r.json\ntrace = out/t.csv\n"
    config = parse_config(text)
    assert config.report_path == "out/r.json"
    assert parse_config(config.to_text()) == config


def test_comments_and_blank_lines_ignored():
    text = "# leading comment\n\n" + MINIMAL.replace(
        "hurst = 0.6", "hurst = 0.6   # driver roughness"
    )
    assert parse_config(text).hurst == 0.6


def test_unknown_override_key():
    with pytest.raises(ConfigParseError):
        parse_config(MINIMAL, {"wobble": "1"})
