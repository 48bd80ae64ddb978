"""Round-trip-delay samplers: percentiles, draws, and config parsing."""

import numpy as np
import pytest

from placesim.errors import ConfigError, DomainError
from placesim.netmodel import (
    EmpiricalDelays,
    FixedDelay,
    PercentileTable,
    ShiftedLognormal,
    load_samples,
    sampler_from_config,
)

from oracles import nearest_rank_percentile, three_point_interp


def test_fixed_delay_constant_everywhere():
    sampler = FixedDelay(0.022)
    rng = np.random.default_rng(0)
    assert all(sampler.sample(rng) == 0.022 for _ in range(100))
    for q in (0.0, 0.1, 0.5, 0.9, 1.0):
        assert sampler.percentile(q) == 0.022


def test_fixed_delay_rejects_negative():
    with pytest.raises(DomainError):
        FixedDelay(-0.001)


def test_percentile_table_anchors_and_interpolation():
    table = PercentileTable(p10=0.010, p50=0.022, p90=0.060)
    assert table.percentile(0.10) == 0.010
    assert table.percentile(0.50) == 0.022
    assert table.percentile(0.90) == 0.060
    for q in (0.2, 0.3, 0.42, 0.6, 0.75, 0.88):
        assert table.percentile(q) == pytest.approx(
            three_point_interp(0.010, 0.022, 0.060, q), rel=1e-12
        )
    # clamped outside the anchor range
    assert table.percentile(0.02) == 0.010
    assert table.percentile(0.99) == 0.060


def test_percentile_table_sample_returns_mode_anchor():
    rng = np.random.default_rng(1)
    assert PercentileTable(0.01, 0.022, 0.06).sample(rng) == 0.022
    assert PercentileTable(0.01, 0.022, 0.06, mode="p90").sample(rng) == 0.06
    assert PercentileTable(0.01, 0.022, 0.06, mode="p10").sample(rng) == 0.01


def test_percentile_table_validates_ordering_and_mode():
    with pytest.raises(DomainError):
        PercentileTable(0.05, 0.022, 0.06)      # p10 > p50
    with pytest.raises(DomainError):
        PercentileTable(0.01, 0.07, 0.06)       # p50 > p90
    with pytest.raises(DomainError):
        PercentileTable(0.01, 0.022, 0.06, mode="median")


def test_empirical_nearest_rank_matches_oracle():
    values = (0.030, 0.010, 0.050, 0.020, 0.040)
    sampler = EmpiricalDelays(values)
    for q in (0.0, 0.1, 0.2, 0.25, 0.5, 0.61, 0.8, 0.9, 1.0):
        assert sampler.percentile(q) == nearest_rank_percentile(values, q)
    # nearest-rank on 5 points: the median is the 3rd order statistic
    assert sampler.percentile(0.5) == 0.030
    assert sampler.percentile(1.0) == 0.050
    assert sampler.percentile(0.0) == 0.010


def test_empirical_draws_come_from_source_set():
    values = (0.01, 0.02, 0.04)
    sampler = EmpiricalDelays(values)
    rng = np.random.default_rng(7)
    draws = {sampler.sample(rng) for _ in range(500)}
    assert draws == set(values)


def test_empirical_validates_sample_set():
    with pytest.raises(DomainError):
        EmpiricalDelays(())
    with pytest.raises(DomainError):
        EmpiricalDelays((0.01, -0.02))


def test_shifted_lognormal_percentile_endpoints():
    sampler = ShiftedLognormal(location=0.010, log_mean=-3.8, log_sigma=0.5)
    assert sampler.percentile(0.0) == 0.010
    assert sampler.percentile(1.0) == float("inf")
    # median of the lognormal part is exp(log_mean)
    assert sampler.percentile(0.5) == pytest.approx(0.010 + np.exp(-3.8), rel=1e-12)
    assert sampler.percentile(0.9) > sampler.percentile(0.5) > sampler.percentile(0.1)


def test_shifted_lognormal_draws_exceed_location():
    sampler = ShiftedLognormal(location=0.015, log_mean=-4.0, log_sigma=0.8)
    rng = np.random.default_rng(3)
    draws = [sampler.sample(rng) for _ in range(1000)]
    assert min(draws) > 0.015


def test_shifted_lognormal_validates_fields():
    with pytest.raises(DomainError):
        ShiftedLognormal(location=-0.01, log_mean=0.0, log_sigma=0.5)
    with pytest.raises(DomainError):
        ShiftedLognormal(location=0.0, log_mean=0.0, log_sigma=-0.5)


def test_samplers_reject_out_of_range_quantiles():
    samplers = [
        FixedDelay(0.02),
        PercentileTable(0.01, 0.02, 0.06),
        EmpiricalDelays((0.01, 0.02)),
        ShiftedLognormal(0.01, -4.0, 0.5),
    ]
    for sampler in samplers:
        with pytest.raises(DomainError):
            sampler.percentile(-0.01)
        with pytest.raises(DomainError):
            sampler.percentile(1.01)


def test_load_samples_skips_comments_and_blank_lines(tmp_path):
    path = tmp_path / "delays.txt"
    path.write_text("# header\n0.010\n\n0.020\n# trailing\n0.030\n")
    assert load_samples(path).samples == (0.010, 0.020, 0.030)


def test_load_samples_rejects_bad_lines(tmp_path):
    bad_number = tmp_path / "bad.txt"
    bad_number.write_text("0.01\nhello\n")
    with pytest.raises(ConfigError, match="bad.txt:2"):
        load_samples(bad_number)

    negative = tmp_path / "neg.txt"
    negative.write_text("-0.01\n")
    with pytest.raises(ConfigError, match="delay must be finite"):
        load_samples(negative)

    empty = tmp_path / "empty.txt"
    empty.write_text("# only comments\n")
    with pytest.raises(ConfigError, match="no delay samples"):
        load_samples(empty)


def test_sampler_from_config_builds_each_kind(tmp_path):
    samples_file = tmp_path / "wifi.txt"
    samples_file.write_text("0.01\n0.02\n")
    assert sampler_from_config("a", {"kind": "fixed", "value_s": 0.022}) == FixedDelay(0.022)
    assert sampler_from_config(
        "b", {"kind": "percentile_table", "p10_s": 0.01, "p50_s": 0.02, "p90_s": 0.06}
    ) == PercentileTable(0.01, 0.02, 0.06)
    assert sampler_from_config(
        "c", {"kind": "empirical", "samples": [0.01, 0.02]}
    ) == EmpiricalDelays((0.01, 0.02))
    assert sampler_from_config(
        "d", {"kind": "empirical", "samples_file": "wifi.txt"}, base_dir=tmp_path
    ) == EmpiricalDelays((0.01, 0.02))
    assert sampler_from_config(
        "e", {"kind": "shifted_lognormal", "location_s": 0.01,
              "log_mean": -3.8, "log_sigma": 0.5}
    ) == ShiftedLognormal(0.01, -3.8, 0.5)


def test_sampler_from_config_rejects_unknown_kind_and_keys():
    with pytest.raises(ConfigError, match="unknown sampler kind"):
        sampler_from_config("x", {"kind": "gaussian", "value_s": 0.02})
    with pytest.raises(ConfigError, match="unknown keys"):
        sampler_from_config("x", {"kind": "fixed", "value_s": 0.02, "bogus": 1})
    with pytest.raises(ConfigError, match="missing required key"):
        sampler_from_config("x", {"kind": "fixed"})
