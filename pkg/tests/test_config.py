"""Run-config parsing, validation, environment overrides."""

import pytest

from ksgreen.config import RunConfig, parse_config
from ksgreen.errors import ConfigError, RealRootError

MINIMAL = "nu = 2e-4\nh = 1e-5\nn = 300\norder = 1\n"


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL, env={})
        assert cfg.nu == 2e-4 and cfg.h == 1e-5
        assert cfg.l == 0.0 and cfg.r == 0.0
        assert cfg.seed_method == "eigenmode_growth"
        assert cfg.subgrid_mode == "spanned_plus_margin"
        assert cfg.output_every == 1

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# heading\n\n" + MINIMAL + "\n# tail\n", env={})
        assert cfg.n == 300

    def test_order_out_of_range(self):
        with pytest.raises(ConfigError, match="1..4"):
            parse_config(MINIMAL.replace("order = 1", "order = 5"), env={})

    def test_real_root_fail_fast(self):
        with pytest.raises(RealRootError) as err:
            parse_config("nu = 2e-4\nh = 1e-3\nn = 300\norder = 1\n", env={})
        assert err.value.s_value == pytest.approx(1.25)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(MINIMAL + "typo_key = 1\n", env={})

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="required"):
            parse_config("nu = 2e-4\nh = 1e-5\nn = 300\n", env={})

    def test_type_mismatch_names_key(self):
        with pytest.raises(ConfigError, match="nu"):
            parse_config(MINIMAL.replace("2e-4", "abc"), env={})

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("just words\n" + MINIMAL, env={})

    def test_list_values(self):
        cfg = parse_config(MINIMAL + "h_list = 1e-5, 5e-6 2.5e-6\nn_list = 10 20\n",
                           env={})
        assert cfg.h_list == (1e-5, 5e-6, 2.5e-6)
        assert cfg.n_list == (10, 20)

    def test_env_override_wins(self):
        cfg = parse_config(MINIMAL, env={"KSGREEN_ORDER": "3", "KSGREEN_L": "2.5"})
        assert cfg.order == 3 and cfg.l == 2.5

    def test_env_override_validated(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL, env={"KSGREEN_ORDER": "9"})

    def test_explicit_delta_respected(self):
        cfg = parse_config(MINIMAL + "delta = 3e-5\norder = 2\n", env={})
        assert cfg.effective_delta() == 3e-5

    def test_derived_delta_uses_scheme_factor(self):
        cfg = parse_config(MINIMAL.replace("order = 1", "order = 2"), env={})
        assert cfg.effective_delta() == pytest.approx((2.0 / 3.0) * 1e-5)

    def test_invalid_seed_method(self):
        with pytest.raises(ConfigError, match="seed_method"):
            parse_config(MINIMAL + "seed_method = telepathy\n", env={})


class TestRunConfig:
    def test_workers_resolution(self):
        cfg = RunConfig(nu=2e-4, h=1e-5, n=100, order=1, worker_count=3)
        assert cfg.workers() == 3
        auto = RunConfig(nu=2e-4, h=1e-5, n=100, order=1, worker_count=0)
        assert auto.workers() >= 1

    def test_policy_construction(self):
        cfg = RunConfig(nu=2e-4, h=1e-5, n=100, order=1,
                        subgrid_mode="full", subgrid_margin=4)
        policy = cfg.subgrid_policy()
        assert policy.mode == "full" and policy.margin == 4

    def test_invalid_scalars(self):
        for kw in ({"nu": -1.0}, {"h": 0.0}, {"n": 1}, {"output_every": 0}):
            base = dict(nu=2e-4, h=1e-5, n=100, order=1)
            base.update(kw)
            with pytest.raises(ConfigError):
                RunConfig(**base)
