"""Run-configuration parsing: defaults, overrides, and hard errors."""

import math

import pytest
from numpy.testing import assert_allclose

from kickscope import COMPUTATIONAL, SYMMETRIC, ConfigurationError, DomainError, tilted
from kickscope.config import (
    default_config,
    load_config,
    parse_c_values,
    parse_config_text,
)


class TestDefaults:
    def test_desk_scale_defaults(self):
        cfg = default_config()
        assert cfg.geometry.d == 1.0
        assert cfg.geometry.sigma == 0.01
        assert cfg.units.hbar == 1.0 and cfg.units.mass == 1.0 and cfg.units.t == 5.0
        assert cfg.grid.n == 2**21
        assert_allclose(cfg.grid.dx, 0.0025, rtol=0, atol=1e-15)
        # The box is centered between the slits.
        assert_allclose(cfg.grid.x_min + cfg.grid.x_max, 1.0, rtol=0, atol=1e-9)
        assert cfg.detector.c == 0.5 and cfg.detector.theta == 0.0
        assert cfg.basis == SYMMETRIC
        assert cfg.sample_count == 100_000 and cfg.seed == 42
        assert cfg.out_dir is None

    def test_empty_text_gives_defaults(self):
        assert parse_config_text("") == default_config()


class TestParsing:
    def test_overrides_comments_and_blanks(self):
        cfg = parse_config_text(
            """
            # reduced-scale run
            geometry.sigma = 0.02   # wider slits
            grid.n = 1024
            grid.x_min = -2.06
            grid.x_max = 3.06
            detector.c = 0.25
            detector.theta = 1.5
            basis = computational
            sampling.count = 5000
            sampling.seed = 9
            output.dir = out/here
            """
        )
        assert cfg.geometry.sigma == 0.02
        assert cfg.grid.n == 1024
        assert cfg.detector.c == 0.25 and cfg.detector.theta == 1.5
        assert cfg.basis == COMPUTATIONAL
        assert cfg.sample_count == 5000 and cfg.seed == 9
        assert cfg.out_dir == "out/here"

    def test_tilted_basis(self):
        cfg = parse_config_text("basis = tilted:0.7853981633974483")
        assert cfg.basis == tilted(math.pi / 4)

    def test_tilted_zero_folds_to_symmetric(self):
        assert parse_config_text("basis = tilted:0").basis == SYMMETRIC

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("grid.m = 4", "unknown config key"),
            ("geometry.sigma = wide", "cannot parse"),
            ("just some words", "expected key = value"),
            ("basis = diagonal", "unknown basis"),
            ("basis = tilted:fast", "angle"),
            ("sampling.count = -3", "non-negative"),
        ],
    )
    def test_hard_errors(self, line, fragment):
        with pytest.raises(ConfigurationError, match=fragment):
            parse_config_text(line)

    def test_error_reports_line_number(self):
        with pytest.raises(ConfigurationError, match="line 3"):
            parse_config_text("detector.c = 0.5\n# fine\ngrid.m = 4\n")

    def test_physics_validation_still_applies(self):
        with pytest.raises(DomainError):
            parse_config_text("detector.c = 1.5")
        with pytest.raises(ConfigurationError):
            parse_config_text("grid.n = 1000")

    def test_with_seed(self):
        cfg = default_config().with_seed(7)
        assert cfg.seed == 7
        assert cfg.grid == default_config().grid

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config(str(tmp_path / "nope.cfg"))


class TestCValues:
    def test_parses_list(self):
        assert parse_c_values("0, 0.25 ,1") == [0.0, 0.25, 1.0]

    @pytest.mark.parametrize("text", ["a,b", "0.5,1.5", "-0.1", "", ","])
    def test_rejects_bad_lists(self, text):
        with pytest.raises(ConfigurationError):
            parse_c_values(text)
