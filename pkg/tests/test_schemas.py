from pathlib import Path

import pytest

from models.errors import ConfigError
from schemas.run_config import RunConfig, load_config, parse_config_text

CONFIG_DIR = Path(__file__).resolve().parent.parent / "data" / "configs"

GAP_SCAN = """\
# reference gap law
experiment = gap-scan
J = 0.5
Jp = 0.27
L_list = 51:151:50
"""


class TestParsing:
    """Test cases for key = value configuration files"""

    def test_basic_file(self):
        """Test comments, blank lines and ranges"""
        config = parse_config_text(GAP_SCAN)
        assert config.experiment == "gap-scan"
        assert config.L_list == (51, 101, 151)
        assert config.J == 0.5
        assert config.Jp == 0.27
        assert config.format == "csv"

    def test_lists_and_defaults(self):
        """Test float lists, cd_mode lists and dynamics defaults"""
        config = parse_config_text(
            "experiment = dynamics\nL_list = 41\nT_list = 1, 2.5, 10\ncd_mode = bare, var1, var2\n"
        )
        assert config.T_list == (1.0, 2.5, 10.0)
        assert config.cd_modes == ("bare", "var1", "var2")
        assert config.dt is None
        assert config.stepper == "midpoint"
        assert config.n_samples == 0

    def test_float_range(self):
        """Test float ranges include the stop value"""
        config = parse_config_text("experiment = dynamics\nL_list = 21\nT_list = 0.5:2.0:0.5\n")
        assert config.T_list == pytest.approx((0.5, 1.0, 1.5, 2.0))

    def test_default_modes(self):
        """Test experiments fill in their default cd_mode lists"""
        assert parse_config_text("experiment = gap-cd-scan\nL_list = 51\nT_list = 2\n").cd_modes == ("var1",)
        config = parse_config_text("experiment = qbcd-dynamics\nL_list = 21\nT_list = 20\n")
        assert config.cd_modes == ("bare", "qbcd")

    def test_crossing_report_needs_no_lengths(self):
        """Test the crossing report defaults to JSON without an L list"""
        config = parse_config_text("experiment = crossing-report\n")
        assert config.L_list == ()
        assert config.format == "json"

    def test_booleans(self):
        """Test boolean words"""
        text = "experiment = dynamics\nL_list = 21\nT_list = 5\ncheck_convergence = yes\n"
        assert parse_config_text(text).check_convergence is True

    def test_output_dir_from_environment(self, monkeypatch):
        """Test the environment default for output_dir"""
        monkeypatch.setenv("BOTTLENECK_CD_OUTPUT_DIR", "/tmp/sweeps")
        assert parse_config_text(GAP_SCAN).output_dir == "/tmp/sweeps"

    def test_quoted_values_and_inline_comments(self):
        """Test quotes are stripped and comments after whitespace are dropped"""
        text = "experiment = 'dynamics'\nL_list = \"21, 41\"\nT_list = 5  # seconds\n"
        config = parse_config_text(text)
        assert config.experiment == "dynamics"
        assert config.L_list == (21, 41)
        assert config.T_list == (5.0,)

    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.cfg")))
    def test_shipped_configs_load(self, name):
        """Test every bundled configuration validates"""
        config = load_config(str(CONFIG_DIR / name))
        assert isinstance(config, RunConfig)


class TestValidationErrors:
    """Test cases for configuration errors with line and field"""

    def _error(self, text, **kwargs):
        with pytest.raises(ConfigError) as info:
            parse_config_text(text, **kwargs)
        return info.value

    def test_unknown_key(self):
        """Test unknown keys report their line"""
        error = self._error("experiment = gap-scan\nL_list = 51\nwidth = 3\n", path="run.cfg")
        assert error.line == 3
        assert error.field == "width"
        assert error.render().startswith("run.cfg:3: width:")

    def test_malformed_line(self):
        """Test lines without '=' are rejected"""
        assert self._error("experiment gap-scan\n").line == 1

    def test_line_numbers_after_blank_lines(self):
        """Test blank lines and comments before a key keep its line number"""
        error = self._error("# sweep\n\nexperiment = gap-scan\n\n\n# sizes\nL_list = 51, 76\n")
        assert (error.line, error.field) == (7, "L_list")

    def test_key_without_value(self):
        """Test a bare key with no '='"""
        assert self._error("experiment = gap-scan\n\nL_list\n").line == 3

    def test_bad_value(self):
        """Test unparseable values name the field"""
        error = self._error("experiment = gap-scan\nL_list = 51, abc\n")
        assert (error.line, error.field) == (2, "L_list")

    def test_duplicate_key(self):
        """Test a key given twice"""
        error = self._error("experiment = gap-scan\nL_list = 51\nL_list = 77\n")
        assert (error.line, error.field) == (3, "L_list")

    def test_missing_value(self):
        """Test an empty right-hand side"""
        assert self._error("experiment = gap-scan\nJ =\n").field == "J"

    def test_missing_experiment(self):
        """Test the experiment key is required"""
        assert self._error("L_list = 51\n").field == "experiment"

    def test_missing_lengths(self):
        """Test sweeps other than the crossing report need L_list"""
        assert self._error("experiment = gap-scan\n").field == "L_list"

    def test_even_length(self):
        """Test even chain lengths are rejected with the L_list line"""
        error = self._error("experiment = gap-scan\nL_list = 51, 76\n")
        assert (error.line, error.field) == (2, "L_list")

    @pytest.mark.parametrize("couplings", ["J = 0.5\nJp = 0.2\n", "J = 0.5\nJp = 0.6\n", "J = 1.5\n"])
    def test_coupling_range(self, couplings):
        """Test couplings outside the bottleneck regime"""
        error = self._error("experiment = gap-scan\nL_list = 51\n" + couplings)
        assert error.field in ("J", "Jp")

    def test_missing_times(self):
        """Test dynamics sweeps need T_list"""
        assert self._error("experiment = dynamics\nL_list = 21\n").field == "T_list"

    def test_nonpositive_time(self):
        """Test T must be positive"""
        assert self._error("experiment = dynamics\nL_list = 21\nT_list = 1, 0\n").field == "T_list"

    def test_dt_not_below_shortest_time(self):
        """Test dt >= min(T) is rejected"""
        error = self._error("experiment = dynamics\nL_list = 21\nT_list = 5, 0.5\ndt = 0.5\n")
        assert (error.line, error.field) == (4, "dt")

    def test_mode_not_allowed_for_experiment(self):
        """Test qbcd-dynamics only compares bare and qbcd drives"""
        error = self._error("experiment = qbcd-dynamics\nL_list = 21\nT_list = 20\ncd_mode = var1\n")
        assert (error.line, error.field) == (4, "cd_mode")

    def test_unknown_mode(self):
        """Test cd_mode names outside the known set"""
        assert self._error("experiment = dynamics\nL_list = 21\nT_list = 1\ncd_mode = var3\n").field == "cd_mode"

    def test_exact_agp_length_limit(self):
        """Test exact_agp refuses long chains"""
        error = self._error("experiment = dynamics\nL_list = 101\nT_list = 1\ncd_mode = exact_agp\n")
        assert error.field == "cd_mode"

    def test_unknown_stepper(self):
        """Test stepper names"""
        assert self._error("experiment = dynamics\nL_list = 21\nT_list = 1\nstepper = rk4\n").field == "stepper"

    def test_unreadable_file(self, tmp_path):
        """Test a missing file is a configuration error"""
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "absent.cfg"))


class TestOverrides:
    """Test cases for command-line overrides and experiment matching"""

    def test_override_replaces_file_value(self):
        """Test overrides win over file values"""
        text = "experiment = dynamics\nL_list = 21\nT_list = 5\ndt = 0.01\n"
        config = parse_config_text(text, overrides={'dt': '0.002', 'cd_mode': 'var1'})
        assert config.dt == 0.002
        assert config.cd_modes == ("var1",)

    def test_none_overrides_ignored(self, monkeypatch):
        """Test unset command-line options leave the file alone"""
        monkeypatch.delenv("BOTTLENECK_CD_OUTPUT_DIR", raising=False)
        config = parse_config_text(GAP_SCAN, overrides={'output_dir': None})
        assert config.output_dir == "results"

    def test_bad_override(self):
        """Test invalid override values are reported without a line"""
        with pytest.raises(ConfigError) as info:
            parse_config_text(GAP_SCAN, overrides={'n_grid': 'many'})
        assert info.value.line is None
        assert info.value.field == "n_grid"

    def test_experiment_mismatch(self):
        """Test the requested experiment must match the file"""
        with pytest.raises(ConfigError) as info:
            parse_config_text(GAP_SCAN, experiment="dynamics")
        assert info.value.field == "experiment"
        assert info.value.line == 2

    def test_experiment_filled_from_request(self):
        """Test a file without an experiment key takes the requested one"""
        config = parse_config_text("L_list = 51\n", experiment="gap-scan")
        assert config.experiment == "gap-scan"


class TestConfigHash:
    """Test cases for the normalized configuration hash"""

    def test_stable_under_formatting(self):
        """Test whitespace, comments and key order do not change the hash"""
        other = "L_list=51,101,151   # sizes\n\nJp = 0.27\nexperiment = gap-scan\nJ=0.50\n"
        assert parse_config_text(GAP_SCAN).config_hash() == parse_config_text(other).config_hash()

    def test_ignores_output_dir(self):
        """Test moving the output directory keeps the hash"""
        first = parse_config_text(GAP_SCAN, overrides={'output_dir': 'a'})
        second = parse_config_text(GAP_SCAN, overrides={'output_dir': 'b'})
        assert first.config_hash() == second.config_hash()

    def test_changes_with_values(self):
        """Test a different sweep hashes differently"""
        other = parse_config_text(GAP_SCAN.replace("51:151:50", "51:201:50"))
        assert other.config_hash() != parse_config_text(GAP_SCAN).config_hash()
        assert len(other.config_hash()) == 64
