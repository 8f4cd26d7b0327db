import pytest

from uclab import create_lab
from uclab.config import PRESETS
from uclab.errors import ConfigError
from uclab.models import RunConfig
from uclab.schemas import validate_sections
from uclab.utils.sampling import set_thread_cap, thread_cap


@pytest.fixture(autouse=True)
def reset_threads():
    """Leave the global worker cap as it was"""
    yield
    set_thread_cap(None)


class TestRunConfig:
    def test_ini_round_trip(self):
        """INI text reproduces the configuration"""
        config = RunConfig()
        assert RunConfig.from_ini(config.to_ini()) == config

    def test_floats_keep_full_precision(self):
        """Floats are written with repr"""
        config = RunConfig.from_dict({'tolerances': {'bracket': '1.2345678901234567e-09'}})
        assert RunConfig.from_ini(config.to_ini()).tolerances.bracket == 1.2345678901234567e-09

    def test_malformed_ini(self):
        """Text without section headers is refused"""
        with pytest.raises(ConfigError):
            RunConfig.from_ini('seed = 3\n')

    def test_unknown_key(self):
        """Unknown keys are reported by section and key"""
        with pytest.raises(ConfigError) as excinfo:
            RunConfig.from_dict({'run': {'bogus': '1'}})
        assert 'run.bogus' in excinfo.value.errors

    def test_unknown_section(self):
        """Unknown sections are refused"""
        with pytest.raises(ConfigError):
            RunConfig.from_dict({'plotting': {}})

    def test_bad_value(self):
        """Values must parse as the field type"""
        with pytest.raises(ConfigError) as excinfo:
            RunConfig.from_dict({'run': {'seed': 'three'}})
        assert 'run.seed' in excinfo.value.errors


class TestValidation:
    def test_defaults_validate(self):
        """The built-in defaults pass every form"""
        typed = validate_sections(RunConfig().to_strings())
        assert typed['construction']['rho1'] == 200.0
        assert typed['carleman']['n_tau'] == 20

    def test_errors_are_collected(self):
        """Every failing field across sections lands in one error"""
        raw = RunConfig().to_strings()
        raw['construction']['r_max'] = '150.0'
        raw['carleman']['n_tau'] = '0'
        with pytest.raises(ConfigError) as excinfo:
            validate_sections(raw)
        assert {'construction.r_max', 'carleman.n_tau'} <= set(excinfo.value.errors)

    def test_alpha_threshold_for_fourth_order(self):
        """alpha must clear the threshold unless the polyharmonic test is selected"""
        raw = RunConfig().to_strings()
        raw['carleman'].update({'test': 'inequality_33', 'b': '2.0', 'alpha': '0.5'})
        with pytest.raises(ConfigError) as excinfo:
            validate_sections(raw)
        assert 'carleman.alpha' in excinfo.value.errors
        raw['carleman']['test'] = 'inequality_21'
        validate_sections(raw)

    def test_weights_checked(self):
        """Weight identifiers must exist in the catalogue"""
        raw = RunConfig().to_strings()
        raw['pseudoconvex']['weights'] = 'bk_phi1,quartic'
        with pytest.raises(ConfigError) as excinfo:
            validate_sections(raw)
        assert 'pseudoconvex.weights' in excinfo.value.errors

    def test_probe_radii_checked(self):
        """Probe balls must fit above the first annulus"""
        raw = RunConfig().to_strings()
        raw['decay']['probe_radii'] = '150'
        with pytest.raises(ConfigError):
            validate_sections(raw)


class TestLab:
    def test_testing_sections(self, lab):
        """The testing class shrinks the workload"""
        config = lab.load_run_config()
        assert config.construction.r_max == 900.0
        assert config.carleman.n_functions == 2

    def test_preset_layer(self, lab):
        """Presets override the class sections and are recorded"""
        config = lab.load_run_config(preset='lemma-3.3')
        assert config.pseudoconvex.mode == 'lemma'
        assert config.carleman.test == 'inequality_33'
        assert config.carleman.n_functions == 10
        assert config.run.preset == 'lemma-3.3'

    def test_every_preset_validates(self, lab):
        """All named presets load"""
        for name in PRESETS:
            lab.load_run_config(preset=name)

    def test_unknown_preset(self, lab):
        """Unknown presets are configuration errors"""
        with pytest.raises(ConfigError):
            lab.load_run_config(preset='nope')

    def test_file_layer(self, lab, tmp_path):
        """INI files override the class sections, explicit overrides win over files"""
        path = tmp_path / 'run.ini'
        path.write_text('[decay]\nn_radii = 9\n\n[run]\nseed = 4\n', encoding='utf-8')
        config = lab.load_run_config(str(path), overrides={'run': {'seed': '5'}})
        assert config.decay.n_radii == 9
        assert config.run.seed == 5

    def test_missing_file(self, lab, tmp_path):
        """Unreadable files are configuration errors"""
        with pytest.raises(ConfigError):
            lab.load_run_config(str(tmp_path / 'missing.ini'))

    def test_output_dir_from_environment(self, lab, monkeypatch, tmp_path):
        """UCLAB_OUTPUT_DIR applies unless overridden"""
        monkeypatch.setenv('UCLAB_OUTPUT_DIR', str(tmp_path / 'env'))
        assert lab.load_run_config().run.output_dir == str(tmp_path / 'env')
        config = lab.load_run_config(overrides={'run': {'output_dir': str(tmp_path / 'flag')}})
        assert config.run.output_dir == str(tmp_path / 'flag')

    def test_environment_selection(self, monkeypatch):
        """UCLAB_ENV picks the class, UCLAB_THREADS the worker cap"""
        monkeypatch.setenv('UCLAB_ENV', 'testing')
        monkeypatch.setenv('UCLAB_THREADS', '3')
        lab = create_lab()
        assert lab.config['ENV'] == 'testing'
        assert lab.config['THREADS'] == 3
        assert thread_cap() == 3

    def test_unknown_environment(self):
        """Unknown environments are refused"""
        with pytest.raises(ConfigError):
            create_lab('staging')

    def test_file_keeps_class_sections(self, lab, tmp_path):
        """Keys missing from the file keep the class values"""
        path = tmp_path / 'partial.ini'
        path.write_text('[carleman]\nm = 2\n', encoding='utf-8')
        config = lab.load_run_config(str(path))
        assert config.carleman.m == 2
        assert config.construction.r_max == 900.0

    def test_unknown_override_key(self, lab):
        """Misspelled keys are not silently dropped"""
        with pytest.raises(ConfigError) as excinfo:
            lab.load_run_config(overrides={'decay': {'n_radius': '9'}})
        assert 'decay.n_radius' in excinfo.value.errors
