import logging
import os

from uclab.config import Config, config_by_name, PRESETS
from uclab.errors import ConfigError
from uclab.models import RunConfig
from uclab.schemas import validate_sections
from uclab.utils.sampling import set_thread_cap

__version__ = '0.1.0'

_logging_configured = False


class Lab:
    """Holds the selected configuration and the run-configuration loader."""

    def __init__(self, name='uclab'):
        self.name = name
        self.config = {}
        self.logger = logging.getLogger(name)

    def __repr__(self):
        return f'<Lab {self.config.get("ENV", "development")}>'

    def config_from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self.config[key] = getattr(obj, key)

    def load_run_config(self, path=None, preset=None, overrides=None) -> RunConfig:
        """
        Layer defaults, the configuration class, a preset, an INI file and
        explicit overrides, then validate the result section by section.
        """
        raw = RunConfig().to_strings()
        layers = [{'run': {'threads': str(self.config.get('THREADS', 1))}}, self.config.get('SECTIONS', {})]
        if preset:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset '{preset}'", {'run.preset': [f'one of {sorted(PRESETS)}']})
            layers.append(PRESETS[preset])
        if path:
            try:
                with open(path, encoding='utf-8') as handle:
                    layers.append(RunConfig.read_ini(handle.read()))
            except OSError as exc:
                raise ConfigError(f'cannot read {path}: {exc}', {'file': [str(exc)]}) from None
        env_output = os.environ.get('UCLAB_OUTPUT_DIR')
        if env_output:
            layers.append({'run': {'output_dir': env_output}})
        layers.append(overrides or {})
        for layer in layers:
            for section, values in layer.items():
                if section not in raw:
                    raise ConfigError(f'unknown section [{section}]', {section: ['unknown section']})
                unknown = sorted(set(values) - set(raw[section]))
                if unknown:
                    raise ConfigError(f'unknown keys in [{section}]: {unknown}',
                                      {f'{section}.{key}': ['unknown key'] for key in unknown})
                raw[section].update(values)
        if preset:
            raw['run']['preset'] = preset

        config = RunConfig.from_dict(validate_sections(raw))
        self.logger.debug(f'Loaded {config!r}')
        return config


def _configure_logging(level, fmt):
    global _logging_configured
    if _logging_configured:
        logging.getLogger().setLevel(level)
        return
    logging.basicConfig(level=level, format=fmt)
    _logging_configured = True


def create_lab(config_name=None):
    lab = Lab(__name__)

    # Configuration
    config_name = config_name or os.environ.get('UCLAB_ENV') or 'development'
    if config_name not in config_by_name:
        raise ConfigError(f"unknown environment '{config_name}'", {'UCLAB_ENV': [f'one of {sorted(config_by_name)}']})
    lab.config_from_object(config_by_name[config_name])
    lab.config['ENV'] = config_name

    level = os.environ.get('UCLAB_LOG_LEVEL') or lab.config['LOG_LEVEL']
    _configure_logging(level.upper(), lab.config['LOG_FORMAT'])

    threads = int(os.environ.get('UCLAB_THREADS') or lab.config['THREADS'])
    lab.config['THREADS'] = threads
    set_thread_cap(threads)
    lab.logger.debug(f'Created {lab!r} with {threads} threads')
    return lab


__all__ = ['Config', 'Lab', 'create_lab', '__version__']
