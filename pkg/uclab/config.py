import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    SCHEMA_VERSION = 1
    OUTPUT_DIR = os.environ.get('UCLAB_OUTPUT_DIR') or 'out'
    LOG_LEVEL = os.environ.get('UCLAB_LOG_LEVEL', 'INFO').upper()
    LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
    THREADS = int(os.environ.get('UCLAB_THREADS') or 1)

    # section defaults layered over RunConfig's own
    SECTIONS = {}


class DevelopmentConfig(Config):
    DEBUG = True
    SECTIONS = {
        'construction': {'rho1': '200.0', 'r_max': '5000.0'},
    }


class TestingConfig(Config):
    TESTING = True
    LOG_LEVEL = 'WARNING'
    SECTIONS = {
        'construction': {'rho1': '200.0', 'r_max': '900.0', 'n_radial': '40', 'n_angular': '64',
                         'potential_radial': '8', 'potential_angular': '32'},
        'pseudoconvex': {'n_samples': '200'},
        'carleman': {'n_functions': '2', 'n_tau': '4', 'tau_hi': '40.0'},
        'decay': {'r_lo': '210.0', 'r_hi': '880.0', 'n_radii': '8', 'probe_radii': '',
                  'n_centers': '8', 'n_ball_samples': '64', 'radii_per_annulus': '4'},
    }


class AcceptanceConfig(Config):
    SECTIONS = {
        'construction': {'rho1': '200.0', 'r_max': '5000.0'},
        'pseudoconvex': {'n_samples': '10000'},
        'carleman': {'n_functions': '20', 'n_tau': '20'},
    }


config_by_name = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'acceptance': AcceptanceConfig,
}


def _weighted_preset(eps: float):
    """b = 1 + eps/2 with the weight r^-eps."""
    b, alpha = repr(1 + eps / 2), repr(eps)
    return {
        'run': {'command': 'pseudoconvex'},
        'pseudoconvex': {'mode': 'lemma', 'b': b, 'alpha': alpha, 'region_lo': '0.5', 'region_hi': '1.0',
                         'n_samples': '10000'},
        'carleman': {'test': 'weighted_33', 'b': b, 'alpha': alpha, 'support_lo': '0.5', 'support_hi': '1.0',
                     'n_functions': '10'},
    }


PRESETS = {
    'example-3.2': {
        'run': {'command': 'pseudoconvex'},
        'pseudoconvex': {'mode': 'condition', 'weights': 'bk_phi1,log_sq_phi2', 'orders': '1,2,3',
                         'region_lo': '0.1', 'region_hi': '9.0'},
    },
    'lemma-3.3': {
        'run': {'command': 'pseudoconvex'},
        'pseudoconvex': {'mode': 'lemma', 'b': '2.0', 'alpha': '1.5', 'region_lo': '0.5', 'region_hi': '1.0',
                         'n_samples': '10000'},
        'carleman': {'test': 'inequality_33', 'b': '2.0', 'alpha': '1.5', 'support_lo': '0.5',
                     'support_hi': '1.0', 'n_functions': '10'},
    },
    'lemma-3.3-below': {
        'run': {'command': 'pseudoconvex'},
        'pseudoconvex': {'mode': 'lemma', 'b': '2.0', 'alpha': '0.5', 'region_lo': '0.5', 'region_hi': '1.0',
                         'n_samples': '10000'},
    },
    'weighted-eps': _weighted_preset(0.5),
    'desk': {
        'run': {'command': 'build'},
        'construction': {'rho1': '200.0', 'r_max': '5000.0'},
    },
}
