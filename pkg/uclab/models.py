import configparser
import io
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from uclab.errors import ConfigError


class Verdict(Enum):
    POSITIVE = "positive"
    VANISHING = "vanishing"
    VIOLATED = "violated"
    PASS = "pass"
    FAIL = "fail"


def _plain(value):
    """numpy scalars/arrays to JSON-ready python values"""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    return value


@dataclass
class BracketReport:
    operator_id: str
    weight_id: str
    sample_count: int
    min_normalized_value: float
    witness: Dict
    verdict: Verdict
    max_abs_normalized: float = 0.0
    skipped: int = 0
    extras: Dict = field(default_factory=dict)

    def __repr__(self):
        return f'<BracketReport {self.operator_id}/{self.weight_id}: {self.verdict.value}>'

    def to_dict(self):
        return _plain({
            'operator_id': self.operator_id,
            'weight_id': self.weight_id,
            'sample_count': self.sample_count,
            'min_normalized_value': self.min_normalized_value,
            'max_abs_normalized': self.max_abs_normalized,
            'witness': self.witness,
            'verdict': self.verdict.value,
            'skipped': self.skipped,
            'extras': self.extras,
        })


@dataclass
class CarlemanRow:
    f_id: str
    tau: float
    log_lhs: float
    log_rhs: float
    log_tau_factor: float

    @property
    def log_ratio(self):
        return self.log_lhs - self.log_rhs

    def to_dict(self):
        return _plain({
            'f_id': self.f_id,
            'tau': self.tau,
            'log_lhs': self.log_lhs,
            'log_rhs': self.log_rhs,
            'log_tau_factor': self.log_tau_factor,
            'log_ratio': self.log_ratio,
        })


@dataclass
class CarlemanReport:
    test: str
    parameters: Dict
    rows: List[CarlemanRow]
    slope: float
    log_constant: float
    verdict: Verdict
    expected_slope: Optional[float] = None

    def __repr__(self):
        return f'<CarlemanReport {self.test}: slope={self.slope:.3f} {self.verdict.value}>'

    def to_dict(self):
        return _plain({
            'test': self.test,
            'parameters': self.parameters,
            'rows': [row.to_dict() for row in self.rows],
            'slope': self.slope,
            'expected_slope': self.expected_slope,
            'log_constant': self.log_constant,
            'verdict': self.verdict.value,
        })


@dataclass
class DecayReport:
    radii: List[float]
    log_m: List[float]
    c_env: float
    c_env_lower: float
    exponent: float
    coefficient: float
    residual: float
    plan_exponent: Optional[float] = None
    probe_rows: List[Dict] = field(default_factory=list)
    envelope: List[Dict] = field(default_factory=list)
    verdict: Verdict = Verdict.PASS

    def __repr__(self):
        return f'<DecayReport s={self.exponent:.4f} C_env={self.c_env:.4g}>'

    def to_dict(self):
        return _plain({
            'radii': self.radii,
            'log_m': self.log_m,
            'c_env': self.c_env,
            'c_env_lower': self.c_env_lower,
            'exponent': self.exponent,
            'coefficient': self.coefficient,
            'residual': self.residual,
            'plan_exponent': self.plan_exponent,
            'probe_rows': self.probe_rows,
            'envelope': self.envelope,
            'verdict': self.verdict.value,
        })


@dataclass
class PotentialReport:
    b: float
    rows: List[Dict]
    sup_abs_v: float
    verdict: Verdict = Verdict.PASS

    def __repr__(self):
        return f'<PotentialReport b={self.b} sup|V|={self.sup_abs_v:.4g}>'

    def to_dict(self):
        return _plain({
            'b': self.b,
            'rows': self.rows,
            'sup_abs_v': self.sup_abs_v,
            'verdict': self.verdict.value,
        })


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunSection:
    command: str = 'build'
    seed: int = 0
    threads: int = 1
    output_dir: str = 'out'
    preset: str = ''


@dataclass
class ConstructionSection:
    rho1: float = 200.0
    r_max: float = 5000.0
    ratio_constant: float = 8.0
    n_radial: int = 400
    n_angular: int = 512
    potential_b: float = 2.0
    potential_radial: int = 32
    potential_angular: int = 256
    field_radial: int = 8
    field_angular: int = 16


@dataclass
class PseudoconvexSection:
    mode: str = 'condition'
    weights: str = 'bk_phi1,log_sq_phi2'
    orders: str = '1,2,3'
    b: float = 2.0
    alpha: float = 1.5
    region_lo: float = 0.1
    region_hi: float = 9.0
    n_samples: int = 1000


@dataclass
class CarlemanSection:
    test: str = 'inequality_21'
    m: int = 1
    b: float = 2.0
    alpha: float = 1.5
    n_functions: int = 20
    support_lo: float = 1.0
    support_hi: float = 2.0
    max_ell: int = 2
    poly_degree: int = 2
    tau_lo: float = 5.0
    tau_hi: float = 200.0
    n_tau: int = 20
    c2: float = 0.0


@dataclass
class DecaySection:
    r_lo: float = 250.0
    r_hi: float = 4500.0
    n_radii: int = 64
    probe_radii: str = '1000,3000'
    n_centers: int = 64
    n_ball_samples: int = 1024
    radii_per_annulus: int = 16


@dataclass
class ToleranceSection:
    bracket: float = 1e-9
    vanishing: float = 1e-10
    quadrature_rtol: float = 1e-6
    slope: float = 0.3
    decay_band: float = 0.08
    plan_exponent: float = 0.02
    interface: float = 1e-12
    single_valuedness: float = 1e-10
    plateau: float = 1e-8


SECTION_TYPES = {
    'run': RunSection,
    'construction': ConstructionSection,
    'pseudoconvex': PseudoconvexSection,
    'carleman': CarlemanSection,
    'decay': DecaySection,
    'tolerances': ToleranceSection,
}


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce_value(kind, raw: str):
    if kind is float:
        return float(raw)
    if kind is int:
        return int(raw)
    return str(raw)


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    construction: ConstructionSection = field(default_factory=ConstructionSection)
    pseudoconvex: PseudoconvexSection = field(default_factory=PseudoconvexSection)
    carleman: CarlemanSection = field(default_factory=CarlemanSection)
    decay: DecaySection = field(default_factory=DecaySection)
    tolerances: ToleranceSection = field(default_factory=ToleranceSection)

    def __repr__(self):
        return f'<RunConfig {self.run.command} seed={self.run.seed}>'

    def to_dict(self):
        return {name: asdict(getattr(self, name)) for name in SECTION_TYPES}

    def to_strings(self):
        """Every value as the text written to the INI file."""
        return {name: {key: _format_value(value) for key, value in section.items()}
                for name, section in self.to_dict().items()}

    @classmethod
    def from_dict(cls, data):
        """Build from {section: {key: value}}; values may be text or already typed."""
        sections = {}
        for name, section_type in SECTION_TYPES.items():
            given = dict(data.get(name) or {})
            unknown = set(given) - {f.name for f in fields(section_type)}
            if unknown:
                raise ConfigError(f'unknown keys in [{name}]: {sorted(unknown)}',
                                  {f'{name}.{key}': ['unknown key'] for key in sorted(unknown)})
            values = {}
            for f in fields(section_type):
                if f.name not in given:
                    continue
                try:
                    values[f.name] = _coerce_value(f.type, given[f.name])
                except (TypeError, ValueError):
                    raise ConfigError(f'[{name}] {f.name} is not a valid {f.type.__name__}',
                                      {f'{name}.{f.name}': [f'not a valid {f.type.__name__}']}) from None
            sections[name] = section_type(**values)
        unknown = set(data) - set(SECTION_TYPES)
        if unknown:
            raise ConfigError(f'unknown sections: {sorted(unknown)}',
                              {name: ['unknown section'] for name in sorted(unknown)})
        return cls(**sections)

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_dict(self.to_strings())
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    @staticmethod
    def read_ini(text: str):
        """Only the sections and keys present in the text, as strings."""
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f'malformed configuration: {exc}', {'file': [str(exc)]}) from None
        return {name: dict(parser[name]) for name in parser.sections()}

    @classmethod
    def from_ini(cls, text: str):
        return cls.from_dict(cls.read_ini(text))
