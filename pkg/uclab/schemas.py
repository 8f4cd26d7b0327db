from wtforms import Form, FloatField, IntegerField, StringField
from wtforms.validators import AnyOf, InputRequired, NumberRange, ValidationError

from uclab.errors import ConfigError, LabError
from uclab.meshkov import MIN_RHO
from uclab.pseudoconvex import alpha_threshold
from uclab.symbols import PHI1_R_MAX, weight_from_id

COMMANDS = ('pseudoconvex', 'build', 'potential', 'decay', 'carleman')
PSEUDOCONVEX_MODES = ('condition', 'lemma')
INEQUALITIES = ('inequality_21', 'inequality_33', 'weighted_33')


class _FormData(dict):
    """Plain dict of strings with the getlist interface WTForms expects."""

    def getlist(self, key):
        return [self[key]] if key in self else []


def _number_list(data, kind=float):
    return [kind(item) for item in (data or '').split(',') if item.strip()]


class RunForm(Form):
    command = StringField('Command', validators=[InputRequired(), AnyOf(COMMANDS)])
    seed = IntegerField('Seed', validators=[InputRequired(), NumberRange(min=0, max=2 ** 64 - 1)])
    threads = IntegerField('Threads', validators=[InputRequired(), NumberRange(min=1, max=256)])
    output_dir = StringField('Output directory', validators=[InputRequired()])
    preset = StringField('Preset')


class ConstructionForm(Form):
    rho1 = FloatField('First radius', validators=[InputRequired(), NumberRange(min=MIN_RHO)])
    r_max = FloatField('Outer radius', validators=[InputRequired()])
    ratio_constant = FloatField('Ratio constant', validators=[InputRequired(), NumberRange(min=0)])
    n_radial = IntegerField('Probe radii', validators=[InputRequired(), NumberRange(min=1)])
    n_angular = IntegerField('Probe angles', validators=[InputRequired(), NumberRange(min=1)])
    potential_b = FloatField('Anisotropy', validators=[InputRequired()])
    potential_radial = IntegerField('Potential radii', validators=[InputRequired(), NumberRange(min=1)])
    potential_angular = IntegerField('Potential angles', validators=[InputRequired(), NumberRange(min=1)])
    field_radial = IntegerField('Field CSV radii', validators=[InputRequired(), NumberRange(min=1)])
    field_angular = IntegerField('Field CSV angles', validators=[InputRequired(), NumberRange(min=1)])

    def validate_r_max(self, field):
        if self.rho1.data is not None and field.data is not None and not field.data > self.rho1.data:
            raise ValidationError('r_max must exceed rho1')

    def validate_potential_b(self, field):
        if field.data is not None and not field.data > 0:
            raise ValidationError('anisotropy must be positive')


class PseudoconvexForm(Form):
    mode = StringField('Mode', validators=[InputRequired(), AnyOf(PSEUDOCONVEX_MODES)])
    weights = StringField('Weights', validators=[InputRequired()])
    orders = StringField('Operator orders', validators=[InputRequired()])
    b = FloatField('Anisotropy', validators=[InputRequired()])
    alpha = FloatField('Weight exponent', validators=[InputRequired()])
    region_lo = FloatField('Inner radius', validators=[InputRequired()])
    region_hi = FloatField('Outer radius', validators=[InputRequired()])
    n_samples = IntegerField('Samples', validators=[InputRequired(), NumberRange(min=1)])

    def validate_weights(self, field):
        for weight_id in (field.data or '').split(','):
            try:
                weight_from_id(weight_id.strip())
            except (LabError, ValueError):
                raise ValidationError(f"unknown weight '{weight_id.strip()}'")

    def validate_orders(self, field):
        try:
            orders = _number_list(field.data, int)
        except ValueError:
            raise ValidationError('orders must be a comma separated list of integers')
        if not orders or any(m < 1 for m in orders):
            raise ValidationError('orders must be positive integers')

    def validate_b(self, field):
        if field.data is not None and (not field.data > 0 or field.data == 1):
            raise ValidationError('b must be positive and different from 1')

    def validate_alpha(self, field):
        if field.data is not None and not field.data > 0:
            raise ValidationError('alpha must be positive')

    def validate_region_lo(self, field):
        if field.data is not None and not field.data > 0:
            raise ValidationError('region must exclude the origin')

    def validate_region_hi(self, field):
        if self.region_lo.data is not None and field.data is not None and not field.data > self.region_lo.data:
            raise ValidationError('region_hi must exceed region_lo')


class CarlemanForm(Form):
    test = StringField('Inequality', validators=[InputRequired(), AnyOf(INEQUALITIES)])
    m = IntegerField('Polyharmonic order', validators=[InputRequired(), NumberRange(min=1, max=3)])
    b = FloatField('Anisotropy', validators=[InputRequired()])
    alpha = FloatField('Weight exponent', validators=[InputRequired()])
    n_functions = IntegerField('Test functions', validators=[InputRequired(), NumberRange(min=1)])
    support_lo = FloatField('Support start', validators=[InputRequired()])
    support_hi = FloatField('Support end', validators=[InputRequired(), NumberRange(max=PHI1_R_MAX)])
    max_ell = IntegerField('Largest angular mode', validators=[InputRequired(), NumberRange(min=0)])
    poly_degree = IntegerField('Polynomial degree', validators=[InputRequired(), NumberRange(min=0, max=12)])
    tau_lo = FloatField('Smallest tau', validators=[InputRequired()])
    tau_hi = FloatField('Largest tau', validators=[InputRequired(), NumberRange(max=1e3)])
    n_tau = IntegerField('Tau points', validators=[InputRequired(), NumberRange(min=1)])
    c2 = FloatField('C2', validators=[InputRequired(), NumberRange(min=0)])

    def validate_alpha(self, field):
        if self.test.data == 'inequality_21' or field.data is None or self.b.data is None:
            return
        try:
            threshold = alpha_threshold(self.b.data)
        except LabError as exc:
            raise ValidationError(str(exc))
        if not field.data > threshold:
            raise ValidationError(f'alpha must exceed {threshold:g} for b={self.b.data:g}')

    def validate_support_lo(self, field):
        if field.data is not None and not field.data > 0:
            raise ValidationError('support must exclude the origin')

    def validate_support_hi(self, field):
        if self.support_lo.data is not None and field.data is not None and not field.data > self.support_lo.data:
            raise ValidationError('support_hi must exceed support_lo')

    def validate_tau_lo(self, field):
        if field.data is not None and self.c2.data is not None and not field.data > self.c2.data:
            raise ValidationError('tau_lo must exceed C2')

    def validate_tau_hi(self, field):
        if self.tau_lo.data is not None and field.data is not None and field.data < self.tau_lo.data:
            raise ValidationError('tau_hi must not be below tau_lo')


class DecayForm(Form):
    r_lo = FloatField('Fit start', validators=[InputRequired(), NumberRange(min=MIN_RHO)])
    r_hi = FloatField('Fit end', validators=[InputRequired()])
    n_radii = IntegerField('Fit radii', validators=[InputRequired(), NumberRange(min=3)])
    probe_radii = StringField('Probe radii')
    n_centers = IntegerField('Probe centres', validators=[InputRequired(), NumberRange(min=1)])
    n_ball_samples = IntegerField('Ball samples', validators=[InputRequired(), NumberRange(min=1)])
    radii_per_annulus = IntegerField('Envelope radii', validators=[InputRequired(), NumberRange(min=1)])

    def validate_r_hi(self, field):
        if self.r_lo.data is not None and field.data is not None and not field.data > self.r_lo.data:
            raise ValidationError('r_hi must exceed r_lo')

    def validate_probe_radii(self, field):
        try:
            radii = _number_list(field.data)
        except ValueError:
            raise ValidationError('probe radii must be a comma separated list of numbers')
        if any(not r > MIN_RHO + 1 for r in radii):
            raise ValidationError(f'probe radii must exceed {MIN_RHO + 1:g}')


class ToleranceForm(Form):
    bracket = FloatField('Bracket', validators=[InputRequired(), NumberRange(min=0)])
    vanishing = FloatField('Vanishing', validators=[InputRequired(), NumberRange(min=0)])
    quadrature_rtol = FloatField('Quadrature', validators=[InputRequired(), NumberRange(min=1e-14, max=1e-2)])
    slope = FloatField('Slope', validators=[InputRequired(), NumberRange(min=0)])
    decay_band = FloatField('Decay band', validators=[InputRequired(), NumberRange(min=0)])
    plan_exponent = FloatField('Plan exponent', validators=[InputRequired(), NumberRange(min=0)])
    interface = FloatField('Interface', validators=[InputRequired(), NumberRange(min=0)])
    single_valuedness = FloatField('Single-valuedness', validators=[InputRequired(), NumberRange(min=0)])
    plateau = FloatField('Plateau', validators=[InputRequired(), NumberRange(min=0)])


SECTION_FORMS = {
    'run': RunForm,
    'construction': ConstructionForm,
    'pseudoconvex': PseudoconvexForm,
    'carleman': CarlemanForm,
    'decay': DecayForm,
    'tolerances': ToleranceForm,
}


def validate_sections(raw):
    """
    Validate {section: {key: text}} with one form per section.

    Returns the typed values; every field error across sections is collected
    into a single ConfigError.
    """
    errors = {}
    typed = {}
    for name, form_class in SECTION_FORMS.items():
        form = form_class(formdata=_FormData(raw.get(name) or {}))
        if form.validate():
            typed[name] = form.data
        for key, messages in form.errors.items():
            errors[f'{name}.{key}'] = list(messages)
    if errors:
        summary = '; '.join(f'{key}: {messages[0]}' for key, messages in sorted(errors.items()))
        raise ConfigError(f'invalid configuration: {summary}', errors)
    return typed
