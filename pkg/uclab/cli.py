import logging
from dataclasses import fields

import click

from uclab import __version__, create_lab
from uclab.commands.build import cmd_build
from uclab.commands.carleman import cmd_carleman
from uclab.commands.decay import cmd_decay
from uclab.commands.potential import cmd_potential
from uclab.commands.pseudoconvex import cmd_pseudoconvex
from uclab.config import PRESETS
from uclab.errors import ConfigError, ConstructionError, LabError, QuadratureError, SymbolError
from uclab.models import SECTION_TYPES
from uclab.reports import write_report
from uclab.utils.sampling import set_thread_cap

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _keys_help():
    lines = ['Configuration keys (INI sections, or --set section.key=value):', '']
    for name, section_type in SECTION_TYPES.items():
        keys = ', '.join(f'{f.name} ({f.type.__name__}, default {f.default!r})' for f in fields(section_type))
        lines.append(f'\b\n[{name}] {keys}')
    return '\n\n'.join(lines)


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        section, dot, name = key.strip().partition('.')
        if not sep or not dot or not name:
            raise ConfigError(f"override '{pair}' is not of the form section.key=value", {'set': [pair]})
        overrides.setdefault(section, {})[name] = value.strip()
    return overrides


def error_payload(exc: LabError):
    """Structured failure description carrying the exception's witness data."""
    if isinstance(exc, ConstructionError):
        return exc.to_dict()
    payload = {'error': str(exc), 'type': type(exc).__name__}
    if isinstance(exc, SymbolError):
        payload['witness'] = exc.witness
    if isinstance(exc, QuadratureError):
        payload['worst_cell'] = exc.worst_cell
    if isinstance(exc, ConfigError):
        payload['errors'] = exc.errors
    return payload


def run_command(ctx, command: str, handler) -> int:
    """Load and validate the configuration, run the handler and map failures to exit codes."""
    options = ctx.obj
    try:
        lab = create_lab(options['env'])
        overrides = _parse_overrides(options['set'])
        overrides.setdefault('run', {})['command'] = command
        for key in ('seed', 'threads', 'output_dir'):
            if options.get(key) is not None:
                overrides['run'][key] = str(options[key])
        config = lab.load_run_config(options['config'], options['preset'], overrides)
    except ConfigError as exc:
        click.echo(f'Configuration error: {exc}', err=True)
        return EXIT_CONFIG

    set_thread_cap(config.run.threads)
    try:
        return handler(config)
    except ConfigError as exc:
        click.echo(f'Configuration error: {exc}', err=True)
        return EXIT_CONFIG
    except LabError as exc:
        logger.error(f'{command} failed: {exc}')
        write_report(config.run.output_dir, command, config, 'fail', error_payload(exc))
        click.echo(f'Verification failure: {exc}', err=True)
        return EXIT_FAIL


@click.group(epilog=_keys_help())
@click.version_option(__version__, prog_name='uclab')
@click.option('--config', 'config', type=click.Path(dir_okay=False), default=None, help='INI run configuration.')
@click.option('--preset', type=click.Choice(sorted(PRESETS)), default=None, help='Named parameter set.')
@click.option('--set', 'set_', multiple=True, metavar='SECTION.KEY=VALUE', help='Override one configuration key.')
@click.option('--seed', type=int, default=None, help='Seed of every random stream.')
@click.option('--threads', type=int, default=None, help='Worker cap; results do not depend on it.')
@click.option('--output-dir', type=click.Path(file_okay=False), default=None, help='Report directory.')
@click.option('--env', type=click.Choice(['development', 'testing', 'acceptance']), default=None,
              help='Configuration class (defaults to UCLAB_ENV, then development).')
@click.pass_context
def cli(ctx, config, preset, set_, seed, threads, output_dir, env):
    """Unique-continuation verification lab."""
    ctx.obj = {'config': config, 'preset': preset, 'set': set_, 'seed': seed, 'threads': threads,
               'output_dir': output_dir, 'env': env}


@cli.command()
@click.pass_context
def pseudoconvex(ctx):
    """Sample Poisson brackets on characteristic sets."""
    ctx.exit(run_command(ctx, 'pseudoconvex', cmd_pseudoconvex))


@cli.command()
@click.pass_context
def build(ctx):
    """Construct and audit the decaying solution."""
    ctx.exit(run_command(ctx, 'build', cmd_build))


@cli.command()
@click.pass_context
def potential(ctx):
    """Tabulate sup|V| per annulus."""
    ctx.exit(run_command(ctx, 'potential', cmd_potential))


@cli.command()
@click.pass_context
def decay(ctx):
    """Fit the decay exponent and check the envelope."""
    ctx.exit(run_command(ctx, 'decay', cmd_decay))


@cli.command()
@click.pass_context
def carleman(ctx):
    """Sweep tau for seeded test functions."""
    ctx.exit(run_command(ctx, 'carleman', cmd_carleman))


@cli.command('write-config')
@click.argument('path', type=click.Path(dir_okay=False))
@click.pass_context
def write_config(ctx, path):
    """Write the effective configuration as INI."""
    options = ctx.obj
    try:
        lab = create_lab(options['env'])
        config = lab.load_run_config(options['config'], options['preset'], _parse_overrides(options['set']))
    except ConfigError as exc:
        click.echo(f'Configuration error: {exc}', err=True)
        ctx.exit(EXIT_CONFIG)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(config.to_ini())
    click.echo(f'Wrote {path}')


__all__ = ['cli', 'run_command', 'error_payload']
