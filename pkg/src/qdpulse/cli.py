"""CLI interface for qdpulse"""

import logging
import math
import os
import sys
import warnings
from typing import List, Optional

import click

from qdpulse import __version__
from qdpulse.core.config import NAMED_POINTS, Config
from qdpulse.core.errors import ConfigInvalid, CouplingMismatch, TableMismatch
from qdpulse.core.manifest import RunManifest, verify_outputs
from qdpulse.core.model import DEFAULT_JP_UEV, DEFAULT_X, ModelParams

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

TWO_PI = 2 * math.pi
DATA_FILE = "data.csv"

# Validation-type failures exit with 1, everything else with 2
VALIDATION_ERRORS = (ConfigInvalid, TableMismatch, CouplingMismatch)


def _fail(e: Exception, verbose: bool) -> None:
    click.echo(f"✗ Error: {e}")
    if verbose:
        import traceback

        traceback.print_exc()
    sys.exit(1 if isinstance(e, VALIDATION_ERRORS) else 2)


def _set_verbosity(ctx, verbose: bool) -> None:
    if verbose or ctx.obj.get("debug"):
        logging.getLogger().setLevel(logging.DEBUG)


def config_options(func):
    """-c/--config, --set and -v/--verbose shared by the run commands"""
    options = [
        click.option(
            "-c",
            "--config",
            type=click.Path(exists=True),
            help="Path to configuration YAML/JSON file or run manifest",
        ),
        click.option(
            "--set",
            "set_values",
            multiple=True,
            metavar="SECTION.KEY=VALUE",
            help="Override a config value (can be used multiple times)",
        ),
        click.option(
            "-v",
            "--verbose",
            is_flag=True,
            help="Enable verbose logging",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load_config(config: Optional[str], set_values: tuple, output_dir: Optional[str] = None) -> Config:
    cfg = Config(config, overrides=list(set_values))
    if output_dir:
        cfg.set("output_dir", output_dir)
    return cfg


def _prepare_run_dir(cfg: Config) -> str:
    run_dir = cfg.output_dir
    os.makedirs(run_dir, exist_ok=True)
    return run_dir


@click.group()
@click.option(
    "--debug",
    is_flag=True,
    help="Enable debug mode with verbose output and warnings",
)
@click.version_option(version=__version__)
@click.pass_context
def cli(ctx, debug):
    """qdpulse - Pulsed charge-injection entanglement simulator

    Simulate two capacitively coupled charge qubits initialized by gate pulses,
    sweep pulse parameters, and study dephasing and amplitude noise.
    """
    ctx.ensure_object(dict)
    ctx.obj["debug"] = debug

    if debug:
        logging.getLogger().setLevel(logging.DEBUG)
    else:
        # Suppress deprecation warnings in production mode
        warnings.filterwarnings("ignore", category=DeprecationWarning)


@cli.command()
@click.option("--J-ueV", "j_uev", type=float, default=2 * DEFAULT_JP_UEV, show_default=True,
              help="Direct inter-qubit coupling J (micro-eV)")
@click.option("--Jp-ueV", "jp_uev", type=float, default=DEFAULT_JP_UEV, show_default=True,
              help="Crossed inter-qubit coupling J' (micro-eV)")
@click.option("--gamma-ueV", "gamma_uev", type=float, default=DEFAULT_X * DEFAULT_JP_UEV,
              show_default=True, help="Intra-qubit hopping gamma (micro-eV)")
@click.option("-v", "--verbose", is_flag=True, help="Enable verbose logging")
@click.pass_context
def check(ctx, j_uev: float, jp_uev: float, gamma_uev: float, verbose: bool):
    """Run the self-check oracle suite

    Examples:
        qdpulse check
        qdpulse check --J-ueV 300 --Jp-ueV 100
    """
    from qdpulse.core.oracles import run_oracles

    _set_verbosity(ctx, verbose)
    try:
        params = ModelParams(gamma=gamma_uev, J=j_uev, Jp=jp_uev)
        results = run_oracles(params)
    except Exception as e:
        _fail(e, verbose)

    for result in results:
        mark = "✓" if result.passed else "✗"
        click.echo(f"{mark} {result.name}: {result.detail}")

    if all(r.passed for r in results):
        click.echo("\n✓ All oracles passed")
        sys.exit(0)
    click.echo("\n✗ Oracle check failed")
    sys.exit(1)


@cli.command()
@config_options
def validate(config: Optional[str], set_values: tuple, verbose: bool):
    """Validate configuration file

    Examples:
        qdpulse validate -c config.yaml
        qdpulse validate -c runs/h/manifest.json --set sweep.workers=4
    """
    try:
        cfg = _load_config(config, set_values)

        if not cfg.validate():
            click.echo("✗ Configuration validation failed")
            sys.exit(1)

        sim = cfg.sim_config
        g0, p = cfg.pulse_ratios
        grid = cfg.sweep_grid
        click.echo("✓ Configuration is valid")
        click.echo(f"  Pulse: {sim.pulse.shape.value}, Gamma0/gamma = {g0:g}, p = {p:g}")
        click.echo(f"  Integration: theta_max/2pi = {sim.theta_max / TWO_PI:g}, "
                   f"dtheta/2pi = {sim.dtheta / TWO_PI:g}")
        click.echo(f"  Sweep grid: {grid.shape[0]} x {grid.shape[1]} ({grid.pulse_shape.value})")
        sys.exit(0)

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@config_options
@click.option("--point", type=click.Choice(sorted(NAMED_POINTS), case_sensitive=False),
              help="Named operating point")
@click.option("--pulse", "--shape", "shape", type=click.Choice(["square", "gaussian"]),
              help="Pulse shape")
@click.option("--dephasing-ghz", type=float, help="Dephasing rate (GHz)")
@click.option("--seed", type=int, help="Noise seed")
@click.option("-o", "--output-dir", type=click.Path(), help="Run directory")
@click.pass_context
def simulate(ctx, config: Optional[str], set_values: tuple, verbose: bool, point: Optional[str],
             shape: Optional[str], dephasing_ghz: Optional[float], seed: Optional[int],
             output_dir: Optional[str]):
    """Integrate one trajectory and write data.csv + manifest.json

    Examples:
        qdpulse simulate --point H
        qdpulse simulate --point H --dephasing-ghz 1.0 -o runs/h-dph
        qdpulse simulate --pulse gaussian --point H
    """
    from qdpulse.core.dynamics import evolve
    from qdpulse.core.metrics import stationary_value, trajectory_maxima

    _set_verbosity(ctx, verbose)
    try:
        cfg = _load_config(config, set_values, output_dir)
        if point:
            cfg.set_point(point)
        if shape:
            cfg.set("pulse.shape", shape)
        if dephasing_ghz is not None:
            cfg.set("dynamics.dephasing_ghz", dephasing_ghz)
        if seed is not None:
            cfg.set("noise.seed", seed)

        sim = cfg.sim_config
        manifest = RunManifest("simulate", cfg.resolved, seeds={"noise": sim.noise.seed})
        traj = evolve(sim)

        run_dir = _prepare_run_dir(cfg)
        data_path = os.path.join(run_dir, DATA_FILE)
        traj.to_csv(data_path)
        manifest.add_output(run_dir, data_path)

        report = trajectory_maxima(traj)
        manifest.summary = {
            "max_pop_0110": report.max_pop_0110,
            "max_fidelity": report.max_fidelity,
            "max_negativity": report.max_negativity,
            "theta_at_max_negativity": report.theta_max_negativity,
        }
        click.echo(f"  Max pop |0110>: {report.max_pop_0110:.4f} "
                   f"at theta/2pi = {report.theta_max_pop_0110 / TWO_PI:.4f}")
        click.echo(f"  Max fidelity:   {report.max_fidelity:.4f} "
                   f"at theta/2pi = {report.theta_max_fidelity / TWO_PI:.4f}")
        click.echo(f"  Max negativity: {report.max_negativity:.4f} "
                   f"(2N = {2 * report.max_negativity:.4f}) "
                   f"at theta/2pi = {report.theta_max_negativity / TWO_PI:.4f}")
        if traj.thetas[-1] > traj.pulse_end:
            entropy = stationary_value(traj, "linear_entropy", traj.pulse_end)
            manifest.summary["post_pulse_linear_entropy"] = entropy
            click.echo(f"  Post-pulse linear entropy: {entropy:.4f}")

        manifest.write(run_dir)
        click.echo(f"\n✓ Simulation written to {run_dir}")
        sys.exit(0)

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@config_options
@click.option("--shape", "--pulse", "shape", type=click.Choice(["square", "gaussian"]),
              help="Pulse shape for every grid point")
@click.option("--workers", type=int, help="Worker count (1 runs serially)")
@click.option("--seed", type=int, help="Base seed for per-point noise seeds")
@click.option("-o", "--output-dir", type=click.Path(), help="Run directory")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
@click.pass_context
def sweep(ctx, config: Optional[str], set_values: tuple, verbose: bool, shape: Optional[str],
          workers: Optional[int], seed: Optional[int], output_dir: Optional[str], no_progress: bool):
    """Sweep (Gamma0/gamma, p) and write per-point maxima

    Examples:
        qdpulse sweep --shape square -o runs/square
        qdpulse sweep --shape gaussian --workers 8 -o runs/gaussian
    """
    from qdpulse.sweep.runner import run_sweep

    _set_verbosity(ctx, verbose)
    try:
        cfg = _load_config(config, set_values, output_dir)
        if shape:
            cfg.set("sweep.shape", shape)
        if workers is not None:
            cfg.set("sweep.workers", workers)
        if seed is not None:
            cfg.set("sweep.base_seed", seed)

        grid = cfg.sweep_grid
        manifest = RunManifest("sweep", cfg.resolved, seeds={"base_seed": grid.base_seed})
        result = run_sweep(grid, progress=not no_progress)

        run_dir = _prepare_run_dir(cfg)
        data_path = os.path.join(run_dir, DATA_FILE)
        result.to_csv(data_path)
        manifest.add_output(run_dir, data_path)
        manifest.summary = dict(result.metadata)

        if len(result.failed) < len(result):
            best = result.argmax("max_negativity")
            manifest.summary["argmax_negativity"] = {
                "gamma0_over_gamma": best.gamma0_over_gamma, "p": best.p,
                "max_negativity": best.max_negativity,
            }
            click.echo(f"  Best cell: Gamma0/gamma = {best.gamma0_over_gamma:g}, p = {best.p:g}, "
                       f"max N = {best.max_negativity:.4f} (2N = {best.max_negativity_2x:.4f})")
        if result.failed:
            click.echo(f"  ⚠️  {len(result.failed)} grid point(s) failed")

        manifest.write(run_dir)
        click.echo(f"\n✓ Sweep written to {run_dir}")
        sys.exit(0)

    except Exception as e:
        _fail(e, verbose)


def _write_series(run_dir: str, manifest: RunManifest, name: str, traj) -> None:
    series_dir = os.path.join(run_dir, name)
    os.makedirs(series_dir, exist_ok=True)
    path = os.path.join(series_dir, DATA_FILE)
    traj.to_csv(path)
    manifest.add_output(run_dir, path)


@cli.command(name="dephasing-study")
@config_options
@click.option("--point", type=click.Choice(sorted(NAMED_POINTS), case_sensitive=False),
              help="Named operating point")
@click.option("--rate", "rates", type=float, multiple=True,
              help="Dephasing rate in GHz (can be used multiple times)")
@click.option("-o", "--output-dir", type=click.Path(), help="Run directory")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
@click.pass_context
def dephasing_study_cmd(ctx, config: Optional[str], set_values: tuple, verbose: bool,
                        point: Optional[str], rates: tuple, output_dir: Optional[str],
                        no_progress: bool):
    """Square-pulse runs at one point for several dephasing rates

    Examples:
        qdpulse dephasing-study --point H
        qdpulse dephasing-study --rate 0.01 --rate 1.0 -o runs/dph
    """
    from qdpulse.core.metrics import trajectory_maxima
    from qdpulse.sweep.studies import dephasing_study

    _set_verbosity(ctx, verbose)
    try:
        cfg = _load_config(config, set_values, output_dir)
        if point:
            cfg.set("study.point", point.upper())
        if rates:
            cfg.set("study.dephasing_rates_ghz", list(rates))

        study = cfg.study_settings
        manifest = RunManifest("dephasing-study", cfg.resolved)
        trajectories = dephasing_study(study.point, study.dephasing_rates_ghz,
                                       base=cfg.sim_config, progress=not no_progress)

        run_dir = _prepare_run_dir(cfg)
        for rate, traj in zip(study.dephasing_rates_ghz, trajectories):
            name = f"rate_{rate:g}ghz"
            _write_series(run_dir, manifest, name, traj)
            first_cycle = trajectory_maxima(traj, (0.0, TWO_PI))
            manifest.summary[name] = {"first_cycle_max_negativity": first_cycle.max_negativity}
            click.echo(f"  {rate:g} GHz: first-cycle max N = {first_cycle.max_negativity:.4f}")

        manifest.write(run_dir)
        click.echo(f"\n✓ Dephasing study written to {run_dir}")
        sys.exit(0)

    except Exception as e:
        _fail(e, verbose)


@cli.command(name="noise-study")
@config_options
@click.option("--point", type=click.Choice(sorted(NAMED_POINTS), case_sensitive=False),
              help="Named operating point")
@click.option("--scope", type=click.Choice(["pulse_only", "full_evolution"]), help="Where noise acts")
@click.option("--amplitude", "amplitudes", type=float, multiple=True,
              help="Noise amplitude in units of study.noise_reference (can be used multiple times)")
@click.option("--n-seeds", type=int, help="Noise realizations averaged per amplitude")
@click.option("--seed", type=int, help="Base seed")
@click.option("-o", "--output-dir", type=click.Path(), help="Run directory")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
@click.pass_context
def noise_study_cmd(ctx, config: Optional[str], set_values: tuple, verbose: bool,
                    point: Optional[str], scope: Optional[str], amplitudes: tuple,
                    n_seeds: Optional[int], seed: Optional[int], output_dir: Optional[str],
                    no_progress: bool):
    """Square-pulse runs at one point for several noise amplitudes

    Examples:
        qdpulse noise-study --point H --scope pulse_only
        qdpulse noise-study --scope full_evolution --n-seeds 16 -o runs/noise-full
    """
    from qdpulse.core.metrics import trajectory_maxima
    from qdpulse.sweep.studies import default_noise_reference, noise_study

    _set_verbosity(ctx, verbose)
    try:
        cfg = _load_config(config, set_values, output_dir)
        if point:
            cfg.set("study.point", point.upper())
        if scope:
            cfg.set("study.noise_scope", scope)
        if amplitudes:
            cfg.set("study.noise_amplitudes", list(amplitudes))
        if n_seeds is not None:
            cfg.set("study.n_seeds", n_seeds)
        if seed is not None:
            cfg.set("noise.seed", seed)

        study = cfg.study_settings
        base_seed = int(cfg.data["noise"]["seed"])
        manifest = RunManifest("noise-study", cfg.resolved,
                               seeds={"base_seed": base_seed, "n_seeds": study.n_seeds})
        trajectories = noise_study(study.point, study.noise_amplitudes, study.noise_scope,
                                   base=cfg.sim_config, n_seeds=study.n_seeds, base_seed=base_seed,
                                   progress=not no_progress, reference=study.noise_reference,
                                   step_over_width=study.noise_step_over_width)
        unit = (study.noise_reference or default_noise_reference(study.noise_scope)).value

        run_dir = _prepare_run_dir(cfg)
        for amplitude, traj in zip(study.noise_amplitudes, trajectories):
            name = f"amp_{amplitude:g}"
            _write_series(run_dir, manifest, name, traj)
            report = trajectory_maxima(traj)
            manifest.summary[name] = {"max_fidelity": report.max_fidelity,
                                      "max_negativity": report.max_negativity}
            click.echo(f"  A = {amplitude:g} {unit}: max F = {report.max_fidelity:.4f}, "
                       f"max N = {report.max_negativity:.4f}")

        manifest.write(run_dir)
        click.echo(f"\n✓ Noise study written to {run_dir}")
        sys.exit(0)

    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
def verify(run_dir: str):
    """Re-hash run outputs against their manifest

    Examples:
        qdpulse verify runs/latest
    """
    try:
        problems: List[str] = verify_outputs(run_dir)
        if problems:
            for relative in problems:
                click.echo(f"  ✗ {relative}")
            click.echo("✗ Verification failed")
            sys.exit(1)
        click.echo("✓ All outputs match the manifest")
        sys.exit(0)

    except Exception as e:
        _fail(e, False)


@cli.command()
def presets():
    """List the named operating points

    Examples:
        qdpulse presets
    """
    click.echo("Named points (Gamma0/gamma, sigma_theta/2pi):")
    for label, (g0, p) in NAMED_POINTS.items():
        click.echo(f"  {label}: ({g0:g}, {p:g})")


def main():
    """Entry point for CLI"""
    cli()


if __name__ == "__main__":
    main()
