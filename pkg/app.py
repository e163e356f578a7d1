import logging
from functools import wraps
from pathlib import Path
import importlib.metadata
from typing import Optional

import typer
from typing_extensions import Annotated

from src.utils.config_loader import ConfigLoader
from src.utils.exceptions import ExitCode, InvariantViolationError, TruncationError
from src.main import check_cxi_report, run_bloch, run_cxi_verify, run_hg, run_hg_coherence, run_hg_simulate

app = typer.Typer()

ConfigOption = Annotated[Path, typer.Option("--config", "-c", help="Path to the configuration file (YAML or JSON).")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output directory.")]
LogBaseOption = Annotated[Optional[str], typer.Option("--log-base", help="Entropy unit: nats or bits.")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Master seed.")]
ModesOption = Annotated[Optional[int], typer.Option("--modes", help="HG truncation N_HG.")]
SequencesOption = Annotated[Optional[int], typer.Option("--sequences", help="Number of simulated sequences.")]
MeasurementsOption = Annotated[Optional[int], typer.Option("--measurements", help="Measurements per sequence.")]


def version_callback(value: bool):
    if value:
        __version__ = importlib.metadata.version("cxi-toolkit")
        typer.echo(f"cxi-toolkit version: {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at DEBUG level.")] = False,
    version: Annotated[
        Optional[bool],
        typer.Option("--version", callback=version_callback, is_eager=True, help="Show the application's version and exit."),
    ] = None,
):
    """Ensemble coherence and the C = chi - I equality: verification and experiments."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def exit_codes(command):
    """Maps failures of a subcommand to the documented exit codes."""
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except InvariantViolationError as e:
            logging.error(f"Invariant violation: {e}")
            raise typer.Exit(ExitCode.INVARIANT_VIOLATION)
        except TruncationError as e:
            logging.error(f"Truncation inadequate at theta={e.theta}: {e}")
            raise typer.Exit(ExitCode.CONFIG_ERROR)
        except OSError as e:
            logging.error(f"I/O error: {e}")
            raise typer.Exit(ExitCode.IO_ERROR)
        except (KeyError, ValueError) as e:
            logging.error(f"Configuration error: {e}")
            raise typer.Exit(ExitCode.CONFIG_ERROR)
    return wrapper


def _loader(config_file: Path, **overrides) -> ConfigLoader:
    if config_file != Path("config.yaml") and not config_file.exists():
        raise KeyError(f"Config file not found: {config_file}")
    return ConfigLoader(config_file=str(config_file), overrides=overrides)


@app.command("cxi-verify")
@exit_codes
def cxi_verify(
    config_file: ConfigOption = Path("config.yaml"),
    out: OutOption = None,
    seed: SeedOption = None,
    trials: Annotated[Optional[int], typer.Option("--trials", help="Random trials per family.")] = None,
    self_test: Annotated[bool, typer.Option("--self-test", help="Inject a corrupted POVM.")] = False,
):
    """Randomised check of C = chi - I for projective measurements and POVMs."""
    loader = _loader(
        config_file,
        **{"output.directory": out and str(out), "cxi_verify.seed": seed, "cxi_verify.trials": trials,
           "cxi_verify.self_test": self_test or None},
    )
    report = run_cxi_verify(loader.settings, loader.require_seed("cxi_verify"))
    check_cxi_report(report)


@app.command()
@exit_codes
def bloch(
    config_file: ConfigOption = Path("config.yaml"),
    out: OutOption = None,
    log_base: LogBaseOption = None,
):
    """Coherence landscapes and projective/USD comparison for qubit discrimination."""
    loader = _loader(config_file, **{"output.directory": out and str(out), "output.log_base": log_base})
    run_bloch(loader.settings)


@app.command("hg-coherence")
@exit_codes
def hg_coherence(
    config_file: ConfigOption = Path("config.yaml"),
    out: OutOption = None,
    log_base: LogBaseOption = None,
    modes: ModesOption = None,
):
    """Prior/posterior tables and coherence-vs-shift curves."""
    loader = _loader(
        config_file,
        **{"output.directory": out and str(out), "output.log_base": log_base, "hg.modes.n_modes": modes},
    )
    run_hg_coherence(loader.settings)


def _simulation_overrides(out, seed, modes, sequences, measurements) -> dict:
    return {
        "output.directory": out and str(out),
        "hg.simulation.seed": seed,
        "hg.modes.n_modes": modes,
        "hg.simulation.n_sequences": sequences,
        "hg.simulation.n_measurements": measurements,
    }


@app.command("hg-simulate")
@exit_codes
def hg_simulate(
    config_file: ConfigOption = Path("config.yaml"),
    out: OutOption = None,
    seed: SeedOption = None,
    modes: ModesOption = None,
    sequences: SequencesOption = None,
    measurements: MeasurementsOption = None,
):
    """AMSE curves of the configured shift strategies."""
    loader = _loader(config_file, **_simulation_overrides(out, seed, modes, sequences, measurements))
    run_hg_simulate(loader.settings, loader, loader.require_seed("hg.simulation"))


@app.command()
@exit_codes
def hg(
    config_file: ConfigOption = Path("config.yaml"),
    out: OutOption = None,
    log_base: LogBaseOption = None,
    seed: SeedOption = None,
    modes: ModesOption = None,
    sequences: SequencesOption = None,
    measurements: MeasurementsOption = None,
):
    """Coherence scan and simulation in one run."""
    overrides = _simulation_overrides(out, seed, modes, sequences, measurements)
    loader = _loader(config_file, **overrides, **{"output.log_base": log_base})
    run_hg(loader.settings, loader, loader.require_seed("hg.simulation"))


if __name__ == "__main__":
    app()
