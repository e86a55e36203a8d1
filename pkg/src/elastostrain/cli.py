"""
Command-line interface (CLI) for elastostrain.

To get a list of all commands:

```bash
elastostrain --help
```

A typical session simulates a frame pair, then estimates strain from it:

```bash
elastostrain simulate --out sim
elastostrain estimate --pre sim/pre.rff --post sim/post.rff --method adaptive --lateral-n 6 --out est
```

Exit codes: 0 success, 2 configuration error, 3 data error, 4 estimation failure.
"""
import logging
from pathlib import Path
from typing import Optional

import typer
from typer.main import get_command

from elastostrain.config import RunConfig, load_config
from elastostrain.errors import (
    ConfigurationError,
    DegenerateInputError,
    DegenerateROIError,
    DomainError,
    EstimationError,
    FrameMismatchError,
    RFFParseError,
)
from elastostrain.evaluation import run_compare, run_dump, run_estimate, run_simulate

logger = logging.getLogger(__name__)

EXIT_CONFIGURATION = 2
EXIT_DATA = 3
EXIT_ESTIMATION = 4

app = typer.Typer(no_args_is_help=True)

config_option = typer.Option(None, "--config", "-c", exists=True, dir_okay=False, help="YAML file of dotted keys")
out_option = typer.Option(None, "--out", "-o", help="Output directory (default: output.directory)")
method_option = typer.Option("adaptive", "--method", "-m", help="Estimator: gradient or adaptive")


@app.callback()
def main(
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="-v for info, -vv for debug logging"),
):
    """
    Simulate RF frame pairs and estimate axial strain with 1D or 1.5D estimators.
    """
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _fail(e: Exception, code: int):
    typer.echo(f"Error: {e}", err=True)
    raise typer.Exit(code=code)


def _run(action):
    """Run `action`, mapping errors onto exit codes."""
    try:
        return action()
    except ConfigurationError as e:
        _fail(e, EXIT_CONFIGURATION)
    except (RFFParseError, FrameMismatchError, DomainError, DegenerateROIError) as e:
        _fail(e, EXIT_DATA)
    except (EstimationError, DegenerateInputError) as e:
        _fail(e, EXIT_ESTIMATION)
    except OSError as e:
        _fail(e, EXIT_DATA)


def _config(path: Optional[Path]) -> RunConfig:
    return _run(lambda: load_config(path))


def _out(config: RunConfig, out: Optional[Path]) -> Path:
    return out if out is not None else config.output.directory


@app.command()
def simulate(
    config: Optional[Path] = config_option,
    out: Optional[Path] = out_option,
):
    """
    Simulate a pre/post-compression frame pair.

    Writes pre.rff, post.rff, B-mode images pre_bmode.pgm and post_bmode.pgm, ground_truth.csv
    and config.yaml.

    Example:
    -------
    ```bash
    elastostrain simulate --config sweep.yaml --out sim
    ```

    """
    run_config = _config(config)
    out_dir = _out(run_config, out)
    _run(lambda: run_simulate(run_config, out_dir))
    typer.echo(f"Simulation written to {out_dir}")


@app.command()
def estimate(
    pre: Path = typer.Option(..., "--pre", exists=True, dir_okay=False, help="Pre-compression RFF frame"),
    post: Path = typer.Option(..., "--post", exists=True, dir_okay=False, help="Post-compression RFF frame"),
    method: str = method_option,
    lateral_n: Optional[int] = typer.Option(
        None, "--lateral-n", "-n", help="Lateral search radius in lines; omit for 1D estimation"
    ),
    config: Optional[Path] = config_option,
    out: Optional[Path] = out_option,
):
    """
    Estimate a strain map from two RFF frames.

    Writes strain.csv, strain.pgm, bmode.pgm, shifts.csv, quality.csv and, when the configured
    ROIs fit the map, report.csv.

    Example:
    -------
    ```bash
    elastostrain estimate --pre sim/pre.rff --post sim/post.rff -m gradient -n 6 --out est
    ```

    """
    run_config = _config(config)
    out_dir = _out(run_config, out)
    result = _run(lambda: run_estimate(pre, post, _method(method), lateral_n, run_config, out_dir))
    typer.echo(f"{result.strain.method_tag} strain map written to {out_dir}")


@app.command()
def compare(
    config: Optional[Path] = config_option,
    out: Optional[Path] = out_option,
):
    """
    Sweep applied strain and compare 1D with 1.5D estimation.

    Writes snr_table.csv, per_line_corr.csv, corr_profiles.csv and config.yaml.

    Example:
    -------
    ```bash
    elastostrain compare --config sweep.yaml --out cmp
    ```

    """
    run_config = _config(config)
    out_dir = _out(run_config, out)
    _run(lambda: run_compare(run_config, out_dir))
    typer.echo(f"Comparison written to {out_dir}")


@app.command(name="dump-corr")
def dump_corr(
    pre: Path = typer.Option(..., "--pre", exists=True, dir_okay=False, help="Pre-compression RFF frame"),
    post: Path = typer.Option(..., "--post", exists=True, dir_okay=False, help="Post-compression RFF frame"),
    line: int = typer.Option(..., "--line", help="Pre-frame A-line index"),
    window: int = typer.Option(..., "--window", help="Window index along the line"),
    method: str = method_option,
    config: Optional[Path] = config_option,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV file (default: stdout)"),
):
    """
    Dump the correlation functions one window sees on every candidate post line.

    Example:
    -------
    ```bash
    elastostrain dump-corr --pre sim/pre.rff --post sim/post.rff --line 64 --window 30
    ```

    """
    run_config = _config(config)
    profile = _run(lambda: run_dump(pre, post, line, window, _method(method), run_config, out))
    if out is not None:
        typer.echo(f"Correlation profile written to {out}")
    else:
        typer.echo(profile.to_dataframe().to_csv(index=False, lineterminator="\n"), nl=False)


def _method(method: str):
    if method not in ("gradient", "adaptive"):
        _fail(ConfigurationError(f"unknown method {method!r}; use gradient or adaptive"), EXIT_CONFIGURATION)
    return method


# DO NOT REMOVE THIS LINE
# added this for mkdocstrings to work
# see https://github.com/bruce-szalwinski/mkdocs-typer/issues/18
click_app = get_command(app)
click_app.name = "elastostrain"

if __name__ == "__main__":
    app()
