"""Experiment runner.

Usage: fractal-proj-lab <experiment> [--config FILE] [--seed N] [--out DIR]
       [--<key> <value> ...]

Config files are flat `key=value` lines (# comments allowed); --key value
pairs on the command line override them. Unknown keys are rejected with the
offending key named. Each run writes summary.txt (one key=value per line)
plus the experiment's CSV, SVG and PNG artifacts into the output directory.

Exit codes: 0 experiment passed, 2 experiment ran but its verdict failed,
1 configuration or runtime error. The thread cap for pair sums is read from
the FRACTAL_PROJ_LAB_THREADS environment variable.
"""

from __future__ import annotations

import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import EXPERIMENTS, REQUIRED, _fmt


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    out_dir: Path = field(default_factory=lambda: Path("."))
    figures: bool = True

    @classmethod
    def build(cls, experiment: str, raw: dict, seed: int, out_dir, figures: bool = True) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment `{experiment}`; have {sorted(EXPERIMENTS)}")
        _, schema = EXPERIMENTS[experiment]
        params = {}
        for key, value in raw.items():
            if key not in schema:
                raise ConfigError(f"unknown key `{key}` for experiment {experiment}")
            parse, _ = schema[key]
            try:
                params[key] = parse(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for key `{key}`: {exc}") from exc
        for key, (parse, default) in schema.items():
            if key in params:
                continue
            if default is REQUIRED:
                raise ConfigError(f"missing required key `{key}` for experiment {experiment}")
            params[key] = default if not isinstance(default, str) else parse(default)
        return cls(experiment, params, seed, Path(out_dir), figures)


def parse_config_file(path: str | Path) -> dict:
    raw = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got `{line}`")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def run(config: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit code."""
    runner, _ = EXPERIMENTS[config.experiment]
    config.out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    outcome = runner(config.params, config.out_dir, config.seed, config.figures)
    lines = [f"experiment={config.experiment}", f"seed={config.seed}"]
    for key, value in config.params.items():
        lines.append(f"param_{key}={_fmt(value)}")
    for key, value in outcome.summary.items():
        lines.append(f"{key}={_fmt(value)}")
    lines.append(f"elapsed_seconds={time.time() - t0:.1f}")
    lines.append(f"pass={'true' if outcome.passed else 'false'}")
    (config.out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf8")
    print("\n".join(lines))
    return 0 if outcome.passed else 2


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__)
        print("experiments:", ", ".join(sorted(EXPERIMENTS)))
        return 0 if argv else 1
    experiment = argv[0]
    raw: dict = {}
    seed = 0
    out_dir = "runs/" + experiment
    figures = True
    config_path = None
    i = 1
    try:
        while i < len(argv):
            arg = argv[i]
            if not arg.startswith("--"):
                raise ConfigError(f"unexpected argument `{arg}`")
            key = arg[2:]
            if key == "no-figures":
                figures = False
                i += 1
                continue
            if i + 1 >= len(argv):
                raise ConfigError(f"flag --{key} needs a value")
            value = argv[i + 1]
            i += 2
            if key == "config":
                config_path = value
            elif key == "seed":
                seed = int(value)
            elif key == "out":
                out_dir = value
            else:
                raw[key] = value
        if config_path is not None:
            file_raw = parse_config_file(config_path)
            file_raw.update(raw)
            raw = file_raw
        config = ExperimentConfig.build(experiment, raw, seed, out_dir, figures)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(config)
    except Exception as exc:  # noqa: BLE001 - runner boundary
        print(f"error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
