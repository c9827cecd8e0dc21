"""Lévy HJM term structures with rating migration and recovery schemes."""

from pathlib import Path

from ._lhc import (
    DomainError,
    H1InfeasibleError,
    LevyModel,
    ModelError,
    Scenario,
    ScenarioError,
    UnsupportedModeError,
    forward_equation,
    load_scenario,
    martingale_test,
    parse_scenario,
    path_residuals,
    run_cli,
)

__all__ = [
    "DomainError",
    "H1InfeasibleError",
    "LevyModel",
    "ModelError",
    "Scenario",
    "ScenarioError",
    "UnsupportedModeError",
    "forward_equation",
    "load_scenario",
    "martingale_test",
    "parse_scenario",
    "path_residuals",
    "run_cli",
    "verify",
]


def verify(scenario, out, paths=None, threads=0):
    """Runs `lhc verify` and returns (exit code, path of verify.json)."""
    args = ["verify", "--scenario", str(scenario), "--out", str(out), "--threads", str(threads)]
    if paths is not None:
        args += ["--paths", str(paths)]
    return run_cli(args), Path(out) / "verify.json"
