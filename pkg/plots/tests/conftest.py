"""Fixtures that produce real CSVs by invoking the simulator CLI.

The plotting package treats the simulator as an external tool, so these
fixtures shell out to it rather than importing it.
"""

import subprocess
import sys

import pytest

CLI = (sys.executable, "-m", "ldp_hist.cli")


def run_cli(*args: str) -> subprocess.CompletedProcess:
    result = subprocess.run([*CLI, *args], capture_output=True, text=True)
    assert result.returncode == 0, f"CLI failed: {result.stderr}"
    return result


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("plot_inputs")


@pytest.fixture(scope="session")
def single_eps_runs(csv_dir):
    """Two run CSVs at the same budget, one protocol each."""
    paths = []
    for protocol in ("krr", "rappor"):
        out = csv_dir / f"single_{protocol}.csv"
        run_cli(
            "simulate",
            "--protocol", protocol,
            "--eps", "2",
            "--k", "8",
            "--n", "40",
            "--dist", "uniform",
            "--repeats", "25",
            "--seed", "1",
            "--out", str(out),
        )
        paths.append(out)
    return paths


@pytest.fixture(scope="session")
def single_eps_bounds(csv_dir):
    """Curve table with a single row per curve, at the runs' budget."""
    out = csv_dir / "bounds_single.csv"
    run_cli(
        "bounds",
        "--curve", "rappor_subgaussian",
        "--curve", "rappor_local_gc",
        "--curve", "lower",
        "--eps-grid", "2:2:1",
        "--k", "8",
        "--n", "40",
        "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def sweep_runs(csv_dir):
    """Run CSVs covering three budgets for two protocols."""
    paths = []
    for protocol in ("krr", "rappor"):
        for eps in ("1", "2", "4"):
            out = csv_dir / f"sweep_{protocol}_{eps}.csv"
            run_cli(
                "simulate",
                "--protocol", protocol,
                "--eps", eps,
                "--k", "8",
                "--n", "30",
                "--dist", "uniform",
                "--repeats", "15",
                "--seed", "3",
                "--out", str(out),
            )
            paths.append(out)
    return paths


@pytest.fixture(scope="session")
def sweep_bounds(csv_dir):
    """Curve table on a seven-point grid spanning the sweep."""
    out = csv_dir / "bounds_sweep.csv"
    run_cli(
        "bounds",
        "--curve", "rappor_subgaussian",
        "--curve", "lower",
        "--eps-grid", "1:4:7",
        "--k", "8",
        "--n", "30",
        "--out", str(out),
    )
    return out
