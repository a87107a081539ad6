import json
import subprocess
import sys

import pytest

GAUSSIAN_INSTANCE = {
    "family": "gaussian",
    "mu": [0.1, 0.2, 0.23, 0.27, 0.32, 0.32, 0.34, 0.41, 0.43, 0.54, 0.55, 0.56, 0.67, 0.71, 0.79],
    "sigma2": [0.05, 0.34, 0.28, 0.09, 0.23, 0.72, 0.19, 0.14, 0.44, 0.53, 0.24, 0.36, 0.56, 0.49, 0.85],
    "rho": 1.0,
}
BERNOULLI_INSTANCE = {
    "family": "bernoulli",
    "p": GAUSSIAN_INSTANCE["mu"],
    "rho": 0.5,
}


def run_harness(command: str, config: dict, out_dir) -> str:
    """Drive the simulation harness through its CLI; returns summary.csv path."""
    config = dict(config, output_dir=str(out_dir))
    config_path = out_dir / "config.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path.write_text(json.dumps(config))
    subprocess.run(
        [sys.executable, "-m", "mvbandit.cli", command, "--config", str(config_path)],
        check=True,
        capture_output=True,
    )
    return str(out_dir / "summary.csv")


@pytest.fixture(scope="session")
def curves_csv(tmp_path_factory):
    """Regret-vs-round summary at rho in {1e-3, 1, 1000}, desk scale."""
    out = tmp_path_factory.mktemp("curves")
    config = {
        "instance": GAUSSIAN_INSTANCE,
        "policies": [{"policy": "mts"}, {"policy": "mvts"}, {"policy": "mv_lcb"}],
        "horizon": 500,
        "runs": 3,
        "base_seed": 7,
        "rho_grid": [1e-3, 1.0, 1000.0],
    }
    return run_harness("simulate", config, out)


@pytest.fixture(scope="session")
def gaussian_sweep_csv(tmp_path_factory):
    """13-point log-spaced rho sweep (combined TS vs the baseline)."""
    out = tmp_path_factory.mktemp("gauss_sweep")
    config = {
        "instance": GAUSSIAN_INSTANCE,
        "policies": [{"policy": "mvts"}, {"policy": "mv_lcb"}],
        "horizon": 200,
        "runs": 2,
        "base_seed": 7,
    }
    return run_harness("sweep-rho", config, out)


@pytest.fixture(scope="session")
def bernoulli_sweep_csv(tmp_path_factory):
    """9-point linear rho sweep for the Bernoulli family."""
    out = tmp_path_factory.mktemp("bern_sweep")
    config = {
        "instance": BERNOULLI_INSTANCE,
        "policies": [{"policy": "bmvts"}, {"policy": "mv_lcb"}],
        "horizon": 200,
        "runs": 2,
        "base_seed": 7,
    }
    return run_harness("sweep-rho", config, out)
