"""Load-independent benchmarking metrics for force/torque controllers."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .coupling import (LoadModel, coupled_response, destabilizing_gain_search, load_admittance,
                       mixed_stability_check, passive_load_sample, small_gain_check)
from .frd import FrequencyResponseData, frd_from_csv, frd_interp, frd_sample
from .grid import DEFAULT_GRID, FrequencyGrid
from .lti import (StateSpace, TransferFunction, h2_norm, hinf_norm, step_metrics, step_response,
                  tf_eval, tf_is_stable, tf_new, tf_poles, tf_to_ss)
from .metrics import (MetricReport, PiiResult, bandwidth, benchmark_report, lcs, lrt, mu_siso,
                      passivity_index, pii, transparency_residual)
from .sysid import FitConfig, fit_error, fit_rational

__version__ = "0.1.0"

FIXTURES = ("dob1-like", "dob2-like")


def fixture_path(name: str, part: str) -> Path:
    """Path of a shipped synthetic fixture model, e.g. ``fixture_path("dob1-like", "zt")``.

    The fixtures are illustrative shapes only, not identified hardware models.
    """
    if name not in FIXTURES or part not in ("zb", "zt"):
        raise ValueError(f"unknown fixture {name!r}/{part!r}")
    return Path(str(resources.files(__package__) / "data" / f"{name}_{part}.json"))
