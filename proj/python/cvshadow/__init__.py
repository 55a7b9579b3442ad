"""Classical-shadow tomography of bosonic modes."""

import json as _json

from ._core import (
    ParseError,
    homodyne_T,
    homodyne_estimate,
    infinity_norm,
    lemma1_T,
    multimode_T,
    pnr_T,
    pnr_estimate,
    project,
    simulate_homodyne,
    simulate_pnr,
    trace_norm,
    wigner,
)
from . import _core

__all__ = [
    "ParseError",
    "homodyne_T",
    "homodyne_estimate",
    "infinity_norm",
    "lemma1_T",
    "multimode_T",
    "pnr_T",
    "pnr_estimate",
    "project",
    "reconstruct",
    "run_scaling",
    "simulate_homodyne",
    "simulate_pnr",
    "state",
    "trace_norm",
    "validate",
    "wigner",
]


def state(kind="vacuum", min_cutoff=1, **fields):
    """Density matrix of a named state, e.g. state("cat", alpha_re=1.0)."""
    return _core.state_matrix(_json.dumps({"kind": kind, **fields}), min_cutoff)


def run_scaling(config):
    """Minimum-T search over config["N_list"]; returns the report as a dict."""
    return _json.loads(_core._run_scaling(_json.dumps(config)))


def reconstruct(records, N, protocol="homodyne", r=0.0, alpha_max=0.0):
    """Estimate from a record file. Returns (matrix, report dict)."""
    matrix, report = _core._reconstruct(str(records), protocol, N, r, alpha_max)
    return matrix, _json.loads(report)


def validate(full=False):
    return _core._validate(full)
