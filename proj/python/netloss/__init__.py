"""Event-triggered control over lossy, jammed channels.

Experiment arguments accept a preset reference ("preset:example1"), a path to
a JSON experiment file, a JSON string or a dict. Matrices accept nested
sequences, numpy arrays or scalars (as 1x1).
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Sequence

from . import _core
from ._core import InfeasibleDesign, IoError, NetlossError, ValidationError

__all__ = [
    "InfeasibleDesign",
    "IoError",
    "NetlossError",
    "ValidationError",
    "certify",
    "check_instability",
    "check_stability",
    "chernoff_phi",
    "design",
    "exact_tail",
    "gain_from_qm",
    "jamming_tail_bound",
    "preset",
    "presets",
    "psi_k",
    "run",
    "run_to_dir",
]


def _ref(spec: str | os.PathLike | Mapping[str, Any]) -> str:
    if isinstance(spec, Mapping):
        return json.dumps(spec)
    return os.fspath(spec)


def _rows(m) -> list[list[float]]:
    if hasattr(m, "tolist"):
        m = m.tolist()
    if isinstance(m, (int, float)):
        return [[float(m)]]
    rows = [list(r) if isinstance(r, Sequence) else [r] for r in m]
    return [[float(x) for x in r] for r in rows]


def presets() -> list[str]:
    return list(_core.preset_names())


def preset(name: str) -> dict:
    return json.loads(_core.preset_text(name))


def run(spec, seed: int | None = None, paths: int | None = None) -> dict:
    """Runs the Monte Carlo batch; returns the same content as result.json."""
    return json.loads(_core.run_json(_ref(spec), seed, paths))


def run_to_dir(spec, out_dir, fmt: str = "csv", seed: int | None = None, paths: int | None = None) -> None:
    _core.run_to_dir(_ref(spec), os.fspath(out_dir), fmt, seed, paths)


def certify(spec) -> dict:
    return json.loads(_core.certify_json(_ref(spec)))


def design(A, B, rho: float, delta: float = 0.01, beta_grid: Sequence[float] = ()) -> dict:
    return json.loads(_core.design_json(_rows(A), _rows(B), rho, delta, [float(b) for b in beta_grid]))


def check_stability(A, B, K, P, beta: float, phi: float, rho: float) -> dict:
    return _core.check_stability(_rows(A), _rows(B), _rows(K), _rows(P), beta, phi, rho)


def check_instability(A, B, K, P_hat, beta_hat: float, phi_hat: float, sigma: float) -> dict:
    return _core.check_instability(_rows(A), _rows(B), _rows(K), _rows(P_hat), beta_hat, phi_hat, sigma)


def gain_from_qm(Q, M):
    return _core.gain_from_qm(_rows(Q), _rows(M))


def chernoff_phi(rho: float, p_tilde: float, w_tilde: float = 1.0) -> float:
    return _core.chernoff_phi(rho, p_tilde, w_tilde)


def psi_k(rho: float, p_tilde: float, k: int, w_tilde: float = 1.0, sigma_tilde_k: float = 0.0) -> float:
    return _core.psi_k(rho, p_tilde, k, w_tilde, sigma_tilde_k)


def exact_tail(chain: Mapping[str, Any] | str, k: int, rho: float) -> float:
    """Exact P[L(k) > rho k] for a random-loss chain description (k <= 20)."""
    return _core.exact_tail(chain if isinstance(chain, str) else json.dumps(chain), k, rho)


def jamming_tail_bound(kappa: float, tau: float, rho_m: float, k: int) -> float:
    return _core.jamming_tail_bound(kappa, tau, rho_m, k)
