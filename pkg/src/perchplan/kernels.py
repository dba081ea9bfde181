"""Penalty-kernel backend selection.

The compiled Cython kernel is used when available; otherwise the
vectorized numpy implementation takes over.  Both honor the same contract
(see :func:`perchplan._kernels_np.accumulate_penalties`).
"""

from __future__ import annotations

import os
from functools import lru_cache

from ._kernels_np import accumulate_penalties as _accumulate_np

if os.environ.get("PERCHPLAN_NO_EXT"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

HAVE_COMPILED = _core is not None


def accumulate_penalties_np(
    coeffs, T_piece, kappa, plat_pos0, plat_vel, z_d, d_bar,
    limits, weights, smoothing, geometry,
):
    """Always run the pure-numpy kernel (used for cross-checks and benchmarks)."""
    return _accumulate_np(
        coeffs, T_piece, kappa, plat_pos0, plat_vel, z_d, d_bar,
        limits, weights, smoothing, geometry,
    )


@lru_cache(maxsize=32)
def _scalar_args(limits, weights, smoothing, geometry):
    """Flatten the frozen parameter dataclasses once per configuration."""
    return (
        float(limits.v_max),
        float(limits.omega_max),
        float(limits.tau_min),
        float(limits.tau_max),
        float(limits.z_min),
        float(weights.w_tau),
        float(weights.w_omega),
        float(weights.w_v),
        float(weights.w_g),
        float(weights.w_c),
        float(smoothing.mu),
        float(smoothing.eps),
        float(geometry.g_bar),
        float(geometry.l_bar),
        float(geometry.r_bar),
    )


if HAVE_COMPILED:

    def accumulate_penalties(
        coeffs, T_piece, kappa, plat_pos0, plat_vel, z_d, d_bar,
        limits, weights, smoothing, geometry,
    ):
        return _core.accumulate_penalties(
            coeffs,
            float(T_piece),
            int(kappa),
            plat_pos0,
            plat_vel,
            z_d,
            float(d_bar),
            *_scalar_args(limits, weights, smoothing, geometry),
        )

else:
    accumulate_penalties = accumulate_penalties_np
