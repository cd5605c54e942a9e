# SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
#
# SPDX-License-Identifier: Apache-2.0

"""Partial Tucker compression of 3-D convolution kernels."""

from ._core import (
    IoError,
    TuckerFactors,
    ValidationError,
    analyze,
    channel_l2_norms,
    conv3d_direct,
    conv3d_tucker,
    ev_grid,
    explained_variance,
    hooi_refine,
    hosvd_partial,
    prune_channels,
    read_container,
    reconstruct,
    run_cli,
    select_rank,
    write_container,
)

__version__ = "0.1.0"

__all__ = [
    "IoError",
    "TuckerFactors",
    "ValidationError",
    "analyze",
    "channel_l2_norms",
    "conv3d_direct",
    "conv3d_tucker",
    "ev_grid",
    "explained_variance",
    "hooi_refine",
    "hosvd_partial",
    "prune_channels",
    "read_container",
    "reconstruct",
    "run_cli",
    "select_rank",
    "write_container",
]
