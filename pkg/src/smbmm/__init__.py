"""Secure single and batch matrix multiplication over GF(q).

Straggler-tolerant coded computation with colluding-server privacy and,
for the batch protocol, user-side privacy through server-shared noise.
"""

from ._kernels import backend as kernel_backend
from .batch import (
    CommonRandomness,
    SmbmmParams,
    SmbmmResponse,
    SmbmmShare,
    cost_report_smbmm,
    decode_smbmm,
    encode_smbmm,
    gen_common_randomness,
    recovery_threshold_smbmm,
    server_compute_smbmm,
)
from .costs import CostReport
from .field import FieldConfig, Poly, SquareSystem
from .matrix import BlockMatrix, PartitionSpec, assemble, matmul_oracle, partition
from .rng import Stream
from .ssmm import (
    SsmmParams,
    SsmmResponse,
    SsmmShare,
    cost_report_ssmm,
    decode_ssmm,
    encode_ssmm,
    recovery_threshold_ssmm,
    server_compute_ssmm,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "FieldConfig",
    "Poly",
    "SquareSystem",
    "BlockMatrix",
    "PartitionSpec",
    "partition",
    "assemble",
    "matmul_oracle",
    "Stream",
    "CostReport",
    "SsmmParams",
    "SsmmShare",
    "SsmmResponse",
    "recovery_threshold_ssmm",
    "encode_ssmm",
    "server_compute_ssmm",
    "decode_ssmm",
    "cost_report_ssmm",
    "SmbmmParams",
    "SmbmmShare",
    "SmbmmResponse",
    "CommonRandomness",
    "recovery_threshold_smbmm",
    "encode_smbmm",
    "gen_common_randomness",
    "server_compute_smbmm",
    "decode_smbmm",
    "cost_report_smbmm",
]
