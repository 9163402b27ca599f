"""サービス層パッケージ"""
from . import (
    file_format,
    bound_service,
    density_service,
    cohomology_service,
    scan_service,
    divide_service,
)

__all__ = [
    "file_format",
    "bound_service",
    "density_service",
    "cohomology_service",
    "scan_service",
    "divide_service",
]
