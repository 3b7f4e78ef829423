"""Exception hierarchy.

Errors that stem from user-supplied input (files, flags, networks that fail
validation) derive from :class:`InputError`; the CLI maps those to exit
code 2 and anything else to exit code 1.
"""

from __future__ import annotations


class PnetError(Exception):
    """Base class for every error raised by this package."""


class InputError(PnetError):
    """Invalid user input: malformed files, bad networks, schema mismatches."""


class DomainMismatchError(PnetError, ValueError):
    pass


class ImpossibleEvidenceError(PnetError, ValueError):
    pass


class DegenerateDistributionError(PnetError, ValueError):
    pass


class StructureError(InputError, ValueError):
    pass


class CycleError(StructureError):
    def __init__(self, edge: tuple[str, str]):
        self.edge = edge
        super().__init__(f"cycle detected: edge {edge[0]} -> {edge[1]} lies on a cycle")


class OmegaCapExceeded(PnetError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"joint space has {size} configurations, above the enumeration cap of {cap} "
            "(raise it with PNET_OMEGA_CAP)"
        )


class SamplingOrderError(PnetError):
    pass


class SchemaMismatchError(InputError, ValueError):
    pass


class NetworkFormatError(InputError, ValueError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class DatasetFormatError(InputError, ValueError):
    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"row {row}, column {column!r}: {reason}")
