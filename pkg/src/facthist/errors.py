"""Exception types shared across the package.

Construction mistakes on plain values (bad table lengths, malformed vectors)
raise ValueError like any other Python library; the classes below cover the
domain-level failure modes that callers are expected to catch and that the
CLI maps onto exit codes.
"""

from __future__ import annotations

__all__ = [
    "FacthistError",
    "InvalidOutcomeError",
    "InvalidRankError",
    "UnknownFactorError",
    "UnknownNameError",
    "SpaceMismatchError",
    "SpaceCapError",
    "InvariantViolationError",
    "DegenerateBlockError",
    "PreconditionError",
    "PerturbationError",
    "UnknownNodeError",
    "InvalidQueryError",
    "FormatError",
]


class FacthistError(Exception):
    """Base class for all package-specific errors."""


class InvalidOutcomeError(FacthistError):
    """An outcome tuple has the wrong arity or an out-of-range coordinate."""


class InvalidRankError(FacthistError):
    """An outcome rank is outside 0..outcome_count-1."""


class UnknownFactorError(FacthistError):
    """A factor index is outside the space's factor list."""


class UnknownNameError(FacthistError):
    """A variable or factor name does not resolve against a space file."""


class SpaceMismatchError(FacthistError):
    """A variable or block does not belong to the space it was used with."""


class SpaceCapError(FacthistError):
    """A size cap (outcome count or factor count) would be exceeded."""


class InvariantViolationError(FacthistError):
    """An internal structural invariant failed; indicates a bug, not bad input."""


class DegenerateBlockError(FacthistError):
    """A conditioning block has zero probability mass."""


class PreconditionError(FacthistError):
    """An operation's structural precondition does not hold for the inputs."""


class PerturbationError(FacthistError):
    """A perturbation vector is malformed (wrong length, not positive, bad sum)."""


class UnknownNodeError(FacthistError):
    """A node name does not occur in the DAG."""


class InvalidQueryError(FacthistError):
    """A separation query uses overlapping or otherwise ill-formed node sets."""


class FormatError(FacthistError):
    """A serialized document (space, distribution, DAG file) is malformed."""
