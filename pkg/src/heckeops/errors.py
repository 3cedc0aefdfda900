"""Shared exception types.

BudgetError subclasses ValueError so call sites that guard enumeration sizes
with plain ValueError handling keep working; the CLI distinguishes it (exit 3)
from validation failures (exit 2).  TruncationError marks a coefficient
request that a finitely-supported oracle can neither answer nor prove zero.
"""


class BudgetError(ValueError):
    """An enumeration or search would exceed its configured size cap."""


class TruncationError(Exception):
    """A coefficient was requested outside an oracle's declared support."""
