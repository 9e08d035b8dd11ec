"""Exception types shared across the toolkit.

Everything raised on bad data derives from :class:`AuditError`, so callers
(and the CLI) can distinguish data problems (exit 1) from usage problems.
Parse-time errors carry 1-based line numbers.
"""

from __future__ import annotations


class AuditError(Exception):
    """Base class for all data and domain errors raised by this package."""


class ParseError(AuditError):
    """Base class for row-level ingest errors; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedRow(ParseError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(line_no, reason)
        self.reason = reason


class RangeError(ParseError):
    """A numeric field fell outside its allowed domain."""

    def __init__(self, line_no: int, field: str, value: float):
        super().__init__(line_no, f"{field}={value!r} out of range")
        self.field = field
        self.value = value


class UnknownSplit(ParseError):
    def __init__(self, line_no: int, value: str):
        super().__init__(line_no, f"unknown split {value!r} (expected train or val)")
        self.value = value


class SoftmaxSumError(ParseError):
    def __init__(self, line_no: int, total: float):
        super().__init__(line_no, f"softmax probabilities sum to {total!r}, not 1")
        self.total = total


class DuplicateKey(ParseError):
    def __init__(self, line_no: int, key: object):
        super().__init__(line_no, f"duplicate key {key!r}")
        self.key = key


class DimensionalityMix(ParseError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(line_no, f"embedding width {got} in a {expected}-dim file")
        self.expected = expected
        self.got = got


# --- numerical kernel ---

class EmptyInput(AuditError):
    pass


class LengthMismatch(AuditError):
    pass


class DegenerateInput(AuditError):
    pass


class InsufficientSamples(AuditError):
    pass


# --- census ---

class UnknownClass(AuditError):
    def __init__(self, wordnet_id: str):
        super().__init__(f"class {wordnet_id} missing from the class-size manifest")
        self.wordnet_id = wordnet_id


class ZeroClassSize(AuditError):
    def __init__(self, wordnet_id: str):
        super().__init__(f"class {wordnet_id} has zero images")
        self.wordnet_id = wordnet_id


class ClassSetMismatch(AuditError):
    def __init__(self, only_left: set, only_right: set):
        super().__init__(
            f"class sets differ: {sorted(only_left)} only on one side, "
            f"{sorted(only_right)} only on the other"
        )
        self.only_left = only_left
        self.only_right = only_right


class KeyMismatch(AuditError):
    """Inputs that must share a class manifest do not; names the difference."""

    def __init__(self, missing: set, extra: set = frozenset()):
        parts = []
        if missing:
            parts.append(f"missing: {sorted(missing)}")
        if extra:
            parts.append(f"unexpected: {sorted(extra)}")
        super().__init__("; ".join(parts) or "key mismatch")
        self.missing = set(missing)
        self.extra = set(extra)


class EmptyClass(AuditError):
    pass


class EmptyGroup(AuditError):
    pass


# --- clustering ---

class TooFewPoints(AuditError):
    pass


class NoExemplars(AuditError):
    pass


class EmptyCluster(AuditError):
    pass


# --- projection ---

class InsufficientPoints(AuditError):
    pass


class DegenerateCovariance(AuditError):
    pass


# --- screening / watchlists ---

class DuplicateMapping(AuditError):
    def __init__(self, key: str):
        super().__init__(f"{key} mapped more than once")
        self.key = key


class DuplicateEntry(AuditError):
    def __init__(self, entry: str):
        super().__init__(f"duplicate watchlist entry {entry!r}")
        self.entry = entry


# --- survey ---

class EmptyShortlist(AuditError):
    pass


class UnknownItem(AuditError):
    def __init__(self, item_id: str):
        super().__init__(f"no such survey item: {item_id}")
        self.item_id = item_id


class ItemClosed(AuditError):
    def __init__(self, item_id: str, status: str):
        super().__init__(f"item {item_id} already closed ({status})")
        self.item_id = item_id
        self.status = status


# --- rendering ---

class MissingCensus(AuditError):
    pass


class EmptyData(AuditError):
    pass


class NonFiniteCoordinate(AuditError):
    pass
