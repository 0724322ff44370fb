"""Exception types shared across the toolkit."""


class DataError(Exception):
    """Invalid or inconsistent input data (CSV rows, binary payloads, trees)."""


class ParseError(DataError):
    """Malformed CoNLL-U input; message carries the offending line number."""


class TreeStructureError(DataError):
    """Head indices of a sentence do not form a valid dependency tree."""


class ConfigError(Exception):
    """Invalid run configuration (missing paths, out-of-range parameters)."""
