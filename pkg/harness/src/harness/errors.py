"""Error types shared across the harness."""


class HarnessError(RuntimeError):
    """A run could not proceed (bad split, missing tool, subprocess failure)."""


class DatasetUnavailable(HarnessError):
    """The requested dataset is not cached locally and cannot be synthesized."""
