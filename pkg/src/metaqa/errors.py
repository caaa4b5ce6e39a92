"""Exception hierarchy.

Everything a user can cause (bad input files, bad flags) derives from
``MetaqaError`` and maps to exit code 1 in the CLI. ``InvariantViolation``
signals a bug and maps to exit code 2.
"""


class MetaqaError(Exception):
    pass


class CorpusError(MetaqaError):
    """Input corpus unreadable or too damaged to use."""


class ProfilingError(MetaqaError):
    pass


class TrainingError(MetaqaError):
    pass


class ArtifactError(MetaqaError):
    """Serialized artifact could not be parsed."""


class FormatVersionError(ArtifactError):
    def __init__(self, expected: str, found: object):
        super().__init__(f"unsupported format version: expected {expected!r}, found {found!r}")
        self.expected = expected
        self.found = found


class InvariantViolation(Exception):
    pass
