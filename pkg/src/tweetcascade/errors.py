"""Exception hierarchy.

Every error carries a stable class name; the CLI prints it verbatim so
callers can match on it.  ``exit_code`` maps each family onto the CLI's
exit-status contract.
"""

from __future__ import annotations


class PipelineError(Exception):
    exit_code = 3

    @property
    def name(self) -> str:
        return type(self).__name__


# --- ingestion -------------------------------------------------------------

class ParseError(PipelineError):
    pass


class MissingField(ParseError):
    def __init__(self, field: str):
        super().__init__(field)
        self.field = field


class BadTimestamp(ParseError):
    pass


class MalformedJson(ParseError):
    pass


# --- annotation ------------------------------------------------------------

class OutOfRange(PipelineError):
    pass


class EmptyBallotSet(PipelineError):
    pass


class NoParticipants(PipelineError):
    pass


class NoContestedVotes(PipelineError):
    pass


class BallotFormatError(PipelineError):
    pass


# --- text analysis ---------------------------------------------------------

class NoCjkContent(PipelineError):
    pass


class LanguageMismatch(PipelineError):
    pass


class DataFileError(PipelineError):
    """A shipped or user-supplied data file (lexicon, table, ...) is invalid."""


# --- classifier ------------------------------------------------------------

class NoData(PipelineError):
    pass


class SingleClassData(PipelineError):
    pass


class UnsupportedLanguage(PipelineError):
    pass


class MissingModel(PipelineError):
    exit_code = 4


class BundleFormatError(PipelineError):
    pass


# --- evaluation ------------------------------------------------------------

class LengthMismatch(PipelineError):
    pass


class UnknownLabel(PipelineError):
    pass


class EmptyMatrix(PipelineError):
    pass


class ClassTooSmall(PipelineError):
    pass


# --- aggregation -----------------------------------------------------------

class EmptyCorpus(PipelineError):
    pass


class UnknownClass(PipelineError):
    pass


# --- config ----------------------------------------------------------------

class ConfigError(PipelineError):
    exit_code = 2

    def __init__(self, key: str, detail: str = ""):
        super().__init__(f"{key}: {detail}" if detail else key)
        self.key = key


class MissingKey(ConfigError):
    pass


class InvalidKey(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class MissingArtifact(PipelineError):
    exit_code = 4
