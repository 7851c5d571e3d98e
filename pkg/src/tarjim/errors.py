"""Exception hierarchy. Configuration/validation problems exit 1 at the CLI,
runtime failures exit 2."""

from __future__ import annotations


class TarjimError(Exception):
    """Base for all toolchain errors."""


class ConfigError(TarjimError):
    """Invalid configuration, template, or command usage."""


class CorpusError(TarjimError):
    """Problem reading or writing a corpus file."""


class MalformedRecordError(CorpusError):
    """A single record failed validation; carries the 1-based line number."""

    def __init__(self, line: int, reason: str, detail: str = ""):
        self.line = line
        self.reason = reason
        self.detail = detail
        msg = f"line {line}: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DuplicateIdError(CorpusError):
    """Duplicate record ids, reported after the stream is exhausted."""

    def __init__(self, duplicates: list[str]):
        self.duplicates = duplicates
        shown = ", ".join(duplicates[:5])
        more = f" (+{len(duplicates) - 5} more)" if len(duplicates) > 5 else ""
        super().__init__(f"duplicate ids: {shown}{more}")


class EndpointError(TarjimError):
    """Terminal failure talking to an inference or scoring endpoint."""


class ProtocolError(EndpointError):
    """Endpoint answered with a malformed or contract-violating payload."""
