# -*- coding: utf-8 -*-
"""Shared exception types."""


class HoacError(Exception):
    """Base class for codec errors."""


class FormatError(HoacError):
    """Unsupported or malformed stream/file format (bad magic, version,
    header contents, or unusable input files)."""


class CorruptStreamError(HoacError):
    """Checksum mismatch or undecodable payload inside a valid container.

    `frame_index` names the first affected frame when known.
    """

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class TruncatedStreamError(CorruptStreamError):
    """Stream ended in the middle of a record."""
