"""Exception types shared across the pipeline."""

from __future__ import annotations


class ScreenwrightError(Exception):
    """Base class for every error raised by this package."""


# --- media ---------------------------------------------------------------


class MissingFile(ScreenwrightError):
    pass


class UnreadableMedia(ScreenwrightError):
    pass


class DecoderFailure(ScreenwrightError):
    pass


class TimestampOutOfRange(ScreenwrightError):
    pass


class EmptyInput(ScreenwrightError):
    pass


# --- providers / perception ----------------------------------------------


class ProviderUnavailable(ScreenwrightError):
    pass


class ProviderRejected(ScreenwrightError):
    """Auth or quota rejection; retrying will not help."""


class ProviderMalformedOutput(ScreenwrightError):
    pass


class NoAudioTrack(ScreenwrightError):
    pass


class PartialFailure(ScreenwrightError):
    """Some items of a batched provider call failed after retries.

    Carries the successful subset so callers can degrade instead of aborting.
    """

    def __init__(self, captioned, ok_indices, failed_indices, causes=()):
        self.captioned = list(captioned)
        self.ok_indices = list(ok_indices)
        self.failed_indices = list(failed_indices)
        self.causes = list(causes)
        super().__init__(
            f"{len(failed_indices)} of {len(ok_indices) + len(failed_indices)} "
            f"items failed (failed indices: {self.failed_indices})"
        )


# --- segmentation ---------------------------------------------------------


class UnorderedInput(ScreenwrightError):
    pass


# --- screenplay -----------------------------------------------------------


class InconsistentInputs(ScreenwrightError):
    pass


class MalformedDocument(ScreenwrightError):
    pass


class UnsupportedVersion(ScreenwrightError):
    pass


# --- harness --------------------------------------------------------------


class MalformedManifest(ScreenwrightError):
    pass


class JudgeFailure(ScreenwrightError):
    pass


# --- config / templates ----------------------------------------------------


class ConfigError(ScreenwrightError):
    pass


class TemplateError(ScreenwrightError):
    pass
