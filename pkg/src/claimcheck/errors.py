"""Exception hierarchy shared across the package.

Everything raised on bad data or bad files derives from ClaimCheckError so the
CLI can map library failures to a single exit code (2) while argparse usage
errors stay on exit code 1.
"""


class ClaimCheckError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(ClaimCheckError):
    """A file is missing a required column or field."""


class DataError(ClaimCheckError):
    """A row, record, or value violates the documented format."""


class RecipeError(ClaimCheckError):
    """A collection recipe is malformed or references unknown things."""


class ModelFormatError(ClaimCheckError):
    """A model file has the wrong magic, version, or checksum."""


class TranslationError(ClaimCheckError):
    """The translator failed on a post; carries the post id."""

    def __init__(self, post_id: str, message: str):
        super().__init__(f"translation failed for post {post_id!r}: {message}")
        self.post_id = post_id


class EvaluationError(ClaimCheckError):
    """Predictions and gold labels cannot be joined as required."""
