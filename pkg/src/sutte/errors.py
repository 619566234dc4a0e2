"""Exception hierarchy.

Data problems derive from ``DataError`` (a ``ValueError``); transport
problems from ``FetchError``. The CLI maps the two families to distinct
exit codes.
"""


class SutteError(Exception):
    """Base class for every error raised by this package."""


class DataError(SutteError, ValueError):
    """Input data is malformed, inconsistent, or too short."""


class ParseError(DataError):
    """A CSV document could not be turned into a bar series."""


class EmptyWindowError(DataError):
    """A date window selected no bars."""


class InsufficientDataError(DataError):
    """Too few bars for the requested computation."""


class IntegrityError(DataError):
    """Inputs that must come from the same source do not line up."""


class FetchError(SutteError):
    """Retrieving a remote resource failed."""


class NetworkError(FetchError):
    """Connection-level failure (DNS, refused, reset)."""


class FetchTimeout(FetchError):
    """The remote end did not answer within the timeout."""


class HTTPStatusError(FetchError):
    """The server answered with a status other than 200."""

    def __init__(self, url: str, status: int, reason: str = ""):
        super().__init__(f"{url}: HTTP {status} {reason}".rstrip())
        self.url = url
        self.status = status


class NotFoundError(HTTPStatusError):
    """HTTP 404."""
