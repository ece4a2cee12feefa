"""Categorical layer over parsed records: outcome, resource class,
status label and browser family."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from http import HTTPStatus
from typing import Iterable

from .errors import DomainError


class Outcome(str, enum.Enum):
    SUCCESSFUL = "successful"
    INCOMPLETE = "incomplete"


class RequestClass(str, enum.Enum):
    PAGE_VIEW = "page_view"
    IMAGE_VIEW = "image_view"
    FILE_DOWNLOAD = "file_download"
    OTHER_ASSET = "other_asset"


DEFAULT_PAGE_EXTENSIONS = frozenset({"html", "htm", "php", "asp", "jsp"})
DEFAULT_IMAGE_EXTENSIONS = frozenset({"gif", "jpg", "jpeg", "png", "bmp", "ico"})
DEFAULT_DOWNLOAD_EXTENSIONS = frozenset({"pdf", "zip", "doc", "ppt", "xls", "rar", "exe"})


def parse_extensions(text: str | Iterable[str]) -> frozenset[str]:
    """Normalize ``"HTML, .htm"`` or an iterable of tokens to ``{"html", "htm"}``."""
    tokens = text.split(",") if isinstance(text, str) else text
    return frozenset(t.strip().lstrip(".").lower() for t in tokens if t.strip().lstrip("."))


@dataclass(frozen=True)
class ClassifierConfig:
    page_extensions: frozenset[str] = DEFAULT_PAGE_EXTENSIONS
    image_extensions: frozenset[str] = DEFAULT_IMAGE_EXTENSIONS
    download_extensions: frozenset[str] = DEFAULT_DOWNLOAD_EXTENSIONS

    def __post_init__(self):
        for name in ("page_extensions", "image_extensions", "download_extensions"):
            object.__setattr__(self, name, parse_extensions(getattr(self, name)))
        pairs = [
            ("page", self.page_extensions, "image", self.image_extensions),
            ("page", self.page_extensions, "download", self.download_extensions),
            ("image", self.image_extensions, "download", self.download_extensions),
        ]
        for a, sa, b, sb in pairs:
            shared = sa & sb
            if shared:
                raise DomainError(
                    f"{a} and {b} extension lists overlap: {', '.join(sorted(shared))}")


DEFAULT_CONFIG = ClassifierConfig()


def is_successful(status: int) -> bool:
    return 200 <= status <= 299


def classify_status(status: int) -> Outcome:
    if not 100 <= status <= 599:
        raise DomainError(f"status {status} outside 100..599")
    return Outcome.SUCCESSFUL if is_successful(status) else Outcome.INCOMPLETE


def status_label(status: int) -> str:
    if status == 404:
        return "REQUEST NOT FOUND"
    try:
        return HTTPStatus(status).phrase.upper()
    except ValueError:
        return f"STATUS {status}"


def _extension(url: str) -> tuple[str, bool]:
    path = url.split("?", 1)[0].split("#", 1)[0]
    if "://" in path:
        rest = path.split("://", 1)[1]
        path = rest[rest.find("/"):] if "/" in rest else ""
    if not path or path.endswith("/"):
        return "", True
    segment = path.rsplit("/", 1)[-1]
    if "." not in segment:
        return "", False
    return segment.rsplit(".", 1)[1].lower(), False


def classify_resource(url: str, config: ClassifierConfig = DEFAULT_CONFIG) -> RequestClass:
    """Classify a request target by the extension of its last path segment.

    Directory-style targets (ending in ``/``) count as page views.
    """
    ext, is_directory = _extension(url)
    if is_directory or ext in config.page_extensions:
        return RequestClass.PAGE_VIEW
    if ext in config.image_extensions:
        return RequestClass.IMAGE_VIEW
    if ext in config.download_extensions:
        return RequestClass.FILE_DOWNLOAD
    return RequestClass.OTHER_ASSET


def browser_family(user_agent: str | None) -> str:
    """First user-agent token, version included (``"Mozilla/4.0"``)."""
    if not user_agent:
        return "unknown"
    tokens = user_agent.split()
    return tokens[0] if tokens else "unknown"
