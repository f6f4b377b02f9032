"""Injected I/O capabilities: HTTP fetching and external process execution.

Modules that talk to the outside world take one of these as a parameter so
tests can substitute canned responses and nothing performs ambient I/O.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from typing import Mapping, Protocol

from .errors import ToolMissingError, TransportError


@dataclass
class HttpResponse:
    status: int
    body: str
    url: str = ""

    def json(self):
        return json.loads(self.body)


class HttpFetcher(Protocol):
    def get(self, url: str, params: Mapping[str, object] | None = None) -> HttpResponse: ...


class RequestsFetcher:
    """Default fetcher backed by the requests library."""

    def __init__(self, timeout: float = 60.0):
        self.timeout = timeout

    def get(self, url: str, params: Mapping[str, object] | None = None) -> HttpResponse:
        import requests

        try:
            resp = requests.get(url, params=params, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {url} failed: {exc}") from exc
        return HttpResponse(status=resp.status_code, body=resp.text, url=resp.url)


@dataclass
class ProcessResult:
    returncode: int
    stdout: str = ""
    stderr: str = ""


class ProcessRunner(Protocol):
    def run(self, args: list[str]) -> ProcessResult: ...


@dataclass
class SubprocessRunner:
    """Default runner; raises ToolMissingError when the executable is absent."""

    timeout: float | None = None
    extra_env: dict[str, str] = field(default_factory=dict)

    def run(self, args: list[str]) -> ProcessResult:
        import os

        env = None
        if self.extra_env:
            env = dict(os.environ, **self.extra_env)
        try:
            completed = subprocess.run(
                args,
                capture_output=True,
                text=True,
                timeout=self.timeout,
                env=env,
            )
        except FileNotFoundError as exc:
            raise ToolMissingError(f"executable {args[0]!r} not found") from exc
        return ProcessResult(completed.returncode, completed.stdout, completed.stderr)
