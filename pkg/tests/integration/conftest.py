"""
Pytest configuration for integration tests.

The command line is driven in-process through kackit.cli.main with string
buffers standing in for stdin, stdout and stderr.
"""

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import pytest

from kackit.cli import main


@dataclass
class CLIResult:
    code: int
    stdout: str
    stderr: str

    def json(self) -> Any:
        return json.loads(self.stdout)


def pytest_collection_modifyitems(config, items):
    for item in items:
        item.add_marker(pytest.mark.integration)


@pytest.fixture
def run_cli() -> Callable[..., CLIResult]:
    """Run the CLI with argv and optional stdin text."""

    def _run(argv: Sequence[str], stdin: Optional[str] = None) -> CLIResult:
        out, err = io.StringIO(), io.StringIO()
        code = main(list(argv), stdin=io.StringIO(stdin or ""), stdout=out, stderr=err)
        return CLIResult(code, out.getvalue(), err.getvalue())

    return _run


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, Any], str]:
    """Write a JSON document under tmp_path and return its path."""

    def _write(name: str, data: Any) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write
