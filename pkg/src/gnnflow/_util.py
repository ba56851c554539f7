"""Shared helpers: error types, atomic file output, stable number formatting."""

import os
import tempfile


class GnnflowError(Exception):
    """Base class for all package-specific errors."""


class ParseError(GnnflowError):
    """Malformed textual input (edge lists, CSV rows, config files)."""


class FormatError(GnnflowError):
    """Unsupported or structurally invalid file format/version."""


class CoverageError(GnnflowError):
    """A dataset is missing required (graph, config) combinations."""


class SchemaError(GnnflowError):
    """Feature vector does not match the schema a model was trained on."""


class GenerationError(GnnflowError):
    """Synthetic graph generation could not satisfy its parameters."""


def fmt_num(x) -> str:
    """Format a number for CSV output.

    Integers print exactly; floats use repr (shortest round-trip form) so
    re-runs with identical seeds emit byte-identical files.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a CSV number")
    if isinstance(x, int):
        return str(x)
    f = float(x)
    if f != f:
        raise ValueError("refusing to serialize NaN")
    return repr(f)


def write_text_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename in one directory."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
