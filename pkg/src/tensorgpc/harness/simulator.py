"""Line protocol for external black-box simulators.

The child process reads one point per line on stdin (``d`` comma-separated
decimals in raw parameter space, LF-terminated) and writes one decimal per
line on stdout, in the same order.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
from typing import Sequence

import numpy as np

from ..exceptions import ProtocolError, SimulatorError

logger = logging.getLogger(__name__)


def format_points(points) -> str:
    """Serialize points as CSV lines; ``repr`` keeps every float exact."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in points)


def parse_values(text: str, expected: int) -> np.ndarray:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    values = np.empty(expected)
    for i in range(expected):
        if i >= len(lines):
            raise ProtocolError(f"line {i + 1}: missing output (expected {expected} values)", line=i + 1)
        try:
            values[i] = float(lines[i].strip())
        except ValueError:
            raise ProtocolError(f"line {i + 1}: cannot parse {lines[i]!r} as a number", line=i + 1) from None
    if len(lines) > expected:
        raise ProtocolError(f"line {expected + 1}: unexpected extra output (expected {expected} values)",
                            line=expected + 1)
    return values


def external_simulator(command, points, timeout: float | None = 600.0) -> np.ndarray:
    """Run ``command`` once for a batch of points and return its outputs.

    Parameters
    ----------
    command : str or sequence of str
        Program to spawn; a string is split with :func:`shlex.split`.
    points : array_like of shape (N, d)
        Raw (unstandardized) parameter vectors.
    timeout : float, optional
        Seconds allowed for the whole batch; the child is killed afterwards.

    Raises
    ------
    SimulatorError
        Spawn failure, non-zero exit status or timeout.
    ProtocolError
        Missing, extra or unparsable output lines.
    """
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    try:
        proc = subprocess.run(argv, input=format_points(points), capture_output=True,
                              text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise SimulatorError(f"simulator timed out after {timeout} s") from exc
    except OSError as exc:
        raise SimulatorError(f"cannot start simulator {argv!r}: {exc}") from exc
    if proc.returncode != 0:
        raise SimulatorError(f"simulator exited with status {proc.returncode}: {proc.stderr.strip()[:500]}")
    return parse_values(proc.stdout, points.shape[0])


class ExternalSimulator:
    """Callable wrapper around :func:`external_simulator`."""

    def __init__(self, command: str | Sequence[str], timeout: float | None = 600.0):
        self.command = command
        self.timeout = timeout

    def __call__(self, points):
        logger.info("simulating %d points with %s", len(points), self.command)
        return external_simulator(self.command, points, self.timeout)
