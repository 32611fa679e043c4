"""Frame-level audio-text alignment toolkit.

Thin Python layer over the native core. Numeric routines take NumPy arrays;
pipeline stages go through :func:`run`, which accepts the same arguments as
the ``framealign`` command and returns its JSON report as a dict.
"""

import json

from . import _core
from ._core import (
    FramealignError,
    clip_loss,
    cosine_matrix,
    energy_envelope,
    extract_event_segment,
    frame_labels,
    frame_loss,
    gradient_check,
    infonce_loss,
    psds,
    recall_at_k,
    softplus,
    zero_shot_accuracy,
)

__all__ = [
    "FramealignError",
    "clip_loss",
    "cosine_matrix",
    "energy_envelope",
    "extract_event_segment",
    "frame_labels",
    "frame_loss",
    "gradient_check",
    "infonce_loss",
    "psds",
    "recall_at_k",
    "run",
    "softplus",
    "zero_shot_accuracy",
]


def run(*args, check=True):
    """Run a CLI subcommand in-process, e.g. ``run("loss", "--fixture", "b1_s1")``.

    Returns the parsed JSON report. With ``check`` (the default) a nonzero
    exit raises FramealignError carrying the reported message.
    """
    code, out, err = _core.run([str(a) for a in args])
    report = json.loads(out) if out.strip() else {}
    if check and code != 0:
        message = report.get("error", {}).get("message") if isinstance(report.get("error"), dict) else None
        raise FramealignError(message or err.strip() or f"exit code {code}")
    report.setdefault("exit_code", code)
    return report
