"""
Output handling for file, clipboard, and stdout, plus the stderr summary.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

try:
    import pyperclip

    PYPERCLIP_AVAILABLE = True
except ImportError:
    PYPERCLIP_AVAILABLE = False

logger = logging.getLogger(__name__)

_STATUS_MARKS = {"pass": "✓", "fail": "✗", "skipped": "-", "partial": "~"}


def handle_output(
    content: str,
    output_file: Optional[Path] = None,
    to_clipboard: bool = False,
    to_stdout: bool = False,
    label: str = "Report",
) -> None:
    """
    Handle output to file, clipboard, and/or stdout.

    Args:
        content: Canonical text or JSON document
        output_file: Destination file, parents are created
        to_clipboard: Copy to the clipboard (needs pyperclip)
        to_stdout: Print to stdout; the default when nothing else is chosen
        label: Name used in the status lines
    """
    if not output_file and not to_clipboard and not to_stdout:
        to_stdout = True

    if output_file:
        try:
            output_file.parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, "w", encoding="utf-8") as f:
                f.write(content)
            print(f"✓ {label} written to: {output_file}", file=sys.stderr)
        except (IOError, OSError) as e:
            print(f"✗ Error writing to file {output_file}: {e}", file=sys.stderr)
            sys.exit(1)

    if to_clipboard:
        if not PYPERCLIP_AVAILABLE:
            print(
                "✗ Error: pyperclip not available. Install with: pip install pyperclip",
                file=sys.stderr,
            )
            sys.exit(1)

        try:
            pyperclip.copy(content)
            print(f"✓ {label} copied to clipboard", file=sys.stderr)
        except Exception as e:
            print(f"✗ Error copying to clipboard: {e}", file=sys.stderr)
            sys.exit(1)

    if to_stdout:
        sys.stdout.write(content)


def format_summary(document: Mapping[str, Any], timings: Optional[Dict[str, float]] = None) -> str:
    """
    Human-readable table of check outcomes; timings only appear here.

    Args:
        document: Report document from the pipeline
        timings: Seconds per check name
    """
    timings = timings or {}
    checks = document.get("checks", [])
    width = max((len(c["name"]) for c in checks), default=10)
    lines = [f"{document.get('system', '?')}  p = {document.get('config', {}).get('prime', '?')}  N = {document.get('truncation', '?')}  torus {document.get('torus', '?')}"]
    for check in checks:
        mark = _STATUS_MARKS.get(check["status"], "?")
        seconds = timings.get(check["name"])
        elapsed = f"{seconds:7.2f}s" if seconds is not None else " " * 8
        note = check.get("witness", "")
        if check.get("gate") == "soft":
            note = f"(soft) {note}".strip()
        lines.append(f"{mark} {check['name']:<{width}} {check['status']:<8} {elapsed}  {note}".rstrip())
    verdict = document.get("verdict", 1)
    lines.append("✓ All enabled checks passed" if verdict == 0 else "✗ Some checks failed")
    return "\n".join(lines)


def print_summary(document: Mapping[str, Any], timings: Optional[Dict[str, float]] = None) -> None:
    print(format_summary(document, timings), file=sys.stderr)


def get_default_output_filename(system: str, prime: int, truncation: int) -> Path:
    """
    Default report filename for a run.

    Returns:
        Path such as qsteenrod_A2_p3_N6.json
    """
    return Path(f"qsteenrod_{system}_p{prime}_N{truncation}.json")
