"""
bundle.py
Locate the program's home so the default config is found both from a source
checkout and from a PyInstaller onefile build.

- Determine the "bundle root": where the binary (or main.py) lives.
- Provide DEFAULT_CONFIG_PATH pointing to an adjacent `hermite_nc.toml`.
"""

from __future__ import annotations
import sys
from pathlib import Path


def bundle_root() -> Path:
    """
    Return the directory that contains the program.
    - PyInstaller onefile: sys.executable points to the extracted binary; use parent.
    - Source run: the nearest parent holding main.py or hermite_nc.toml.
    """
    if getattr(sys, "_MEIPASS", None):
        return Path(sys.executable).resolve().parent

    current = Path(__file__).resolve()
    for parent in [current.parent.parent] + list(current.parents):
        if (parent / "main.py").exists() or (parent / "hermite_nc.toml").exists():
            return parent
    return current.parent.parent


BUNDLE_DIR: Path = bundle_root()
DEFAULT_CONFIG_PATH: str = str(BUNDLE_DIR / "hermite_nc.toml")
