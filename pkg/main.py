#!/usr/bin/env python3
"""
main.py - Entry point for hermite-nc that works in both development and bundled modes.
"""
import sys
from pathlib import Path

# Run from a checkout without installing the package
if __name__ == "__main__":
    # Directory holding this script and the hermite_nc package
    script_dir = Path(__file__).resolve().parent

    # Put it first on the path unless it is already there
    if str(script_dir) not in sys.path:
        sys.path.insert(0, str(script_dir))

    # Hand off to the CLI; its return value is the exit code
    try:
        from hermite_nc.cli import main

        sys.exit(main())
    except ImportError as e:
        print(f"Error importing hermite_nc modules: {e}")
        print("Make sure you're running from the project root and the requirements are installed.")
        # 1 is reserved for failed probes
        sys.exit(2)
