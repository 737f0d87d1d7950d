#!/usr/bin/env python
"""QuickSync command-line utility."""
import sys


def main():
    """Run one simulator or analysis command."""
    try:
        from core.cli.main import main as run_command
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the simulator. Are numpy, scipy and cryptography "
            "installed and available on your PYTHONPATH environment variable? "
            "Did you forget to activate a virtual environment?"
        ) from exc
    sys.exit(run_command(sys.argv[1:]))


if __name__ == '__main__':
    main()
