"""
main.py — Entry point for the SBTS simulator.

The simulator runs the Skill-Based Task Selection algorithm, an adaptive task
assigner over a probabilistic topic x difficulty knowledge matrix, against
simulated students and exports plot-ready results.

This module serves as the main entry point for the command-line application.

License: MIT
Version: 1.0.0
"""

import sys

from cli import VERSION, main as cli_main

__version__ = VERSION


def main():
    """Run the sbts-sim command line and exit with its status."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
