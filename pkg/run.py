#!/usr/bin/env python
"""
Main entry point for the Direction Set Toolkit.

This script runs the command-line interface.
"""

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
