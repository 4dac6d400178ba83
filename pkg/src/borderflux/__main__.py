#!/usr/bin/env python3
"""Command-line entry point for borderflux."""

from borderflux.main import cli

if __name__ == "__main__":
    cli()
