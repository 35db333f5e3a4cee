#!/usr/bin/env python3
"""Run the acceptance suite and write out/report.csv.

Usage: python scripts/run_verify.py [--config configs/default.ini] [--out out] [--seed N]
"""
import sys

from transmission_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", *sys.argv[1:]]))
