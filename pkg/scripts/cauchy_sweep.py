#!/usr/bin/env python3
"""Tikhonov lambda sweep for the torso Cauchy problem (writes cauchy_sweep.csv)."""
import sys

from transmission_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["cauchy-sweep", *sys.argv[1:]]))
