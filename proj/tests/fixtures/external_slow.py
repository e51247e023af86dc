#!/usr/bin/env python3
"""Misbehaving external model: never answers EVAL."""
import sys
import time

for line in sys.stdin:
    if line.startswith("HELLO"):
        print("OK 1", flush=True)
    else:
        time.sleep(3600)
