#!/usr/bin/env python3
"""Configurable bad adapter; the first argument picks the failure mode."""
import json
import sys

mode = sys.argv[1] if len(sys.argv) > 1 else "ok"

if mode == "bad-handshake":
    print("this is not a handshake", flush=True)
    sys.exit(0)
if mode == "no-output":
    sys.exit(7)

print(json.dumps({"arity": 2, "transfer": "identity", "supports_g": False}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    rows = len(req["X"])
    if mode == "wrong-id":
        print(json.dumps({"id": req["id"] + 1, "values": [0.0] * rows}), flush=True)
    elif mode == "short-values":
        print(json.dumps({"id": req["id"], "values": [0.0] * (rows - 1)}), flush=True)
    elif mode == "non-numeric":
        print(json.dumps({"id": req["id"], "values": ["x"] * rows}), flush=True)
    elif mode == "crash":
        sys.exit(3)
    else:
        print(json.dumps({"id": req["id"], "values": [1.0] * rows}), flush=True)
