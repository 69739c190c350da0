#!/usr/bin/env python3
"""Validate experiment configs against docs/config.schema.json.

usage: check_configs.py SCHEMA SB_BINARY [CONFIG.json ...]
With no config files, every embedded preset is dumped through SB_BINARY and checked.
"""
import json
import subprocess
import sys

import jsonschema


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    schema_path, sb, files = argv[1], argv[2], argv[3:]
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    docs = []
    if files:
        for path in files:
            with open(path) as f:
                docs.append((path, json.load(f)))
    else:
        names = subprocess.run([sb, "preset", "list", "--plain"], check=True, capture_output=True, text=True).stdout
        for name in names.split():
            out = subprocess.run([sb, "preset", "dump", name], check=True, capture_output=True, text=True).stdout
            docs.append((name, json.loads(out)))

    failed = 0
    for label, doc in docs:
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        if errors:
            failed += 1
            for e in errors:
                print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
        else:
            print(f"ok   {label}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
