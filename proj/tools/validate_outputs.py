#!/usr/bin/env python3
"""Validate momlab result files against the shipped schemas.

usage: validate_outputs.py SCHEMA_DIR OUT_DIR [command ...]

Every <command>-<id>.json is checked against schemas/<command>.schema.json,
every manifest line against manifest.schema.json, and every CSV must parse
with RFC 4180 quoting into rows of equal width. Listed commands must have
produced at least one result file.
"""
import csv
import io
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    schemas = pathlib.Path(sys.argv[1])
    out = pathlib.Path(sys.argv[2])
    expected = set(sys.argv[3:])
    errors = []
    seen = set()

    def check(doc, name, where):
        schema = json.loads((schemas / f"{name}.schema.json").read_text())
        try:
            jsonschema.validate(doc, schema)
        except jsonschema.ValidationError as e:
            errors.append(f"{where}: {e.message} at {list(e.absolute_path)}")

    for path in sorted(out.glob("*.json")):
        doc = json.loads(path.read_text())
        cmd = doc.get("command")
        if not cmd or not (schemas / f"{cmd}.schema.json").exists():
            errors.append(f"{path.name}: no schema for command {cmd!r}")
            continue
        seen.add(cmd)
        check(doc, cmd, path.name)

    manifests = out / "manifests.jsonl"
    if manifests.exists():
        for i, line in enumerate(manifests.read_text().splitlines(), 1):
            m = json.loads(line)
            check(m, "manifest", f"manifests.jsonl:{i}")
            for f in m.get("outputs", []):
                if not (out / f).exists():
                    errors.append(f"manifests.jsonl:{i}: missing output {f}")
    elif expected:
        errors.append("manifests.jsonl missing")

    for path in sorted(out.glob("*.csv")):
        text = path.read_bytes().decode()
        if text and not text.endswith("\r\n"):
            errors.append(f"{path.name}: records must end with CRLF")
        rows = list(csv.reader(io.StringIO(text, newline=""), strict=True))
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            errors.append(f"{path.name}: ragged rows {sorted(widths)}")

    for cmd in sorted(expected - seen):
        errors.append(f"no result file for {cmd}")

    for e in errors:
        print("FAIL", e)
    print(f"{'ok' if not errors else 'failed'}: {len(seen)} commands checked")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
