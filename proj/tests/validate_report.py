"""Validates `satd-sentinel scan --format json` output against the report schema."""
import json
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, schema_path, tree = sys.argv[1:4]
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    out = subprocess.run(
        [cli, "scan", tree, "--repo", "example/inventory", "--format", "json"],
        check=True, capture_output=True, text=True,
    ).stdout
    report = json.loads(out)
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print(f"{list(e.path)}: {e.message}")
    if errors:
        return 1

    # The schema must also reject a report with a finding that lost its references.
    broken = json.loads(out)
    broken["findings"][0]["refs"] = []
    if validator.is_valid(broken):
        print("schema accepted a finding without references")
        return 1
    print(f"ok: {len(report['findings'])} findings validated")
    return 0


if __name__ == "__main__":
    sys.exit(main())
