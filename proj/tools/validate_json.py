#!/usr/bin/env python3
"""Check the CLI's JSON output and the bundled manifest against schemas/.

usage: validate_json.py <ceihorn binary> <repo root>
"""

import copy
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def load(path):
    with open(path) as f:
        return json.load(f)


def main():
    if len(sys.argv) != 3:
        print(__doc__.strip(), file=sys.stderr)
        return 3
    cli = sys.argv[1]
    root = pathlib.Path(sys.argv[2])
    schemas = {name: load(root / "schemas" / f"{name}.schema.json") for name in ("report", "manifest", "summary")}
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)
    validators = {name: jsonschema.Draft202012Validator(s) for name, s in schemas.items()}

    failures = []

    def check(kind, doc, label):
        errors = sorted(validators[kind].iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            failures.append(f"{label}: {'/'.join(map(str, e.path))}: {e.message}")
        return not errors

    manifest_path = root / "corpus" / "manifest.json"
    check("manifest", load(manifest_path), "manifest")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        inputs = [root / "corpus" / e["bytecode"] for e in load(manifest_path)["entries"]]
        (tmp / "malformed.hex").write_text("60zz\n")
        (tmp / "empty.hex").write_text("")
        inputs += [tmp / "malformed.hex", tmp / "empty.hex"]
        reports = []
        for src in inputs:
            out = tmp / (src.stem + ".json")
            rc = subprocess.run([cli, "analyze", str(src), "--json", str(out)], capture_output=True).returncode
            if not out.exists():
                failures.append(f"{src.name}: no report written (exit {rc})")
                continue
            doc = load(out)
            check("report", doc, src.name)
            expected = {"Safe": 0, "Vulnerable": 1, "Timeout": 2, "Unknown": 2, "Error": 3}[doc["verdict"]]
            if rc != expected:
                failures.append(f"{src.name}: exit {rc} for verdict {doc['verdict']}")
            reports.append(doc)

        summary = tmp / "summary.json"
        subprocess.run([cli, "corpus", str(manifest_path), "--workers", "2", "--json", str(summary)],
                       capture_output=True)
        if summary.exists():
            check("summary", load(summary), "summary")
        else:
            failures.append("corpus run wrote no summary")

    # The schemas must reject what the tool never emits.
    vulnerable = next((r for r in reports if r["verdict"] == "Vulnerable"), None)
    if vulnerable is None:
        failures.append("no vulnerable report to mutate")
    else:
        broken = []
        r = copy.deepcopy(vulnerable)
        del r["cfg_stats"]
        broken.append(("missing cfg_stats", r))
        r = copy.deepcopy(vulnerable)
        r["path"]["steps"][0]["event"] = "teleport"
        broken.append(("unknown event", r))
        r = copy.deepcopy(vulnerable)
        r["verdict"] = "Safe"
        broken.append(("safe verdict with path", r))
        r = copy.deepcopy(vulnerable)
        r["error"] = {"kind": "MalformedHex", "message": "x"}
        broken.append(("error on a vulnerable verdict", r))
        for what, doc in broken:
            if validators["report"].is_valid(doc):
                failures.append(f"report schema accepted: {what}")
    bad_manifest = {"entries": [{"name": "x", "bytecode": "x.hex", "label": "safe", "class": "cross-function"}]}
    if validators["manifest"].is_valid(bad_manifest):
        failures.append("manifest schema accepted a label contradicting its class")

    for f in failures:
        print("FAIL", f)
    print(f"{len(reports)} reports checked, {len(failures)} problems")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
