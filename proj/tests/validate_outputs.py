"""Runs the CLI on the shipped configs and validates every JSON output and
config against docs/schemas; checks branch CSV headers and that generated_at
only appears under metadata."""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

BRANCH_HEADER = "s,lambda,sup_norm,l2_norm,gamma1,class,event"


def registry(schema_dir):
    reg = Registry()
    schemas = {}
    for p in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(p.read_text())
        schemas[p.name] = doc
        reg = reg.with_resource(doc["$id"], Resource.from_contents(doc))
    return reg, schemas


def validate(doc, name, reg, schemas):
    schema = schemas[name]
    jsonschema.Draft202012Validator(schema, registry=reg).validate(doc)


def timestamps_outside_metadata(doc, path=""):
    bad = []
    if isinstance(doc, dict):
        for k, v in doc.items():
            if k == "generated_at" and path != "/metadata":
                bad.append(path + "/" + k)
            bad += timestamps_outside_metadata(v, path + "/" + k)
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            bad += timestamps_outside_metadata(v, f"{path}[{i}]")
    return bad


def main():
    tool, src, work = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    reg, schemas = registry(src / "docs" / "schemas")
    failures = []

    for cfg in sorted((src / "configs").glob("*.json")):
        try:
            validate(json.loads(cfg.read_text()), "config.schema.json", reg, schemas)
        except jsonschema.ValidationError as e:
            failures.append(f"{cfg.name}: {e.message}")

    runs = [("constant.json", ["solve", "verify", "eigs"]),
            ("loop.json", ["solve", "branch", "loop", "eigs", "verify"])]
    by_file = {"solutions.json": "solutions.schema.json", "branch.json": "branch.schema.json",
               "loop_report.json": "loop_report.schema.json", "eigs.json": "eigs.schema.json",
               "verify_report.json": "verify_report.schema.json"}
    checked = 0
    for cfg, cmds in runs:
        for cmd in cmds:
            out = work / f"{pathlib.Path(cfg).stem}_{cmd}"
            rc = subprocess.run([str(tool), cmd, "--config", str(src / "configs" / cfg), "--out",
                                 str(out)], capture_output=True, text=True).returncode
            if rc != 0:
                failures.append(f"{cmd} {cfg}: exit {rc}")
                continue
            for f in sorted(out.glob("*.json")):
                schema = by_file.get(f.name, "branch.schema.json" if f.name.startswith("branch_") else None)
                if schema is None:
                    failures.append(f"{f}: no schema for this output")
                    continue
                doc = json.loads(f.read_text())
                try:
                    validate(doc, schema, reg, schemas)
                    checked += 1
                except jsonschema.ValidationError as e:
                    failures.append(f"{f.name} ({cmd} {cfg}): {e.message} at {list(e.absolute_path)}")
                for p in timestamps_outside_metadata(doc):
                    failures.append(f"{f.name}: timestamp outside metadata at {p}")
            for f in sorted(out.glob("branch*.csv")):
                if f.read_text().split("\n", 1)[0] != BRANCH_HEADER:
                    failures.append(f"{f.name}: wrong branch CSV header")

    # The schemas must reject a report with a missing or mistyped field.
    probe = json.loads((work / "constant_verify" / "verify_report.json").read_text())
    for mutate in (lambda d: d.pop("verdicts"), lambda d: d.__setitem__("all_pass", "yes")):
        broken = json.loads(json.dumps(probe))
        mutate(broken)
        try:
            validate(broken, "verify_report.schema.json", reg, schemas)
            failures.append("verify_report schema accepted a broken document")
        except jsonschema.ValidationError:
            pass

    for msg in failures:
        print("FAIL", msg)
    print(f"validated {checked} JSON outputs, {len(failures)} failure(s)")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
