"""Validate every scene file and a batch report against the schemas in docs/."""
import json
import pathlib
import subprocess
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
tool = sys.argv[2]
scene_schema = json.loads((root / "docs" / "scene.schema.json").read_text())
report_schema = json.loads((root / "docs" / "report.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(scene_schema)
jsonschema.Draft202012Validator.check_schema(report_schema)

failures = 0
scenes = sorted((root / "scenes").rglob("*.scene"))
for path in scenes:
    if path.parent.name == "invalid":
        continue
    try:
        jsonschema.validate(json.loads(path.read_text()), scene_schema)
    except jsonschema.ValidationError as e:
        print(f"{path}: {e.message}")
        failures += 1

reports = [[tool, "batch", str(root / "scenes" / "batch_all.scene")],
           [tool, "verify-lax", str(root / "scenes" / "negative" / "neg_verify_lax.scene")],
           [tool, "curvature", str(root / "scenes" / "invalid" / "unknown_key.scene")]]
for cmd in reports:
    out = subprocess.run(cmd, capture_output=True, text=True)
    try:
        jsonschema.validate(json.loads(out.stdout), report_schema)
    except (jsonschema.ValidationError, json.JSONDecodeError) as e:
        print(f"{' '.join(cmd[1:])}: {e}")
        failures += 1

print(f"{len(scenes)} scenes, {len(reports)} reports, {failures} failures")
sys.exit(1 if failures else 0)
