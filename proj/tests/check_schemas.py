"""Runs the command-line tool with --json and validates each line against the schemas in docs/."""

import json
import pathlib
import subprocess
import sys

import jsonschema

tool, docs = sys.argv[1], pathlib.Path(sys.argv[2])
moment = json.loads((docs / "moment_result.schema.json").read_text())
report = json.loads((docs / "estimator_report.schema.json").read_text())

cases = [
    (moment, ["moment", "(X* X)^4"]),
    (moment, ["moment", "X [piecewise{ [0,1/2]: t; (1/2,1]: 1 - t }] X*"]),
    (moment, ["trace", "((X* X)^2 - 2) X X*"]),
    (moment, ["diag", "(X* X)^4", "--t", "1/2"]),
    (moment, ["lambda", "{1,3|2,4}", "1", "1", "1"]),
    (moment, ["lambda", "{1,3|2,4}", "t", "1", "1", "--t", "1/3"]),
    (moment, ["lambda", "{1,3|2,4}", "1", "1", "1", "--tau", "t"]),
    (moment, ["gamma", "{1,3|2,4}", "t", "1", "t", "1"]),
    (moment, ["cumulant", "--n", "4", "--pattern", "2"]),
    (moment, ["cumulant", "--eps", "1*", "t"]),
    (report, ["--trials", "20", "mc", "--word", "(X* X)^2", "--N", "20"]),
    (report, ["--trials", "20", "mc", "--word", "X* [t] X", "--N", "20", "--t", "1/3"]),
    (report, ["--trials", "20", "mc", "--word", "X X", "--N", "20"]),
]

failures = 0
for schema, args in cases:
    proc = subprocess.run([tool, "--json", *args], capture_output=True, text=True)
    lines = [line for line in proc.stdout.splitlines() if line.strip()]
    if proc.returncode not in (0, 4) or not lines:
        print(f"FAIL {args}: exit {proc.returncode}, stderr {proc.stderr.strip()}")
        failures += 1
        continue
    for line in lines:
        try:
            jsonschema.validate(json.loads(line), schema)
        except (json.JSONDecodeError, jsonschema.ValidationError) as e:
            print(f"FAIL {args}: {e}")
            failures += 1
            break
    else:
        print(f"ok   {' '.join(args)}")

sys.exit(1 if failures else 0)
