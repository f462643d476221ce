#!/usr/bin/env python3
"""Run every measurement experiment at reference settings and compare.

Writes one report JSON per experiment into --outdir and prints a summary
table with total-variation distances against the ideal counts and against
each device dataset that ships with the package.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from qmcmc.errors import SchemaError
from qmcmc.experiments import ExperimentSpec, compare, run
from qmcmc.references import experiment_reference

RUNS = [
    ExperimentSpec("lcu-state-prep", shots=10_000),
    ExperimentSpec("lcu-qae", shots=1000),
    ExperimentSpec("szegedy-state-prep", shots=10_000),
    ExperimentSpec("cswap-state-prep", shots=10_000),
    ExperimentSpec("dual-eigenstate", shots=10_000),
    ExperimentSpec("dual-overlap", shots=1000),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("reports"))
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    header = f"{'experiment':22} {'successes':>9} {'tvd(expected)':>13}  device tvds"
    print(header)
    print("-" * len(header))
    for base in RUNS:
        spec = ExperimentSpec(
            base.name, delta=base.delta, shots=base.shots, seed=args.seed, t=base.t
        )
        report = run(spec)
        (args.outdir / f"{spec.name}.json").write_text(report.to_json())
        expected_tvd = compare(report, "expected")["tvd"]
        device_cells = []
        for device in experiment_reference(spec.name).get("devices", {}):
            try:
                device_cells.append(f"{device}={compare(report, device)['tvd']:.3f}")
            except SchemaError:
                continue
        successes = "-" if report.success_count is None else str(report.success_count)
        print(
            f"{spec.name:22} {successes:>9} {expected_tvd:>13.4f}  "
            + " ".join(device_cells)
        )
    print(f"\nreports written to {args.outdir}/")


if __name__ == "__main__":
    main()
