"""Run every check on the built-in systems and print the non-passing ones."""

import argparse
import time

from prolongation.catalog import BUILTIN_NAMES, load_system
from prolongation.checks import run_checks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--checks", default="all")
    ap.add_argument("--json", help="write the combined report here")
    args = ap.parse_args()

    reports = {}
    for name in BUILTIN_NAMES:
        t0 = time.perf_counter()
        reports[name] = rep = run_checks(load_system(name), args.checks)
        s = rep.summary
        print(f"{name:<5} {s['total']:>3} checks  {s['pass']:>3} pass  {s['discrepancy']} discrepancy  "
              f"{s['fail']} fail  ({time.perf_counter() - t0:.2f}s)")
        for r in rep.results:
            if r.status != "pass":
                print(f"      {r.status:<11} {r.check}  [{r.source}]")

    if args.json:
        from prolongation.report import Report
        combined = Report(list(reports)).stamp()
        for rep in reports.values():
            combined.results.extend(rep.results)
        with open(args.json, "w") as fh:
            fh.write(combined.to_json(timings=True))


if __name__ == "__main__":
    main()
