#!/usr/bin/env python3
"""Print the explicit-Euler convergence tables for y'=-y and y'=y on [0,5].

Reproduces the classic benchmark layout: numerical endpoint, absolute and
relative errors, observed orders, and the analytic error-bound columns.
"""
import sys

from odekit import get_problem
from odekit.cli import run_study_report, study_ascii

H_LIST = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625]


def main() -> int:
    for key in ("decay", "growth"):
        problem = get_problem(key)
        report = run_study_report(problem, "euler", H_LIST)
        print(f"== explicit Euler on {key} ==")
        print(study_ascii(report, problem))
    return 0


if __name__ == "__main__":
    sys.exit(main())
