"""Smoke test for the hjnet extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math
import pathlib
import sys

import hjnet

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    eik = hjnet.Problem.load(str(FIXTURES / "eikonal3.json"))
    r = hjnet.solve_imz(eik)
    assert r.converged and r.residual <= 1e-10
    assert all(close(v, 1.0, 1e-10) for j in range(eik.num_edges) for v in r.solution.edge_values(j))
    report = hjnet.verify(eik, r.solution)
    assert all(c["status"] != "fail" for c in report["checks"]), report["checks"]
    assert any(c["status"] == "fail" for c in hjnet.verify(eik, r.solution.shifted(1.0))["checks"])

    two = hjnet.Problem.load(str(FIXTURES / "two_star.json"))
    a = hjnet.solve_imz(two).solution
    b = hjnet.solve_acct(two, time_step=two.max_spacing).solution
    exact = 2.0 - math.exp(-1.0)
    assert close(a(1, 1.0), exact, 5e-3) and close(b(1, 1.0), exact, 5e-3)
    assert a.distance(b) <= 0.05

    csv = a.to_csv()
    assert hjnet.Solution.from_csv(two, csv).distance(a) == 0.0

    assert two.h_minus(0, two.p0(0) + 1.0) == two.hamiltonian(0, 0.0, two.p0(0))
    try:
        hjnet.solve_acct(eik)
    except ValueError as e:
        assert "control form required" in str(e)
    else:
        raise AssertionError("closed-form problem accepted by the control solver")

    print(f"hjnet smoke test ok: {eik!r}, gap {a.distance(b):.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
