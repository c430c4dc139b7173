"""Smoke test for the pyfoldnet extension module.

Build and install first, e.g.

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyfoldnet-*.whl
"""

import json
import math
from fractions import Fraction

import pyfoldnet


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    params = pyfoldnet.SpaceParams(2, [1.0])
    rule = pyfoldnet.Rule(2, [0, 1], 1, [[1]])
    assert len(rule) == 2
    assert rule.points() == [[0.0], [0.5]]
    assert [Fraction(r[0]) for r in rule.points_exact(folded=True)] == [0, 1]

    assert close(pyfoldnet.criterion_b(rule, params), 0.375)
    value, bound = pyfoldnet.criterion_b_brute(rule, params, 14)
    assert abs(value - 0.375) <= max(bound, 1e-3)
    assert close(pyfoldnet.worst_case_error(rule, params), math.sqrt(1 / 120))
    assert close(pyfoldnet.chi_phi(2, [1], 2), -0.75)
    a1, a2, _ = pyfoldnet.theoretical_bound(2, 1, 1, params, 1.0)
    assert close(a1 + a2, 5.0)

    rule2, params2 = pyfoldnet.Rule.from_json(rule.to_json(params))
    assert rule2.q == rule.q and params2.gamma == params.gamma

    p2 = pyfoldnet.SpaceParams(2, [1.0, 0.25])
    built, trace = pyfoldnet.construct(2, 6, p2)
    assert built.n == 6 and built.s == 2
    assert close(pyfoldnet.criterion_b(built, p2), trace["B"][-1], 1e-10)
    e = pyfoldnet.worst_case_error(built, p2)
    assert e <= trace["B"][-1] <= trace["bound_lambda1"]
    naive, naive_trace = pyfoldnet.construct(2, 6, p2, mode="naive")
    assert naive.q == built.q

    try:
        pyfoldnet.Rule(4, [0, 1], 1, [[1]])
    except ValueError as err:
        assert "prime" in str(err)
    else:
        raise AssertionError("composite base accepted")

    print(json.dumps({"B": trace["B"][-1], "e": e, "q": built.q}))
    print("smoke test passed")


if __name__ == "__main__":
    main()
