"""Smoke test for the pyqualifit extension module.

Build and run:
    pip install --no-build-isolation crates/python
    python3 python/smoke_test.py
"""

import math

import pyqualifit as q


def main():
    c = q.Constraint("A<4 at time=1 confidence 0.98 tolerance 0.5")
    term = c.term({"A": 5.0})
    expected = -math.log(0.01 + 0.98 * q.gaussian_cdf(5.0, 0.5, 4.0))
    assert abs(term - expected) < 1e-12, (term, expected)
    assert c.normalized() == "A<4 at time=1 confidence 0.98 tolerance 0.5"

    gt = q.Constraint("A>B at time=5 pmin 0.01 pmax 0.98 tolerance 0.5")
    assert sorted(gt.observables) == ["A", "B"]
    assert abs(gt.probability({"A": 10.0, "B": 0.0}) - 0.98) < 1e-12

    try:
        q.parse_constraints("A<4 at time=1\nA<<4 at time=1")
    except ValueError as e:
        assert str(e).startswith("line 2, column 2"), e
    else:
        raise AssertionError("malformed statement accepted")

    p = q.ordinal_probabilities(0.03, 5.0, [85.0, 115.0], 100.0)
    assert abs(p[1] - 0.9375) < 1e-3 and len(p) == 3

    delays = q.delays(16, 64.0)
    statements, rows = q.generate("two-category", delays, seed=3)
    assert len(statements) == 16 and rows == []
    _, rows = q.generate("quantitative", delays, seed=3)
    assert len(rows) == 32

    problem = q.Problem("biphasic", delays, constraints="\n".join(statements))
    assert problem.parameter_names == ["A", "b", "tau_b", "d", "tau_d"]
    assert math.isfinite(problem.nll(q.ground_truth()))

    priors = [("loguniform", t / 10, t * 10) for t in q.ground_truth()]
    s = q.sample(problem, priors, temperatures=3, chains=2, steps=1500, seed=1)
    again = q.sample(problem, priors, temperatures=3, chains=2, steps=1500, seed=1, threads=1)
    assert len(s) == 2 * 1200
    assert s.to_csv() == again.to_csv()
    for name, mean, median, lo, hi in s.summary(log10=True):
        assert lo <= median <= hi, name
    print("smoke test ok:", len(s), "samples,", "acceptance", [round(a, 2) for a in s.acceptance])


if __name__ == "__main__":
    main()
