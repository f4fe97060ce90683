"""Smoke test for the khinlab extension module.

Build and install first, e.g. `pip install ./crates/python --no-build-isolation`
or `maturin develop -m crates/python/Cargo.toml`.
"""

import math
import sys

import khinlab


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return bool(cond)


def main():
    results = []

    x = khinlab.Coefficients(["0.6", "0.8"])
    m = khinlab.exact_moment(x, 2.0)
    results.append(check(abs(m["absolute_moment"] - 1.0) < 1e-12, "E xi^2 = |x|_2^2"))
    results.append(check(len(x) == 2 and x.exact, "coefficients are exact decimals"))

    m = khinlab.exact_moment([1, 1], 1.0)
    results.append(check(m["norm"] == 1.0, "|r1 + r2|_1 = 1"))

    z = khinlab.prob_zero(["1", "1"])
    results.append(check(z["probability"]["ratio"] == "1/2", "P(r1 + r2 = 0) = 1/2"))

    t = khinlab.exact_tail(["1", "2", "3"], "2", strict=True)
    results.append(check(t["probability"]["ratio"] == "1/2", "P(|r1 + 2r2 + 3r3| > 2) = 1/2"))

    law = khinlab.exact_distribution(["1", "1"])
    results.append(check(sum(a["probability"]["value"] for a in law["atoms"]) == 1.0, "distribution sums to 1"))

    results.append(check(khinlab.haagerup_bq(2.0) == 1.0, "B_2 = 1"))
    results.append(check(abs(khinlab.haagerup_bq(4.0) - 3 ** 0.25) < 1e-12, "B_4 = 3^(1/4)"))
    results.append(check(abs(khinlab.euler_limit() - 2 * math.exp(-2 + 0.5772156649015329)) < 1e-15, "2e^(-2+gamma)"))
    results.append(check(abs(khinlab.zero_mass_bound() + khinlab.euler_limit() - 1.0) < 1e-15, "zero-mass bound"))

    w = khinlab.Weight.independent([("1", "0.8"), ("0", "0.2")])
    c = khinlab.extract_constants(w, 1.0, 4.0)
    results.append(check(abs(c["t"] - 30.0) < 1e-12, "worked weight gives t = 30"))
    results.append(check(w.nonzero_mass == (0.8, "4/5"), "P(w != 0) = 4/5"))
    w2 = khinlab.Weight.from_json(w.to_json())
    results.append(check(w2.to_json() == w.to_json(), "weight JSON round trip"))

    half = khinlab.Weight.sign_function(2, ["1", "0", "0", "1"])
    try:
        khinlab.extract_constants(half, 1.0, 4.0, mode="refined")
        results.append(check(False, "s = 1/2 rejected"))
    except khinlab.BelowThreshold as e:
        results.append(check("0.517916119693" in str(e), "s = 1/2 rejected"))

    try:
        khinlab.exact_moment(list(range(1, 31)), 2.0)
        results.append(check(False, "n = 30 refused"))
    except khinlab.DimensionTooLarge:
        results.append(check(True, "n = 30 refused"))

    a = khinlab.mc_moment(["0.6", "0.8", "-1.5"], 3.0, samples=20000, seed=5)
    b = khinlab.mc_moment(["0.6", "0.8", "-1.5"], 3.0, samples=20000, seed=5)
    exact = khinlab.exact_moment(["0.6", "0.8", "-1.5"], 3.0)["absolute_moment"]
    results.append(check(a == b, "Monte Carlo is reproducible"))
    results.append(check(abs(a["absolute_moment"] - exact) <= 5 * a["standard_error"], "Monte Carlo within 5 se"))

    for name in khinlab.suites():
        r = khinlab.run_suite(name, cases=20, seed=3)
        results.append(check(r["pass_count"] == r["case_count"] == 20, f"suite {name}"))

    demo = khinlab.counterexample_demo()
    results.append(check(demo["corrected"]["weighted_sum_vanishes"], "counterexample weighted sum vanishes"))

    print(f"{sum(results)}/{len(results)} checks passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
