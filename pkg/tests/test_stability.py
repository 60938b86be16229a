import json

import numpy as np
import pytest

from ecoepi.equilibria import Existence, eq_all, eq_disease_free, eq_e4, eq_reduced
from ecoepi.model import ModelParams, jacobian_full
from ecoepi.polynomials import Poly
from ecoepi.stability import (UndefinedR0Error, Verdict, char_poly, classify, hurwitz,
                              hurwitz_cubic, hurwitz_quadratic, r0, spectrum_verdict,
                              trace_coefficient_e4)


def random_poly(rng, degree):
    if rng.random() < 0.5:
        return Poly((*rng.normal(size=degree), 1.0))
    # build from roots so that stable cases are well represented
    zs = []
    while len(zs) < degree:
        if degree - len(zs) >= 2 and rng.random() < 0.5:
            z = complex(rng.normal(-0.5, 1), rng.normal())
            zs += [z, z.conjugate()]
        else:
            zs.append(complex(rng.normal(-0.5, 1)))
    return Poly(tuple(np.real(np.poly(zs))[::-1]))


def random_params(rng):
    rates = {name: float(rng.uniform(0, 1.5)) for name in (
        "beta", "sigma", "phi", "theta", "p1", "p2", "p3", "m1", "m2", "m3", "d1", "d2", "d3", "d4", "c")}
    rates["c"] += 0.05
    return ModelParams(r=float(rng.uniform(0.5, 3)), k=float(rng.uniform(0.5, 5)),
                       q1=float(rng.uniform(0, 0.9)), q2=float(rng.uniform(0, 0.9)),
                       q3=float(rng.uniform(0, 0.9)), **rates)


def test_char_poly_matches_numpy(rng):
    for n in (1, 2, 3, 4):
        J = rng.normal(size=(n, n))
        np.testing.assert_allclose(char_poly(J).descending(), np.poly(J), atol=1e-12)


def test_char_poly_reference_cubics(p_base, p_case_i, p_case_ii):
    e2 = eq_reduced(p_base)[2]
    np.testing.assert_allclose(classify(p_base, e2).char_coeffs[::-1],
                               [1, 2.98129, 0.806172, 0.079073], atol=1e-5)
    for params, cubic in ((p_case_i, [1, 2.5526, 0.419829, 0.406969]),
                          (p_case_ii, [1, 2.65497, 0.344814, 0.151479])):
        report = classify(params, eq_e4(params)[0])
        np.testing.assert_allclose(report.block_coeffs[::-1], cubic, atol=1e-5)


def test_hurwitz_examples():
    assert hurwitz_cubic(2.98129, 0.806172, 0.079073).ledger["B1*B2"] == pytest.approx(2.40343, abs=1e-5)
    assert hurwitz_cubic(2.5526, 0.419829, 0.406969).verdict is Verdict.STABLE
    assert hurwitz_cubic(1, 1, 2).verdict is Verdict.UNSTABLE
    assert hurwitz_cubic(1, 1, 1).verdict is Verdict.MARGINAL
    assert hurwitz_quadratic(1.65, -0.985).verdict is Verdict.UNSTABLE


@pytest.mark.parametrize("degree", [2, 3, 4])
def test_hurwitz_agrees_with_roots(rng, degree):
    for _ in range(1000):
        p = random_poly(rng, degree)
        assert hurwitz(p).verdict is spectrum_verdict(np.roots(p.descending()))


def test_trivial_equilibrium(p_case_i, p_case_ii):
    report = classify(p_case_i, eq_all(p_case_i)[0])
    assert report.verdict is Verdict.UNSTABLE
    # E0 block quadratic A2 values
    assert report.hurwitz_conditions["A2"] == pytest.approx(-0.985)
    assert classify(p_case_ii, eq_all(p_case_ii)[0]).hurwitz_conditions["A2"] == pytest.approx(-0.51)


@pytest.mark.parametrize("fixture,lam", [("p_case_i", 2.29084), ("p_case_ii", 0.575253)])
def test_disease_free_infected_eigenvalue(request, fixture, lam):
    params = request.getfixturevalue(fixture)
    report = classify(params, eq_disease_free(params))
    assert report.factored_eigenvalues["lambda_I"] == pytest.approx(lam, abs=1e-5)
    assert report.verdict is Verdict.UNSTABLE


def test_reduced_predator_eigenvalue(p_base):
    report = classify(p_base, eq_reduced(p_base)[1])
    assert report.factored_eigenvalues["lambda_P"] == pytest.approx(0.110135, abs=1e-5)
    assert report.verdict is Verdict.UNSTABLE


def test_e2_infected_eigenvalue(p_case_i):
    report = classify(p_case_i, eq_all(p_case_i)[2])
    assert report.factored_eigenvalues["lambda_I"] == pytest.approx(1.89472, abs=1e-5)


@pytest.mark.parametrize("fixture,lam", [("p_case_i", -0.165429), ("p_case_ii", -0.181828)])
def test_e4_stable(request, fixture, lam):
    params = request.getfixturevalue(fixture)
    report = classify(params, eq_e4(params)[0])
    assert report.factored_eigenvalues["lambda_P"] == pytest.approx(lam, abs=1e-5)
    assert report.verdict is Verdict.STABLE


def test_every_existing_equilibrium_classifies_consistently(p_case_i, p_case_ii, p_base):
    for params in (p_case_i, p_case_ii, p_base, p_case_i.replace(p2=0.25, d4=0.1, q2=0.5)):
        for e in eq_all(params, include_reduced=True):
            if e.exists is Existence.EXISTS:
                report = classify(params, e)
                assert report.verdict is spectrum_verdict(report.eigenvalues)


def test_classify_refuses_missing_equilibrium(p_case_i):
    with pytest.raises(ValueError):
        classify(p_case_i, eq_all(p_case_i)[3])


def test_r0_values(p_case_i, p_case_ii):
    assert r0(p_case_i).value == pytest.approx(5.822817, abs=1e-4)
    assert r0(p_case_ii).value == pytest.approx(1.95876, abs=1e-4)
    assert r0(p_case_i).endemic


def test_r0_without_transmission_is_zero(p_case_i):
    assert r0(p_case_i.replace(beta=0.0, sigma=0.0)).value == 0


def test_r0_undefined_without_disease_free_state(p_case_i):
    with pytest.raises(UndefinedR0Error):
        r0(p_case_i.replace(r=0.1))
    with pytest.raises(UndefinedR0Error):
        r0(p_case_i.replace(c=0.0, d2=0.0, m2=0.0))


def test_infected_eigenvalue_identity(rng):
    checked = 0
    while checked < 100:
        params = random_params(rng)
        try:
            result = r0(params)
        except UndefinedR0Error:
            continue
        J = jacobian_full(params, (result.S1, 0, result.V1, 0))
        assert J[1, 1] == pytest.approx(params.infected_loss * (result.value - 1), abs=1e-10)
        checked += 1


def test_trace_coefficient_cross_check(p_case_i, p_case_ii):
    for params in (p_case_i, p_case_ii):
        e4 = eq_e4(params)[0]
        S4, I4, V4, _ = e4.point
        report = classify(params, e4)
        assert report.block_coeffs[2] == pytest.approx(trace_coefficient_e4(params, S4, I4, V4), abs=1e-8)


def test_report_is_serializable(p_case_i):
    data = classify(p_case_i, eq_e4(p_case_i)[0]).to_dict()
    assert json.loads(json.dumps(data))["verdict"] == "stable"
