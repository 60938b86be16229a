"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import numpy as np
from conftest import ACCEPTANCE_LINES
from ecoepi.cli import cmd_sweep, main
from ecoepi.config import fixture_text, load_fixture
from ecoepi.equilibria import Existence, e2_cubic, e5_cubic, eq_all, eq_e4, eq_reduced
from ecoepi.integrate import IntegratorConfig, integrate, integrate_reduced
from ecoepi.model import (ModelParams, dulac_expression, jacobian_full, jacobian_reduced,
                          rhs_full, rhs_reduced)
from ecoepi.polynomials import Poly, roots
from ecoepi.stability import UndefinedR0Error, classify, hurwitz, r0, spectrum_verdict


class Gate:
    """Collects the individual checks of one criterion."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failures = []

    def check(self, name, ok, detail=""):
        if not ok:
            self.failures.append(f"{name} {detail}".strip())

    def near(self, name, got, want, tol, rel=False):
        got, want = np.asarray(got, float), np.asarray(want, float)
        err = np.abs(got - want) / (np.abs(want) if rel else 1.0)
        self.check(name, got.shape == want.shape and bool(np.all(err <= tol)),
                   f"got {np.round(got, 7).tolist()} want {want.tolist()}")

    def finish(self):
        status = "PASS" if not self.failures else "FAIL"
        line = f"[{status}] criterion {self.number}: {self.title}"
        if self.failures:
            line += " -- " + "; ".join(self.failures)
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not self.failures, line


def one(eqs, label):
    found = [e for e in eqs if e.label == label]
    assert len(found) == 1, f"expected a single {label}"
    return found[0]


def fd_jacobian(f, x, h=1e-6):
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


def test_criterion_1_disease_free_equilibria():
    gate = Gate(1, "disease-free equilibria of the reduced system")
    params = load_fixture("eq31").params
    eqs = eq_reduced(params)
    for label, want in (("E^1", (1.99755, 1.84389, 0)), ("E^2", (1.44427, 1.22239, 0.942539))):
        e = one(eqs, label)
        gate.check(f"{label} exists", e.exists is Existence.EXISTS)
        gate.near(label, e.point, want, 1e-3)
        res = float(np.max(np.abs(rhs_reduced(params, e.point))))
        gate.check(f"{label} residual", res < 1e-6, f"{res:.2e}")
    gate.finish()


def test_criterion_2_cubic_at_interior_disease_free_point():
    gate = Gate(2, "characteristic cubic at E^2 and Hurwitz product")
    params = load_fixture("eq31").params
    report = classify(params, one(eq_reduced(params), "E^2"))
    gate.near("cubic", report.char_coeffs[::-1][1:], (2.98129, 0.806172, 0.079073), 1e-3)
    gate.near("B1*B2", report.hurwitz_conditions["B1*B2"], 2.40343, 1e-3)
    gate.check("verdict", report.verdict.value == "stable")
    gate.finish()


def test_criterion_3_predator_invasion_eigenvalue():
    gate = Gate(3, "eigenvalue factor at E^1")
    params = load_fixture("eq31").params
    report = classify(params, one(eq_reduced(params), "E^1"))
    gate.near("lambda_P", report.factored_eigenvalues["lambda_P"], 0.110135, 1e-4)
    gate.finish()


def test_criterion_4_case_i():
    gate = Gate(4, "case (i) equilibria, cubics and R0")
    params = load_fixture("case_i").params
    eqs = eq_all(params)
    e1 = one(eqs, "E1")
    gate.near("E1", e1.point, (1.99755, 0, 1.84389, 0), 1e-3)
    gate.near("lambda_1", classify(params, e1).factored_eigenvalues["lambda_I"], 2.29084, 1e-3)
    gate.near("E2", one(eqs, "E2").point, (1.76388, 0, 1.56945, 0.48664), 1e-3)
    e4 = one(eqs, "E4")
    gate.near("E4", e4.point, (0.345473, 0.359982, 0.302164, 0), 1e-3)
    report = classify(params, e4)
    gate.near("E4 cubic", report.block_coeffs[::-1][1:], (2.5526, 0.419829, 0.406969), 1e-3)
    gate.near("E4 factor", report.factored_eigenvalues["lambda_P"], -0.165429, 1e-3)
    found = roots(e5_cubic(params))
    gate.check("E5 roots real", len(found.real_roots) == 3)
    gate.near("E5 roots", found.real_roots, (-15.06, -2.33611, -1.09277), (5e-3, 2e-3, 2e-3))
    gate.check("E5 no positive root", not found.positive_real_roots)
    gate.check("E5 absent", not [e for e in eqs if e.label == "E5"])
    gate.near("R0", r0(params).value, 5.822817, 1e-3)
    gate.finish()


def test_criterion_5_case_ii():
    gate = Gate(5, "case (ii) equilibria, cubics and R0")
    params = load_fixture("case_ii").params
    eqs = eq_all(params)
    e1 = one(eqs, "E1")
    gate.near("E1", e1.point, (0.867449, 0, 0.671573, 0), 1e-3)
    gate.near("lambda_1", classify(params, e1).factored_eigenvalues["lambda_I"], 0.575253, 1e-3)
    e2_roots = roots(e2_cubic(params))
    gate.near("E2 roots", e2_roots.real_roots, (-38.5785, -21.0518, -2.01336), 2e-3, rel=True)
    gate.check("E2 no positive root", one(eqs, "E2").exists is Existence.NO_ROOT)
    e4 = one(eqs, "E4")
    gate.near("E4", e4.point, (0.443469, 0.0947259, 0.339185, 0), 1e-3)
    report = classify(params, e4)
    gate.near("E4 cubic", report.block_coeffs[::-1][1:], (2.65497, 0.344814, 0.151479), 1e-3)
    gate.near("E4 factor", report.factored_eigenvalues["lambda_P"], -0.181828, 1e-3)
    e5_roots = roots(e5_cubic(params))
    gate.near("E5 roots", e5_roots.real_roots, (-15.9202, -2.6173, -1.10686), 2e-3, rel=True)
    gate.check("E5 no positive root", not e5_roots.positive_real_roots)
    gate.near("R0", r0(params).value, 1.95876, 1e-3)
    gate.finish()


def test_criterion_6_simulation_reaches_stable_points():
    gate = Gate(6, "trajectories converge to the stable equilibria by t = 500")
    for name in ("case_i", "case_ii"):
        params = load_fixture(name).params
        traj = integrate(params, (0.5, 0.5, 0.5, 0.5), IntegratorConfig(t_end=500))
        gate.check(f"{name} reached t=500 or converged", traj.times[-1] == 500 or traj.converged_to)
        gate.near(f"{name} limit", traj.final_state, one(eq_e4(params), "E4").point, 1e-3)
    params = load_fixture("eq31").params
    traj = integrate_reduced(params, (1.0, 1.0, 1.0), IntegratorConfig(t_end=500))
    gate.near("eq31 limit", traj.final_state, one(eq_reduced(params), "E^2").point, 1e-3)
    gate.finish()


def random_params(rng):
    rates = {n: float(rng.uniform(0, 1.5)) for n in (
        "beta", "sigma", "phi", "theta", "p1", "p2", "p3", "m1", "m2", "m3", "d1", "d2", "d3", "d4")}
    return ModelParams(r=float(rng.uniform(0.5, 3)), k=float(rng.uniform(0.5, 5)),
                       c=float(rng.uniform(0.05, 1)), q1=float(rng.uniform(0, 0.9)),
                       q2=float(rng.uniform(0, 0.9)), q3=float(rng.uniform(0, 0.9)), **rates)


def test_criterion_7_property_suites():
    gate = Gate(7, "property suites (a)-(e)")
    rng = np.random.default_rng(7)
    fixtures = {name: load_fixture(name).params for name in ("eq31", "case_i", "case_ii")}
    case_i = fixtures["case_i"]

    # (a) Jacobians against central differences
    worst = 0.0
    for x in rng.uniform(0.05, 3, size=(100, 4)):
        J = jacobian_full(case_i, x)
        fd = fd_jacobian(lambda y: rhs_full(case_i, y), x)
        worst = max(worst, float(np.max(np.abs(J - fd) / np.maximum(np.abs(fd), 1e-2))))
        y = x[[0, 2, 3]]
        Jr = jacobian_reduced(fixtures["eq31"], y)
        fdr = fd_jacobian(lambda z: rhs_reduced(fixtures["eq31"], z), y)
        worst = max(worst, float(np.max(np.abs(Jr - fdr) / np.maximum(np.abs(fdr), 1e-2))))
    gate.check("(a) jacobian", worst < 1e-5, f"worst rel err {worst:.2e}")

    # (b) Hurwitz verdict against the sign of the roots
    mismatches = 0
    for i in range(1000):
        degree = 2 + i % 3
        p = Poly((*rng.normal(size=degree), 1.0))
        mismatches += hurwitz(p).verdict is not spectrum_verdict(np.roots(p.descending()))
    gate.check("(b) random polynomials", mismatches == 0, f"{mismatches} mismatches")
    for name, params in fixtures.items():
        for e in eq_all(params, include_reduced=True):
            if e.exists is Existence.EXISTS:
                report = classify(params, e)
                gate.check(f"(b) {name} {e.label}",
                           report.verdict is spectrum_verdict(report.eigenvalues))

    # (c) infected eigenvalue at E1 against R0
    checked, worst = 0, 0.0
    while checked < 100:
        params = random_params(rng)
        try:
            res = r0(params)
        except UndefinedR0Error:
            continue
        lam = jacobian_full(params, (res.S1, 0, res.V1, 0))[1, 1]
        worst = max(worst, abs(lam - params.infected_loss * (res.value - 1)))
        checked += 1
    gate.check("(c) lambda_1 identity", worst <= 1e-10, f"worst {worst:.2e}")

    # (d) positivity and eventual boundedness
    cfg = IntegratorConfig(t_end=300, output_stride=1.0)
    bad = 0
    for y0 in rng.uniform(0, 3, size=(100, 4)):
        traj = integrate(case_i, y0, cfg)
        bad += bool(np.any(traj.states < 0)) or not traj.boundedness.satisfied
    gate.check("(d) invariance and boundedness", bad == 0, f"{bad} violations")

    # (e) Dulac expression on a positive grid
    s, v = np.meshgrid(np.geomspace(1e-3, 1e2, 100), np.geomspace(1e-3, 1e2, 100))
    values = [dulac_expression(case_i, a, b) for a, b in zip(s.ravel(), v.ravel())]
    gate.check("(e) dulac", len(values) == 10_000 and max(values) < 0, f"max {max(values):.3g}")
    gate.finish()


def test_criterion_7f_vaccination_sweep(tmp_path):
    gate = Gate("7f", "v_limit vanishes at phi = 0 and is nondecreasing in phi")
    rows = cmd_sweep(load_fixture("case_i"), "phi", 0.0, 1.2, 7, tmp_path / "sweep.csv")
    v = [float(r[-1]) for r in rows]
    # V decays exponentially when phi = 0, so the integrated limit is zero only to round-off
    gate.check("phi = 0", v[0] <= 1e-6, f"v_limit {v[0]:.3g}")
    gate.check("monotone", all(b >= a for a, b in zip(v, v[1:])), str(v))
    gate.finish()


def test_criterion_8_determinism(tmp_path):
    gate = Gate(8, "repeated analyze and simulate runs are byte-identical")
    for name in ("eq31", "case_i", "case_ii"):
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(fixture_text(name))
        for command, suffix in (("analyze", "json"), ("simulate", "csv")):
            outputs = []
            for run in range(2):
                out = tmp_path / f"{name}-{command}-{run}.{suffix}"
                gate.check(f"{name} {command} exit", main([command, "--config", str(cfg),
                                                           "--out", str(out)]) == 0)
                outputs.append(out.read_bytes())
            gate.check(f"{name} {command}", outputs[0] == outputs[1])
    gate.finish()
