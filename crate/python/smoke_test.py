"""Smoke test for the fracsob extension module."""

import math
import tempfile
from pathlib import Path

import fracsob


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    # Density at alpha = 1/2 is a half Gaussian.
    for theta in (0.1, 0.5, 2.0):
        close(fracsob.mainardi_density(0.5, theta), math.exp(-theta * theta / 4) / math.sqrt(math.pi), 1e-10)
    close(fracsob.mainardi_moment(0.7, 1.0), 1.0 / math.gamma(1.7), 1e-12)
    close(fracsob.mittag_leffler(1.0, 1.0, -2.0), math.exp(-2.0), 1e-12)

    rule = fracsob.QuadratureRule(0.8)
    assert len(rule) == 200
    assert rule.normalization_defect() < 1e-10

    # I^a of the constant 1 is t^a / Gamma(1+a).
    steps, horizon, a = 64, 1.0, 0.6
    ones = [1.0] * (steps + 1)
    integral = fracsob.frac_integral(ones, horizon, a)
    close(integral[-1], 1.0 / math.gamma(1 + a), 1e-10)
    caputo = fracsob.caputo_deriv(ones, horizon, a)
    assert max(abs(v) for v in caputo) < 1e-12

    ops = fracsob.SolutionOperators(1.0, 4)
    close(ops.s_multiplier(0.7, 2), math.exp(-0.8 * 0.7) / 5.0, 1e-10)
    close(ops.apply_t(0.5, [1.0, 0.5])[1], 0.5 * ops.t_multiplier(0.5, 2), 1e-14)

    solver = fracsob.Solver(0.8, 1.0, 8, 32, u0=[1.0], v0=[1.0],
                            nonlocal_terms=[(0.1, 0.5)], nonlinearity="sin_dx")
    sol = solver.solve()
    assert sol.report["converged"], sol.report
    assert len(sol.times) == 33 and len(sol.coefficients[0]) == 8
    assert all(math.isfinite(c) for row in sol.coefficients for c in row)
    assert solver.hypothesis_check(probes=20)["alpha_q_pass"]

    try:
        fracsob.Solver(1.5, 1.0, 8, 32)
    except fracsob.FracsobError:
        pass
    else:
        raise AssertionError("alpha outside (0, 1] accepted")

    cfg = Path(__file__).resolve().parents[1] / "configs" / "linear.cfg"
    with tempfile.TemporaryDirectory() as out:
        report = fracsob.run_config(cfg.read_text(), "solve", out)
        assert report["success"], report
        assert (Path(out) / "trajectory.csv").exists()

    print("smoke test passed")


if __name__ == "__main__":
    main()
