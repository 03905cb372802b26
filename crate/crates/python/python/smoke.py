"""Smoke test for the pyecmfit extension module."""

import math

import pyecmfit as ef


def main():
    params = ef.EcmParams(0.05, 0.02, 1000.0, 0.03, 20000.0)
    ocv = ef.OcvCurve.reference()
    cell = ef.CellSpec(2.0, 1.0)

    time = [float(k) for k in range(301)]
    volts = ef.simulate(params, ocv, cell, time, [1.0] * 301)
    assert len(volts) == 301
    assert volts[0] == ocv(1.0) - 0.05

    rest = ef.simulate(params, ocv, cell, time[:10], [0.0] * 10)
    assert all(v == ocv(1.0) for v in rest)

    line = ef.fit_ocv([(0.0, 3.0), (1.0, 4.0)], 1)
    assert all(abs(a - b) < 1e-12 for a, b in zip(line.coefficients, [3.0, 1.0]))

    problem = ef.FitProblem(time, [1.0] * 301, volts, 2.0, ocv=ocv)
    assert problem.dim == 5 and len(problem) == 301
    assert problem.mse(params.to_list()) == 0.0

    _, grid_mse = ef.grid_oracle(problem, 6)
    for method in ef.methods():
        report = ef.fit(problem, method, seed=42)
        again = ef.fit(problem, method, seed=42, workers=4)
        assert report.same_result(again), method
        assert report.mse <= grid_mse, (method, report.mse, grid_mse)
        print(f"{method:>3} mse={report.mse:.3e} et={report.execution_time:.3f}s")

    ls = ef.fit(problem, "ls")
    assert ls.mse < 1e-8
    assert max(abs(a - b) / b for a, b in zip(ls.theta, params.to_list())) < 0.02
    assert ef.FitReport.from_json(ls.to_json()).same_result(ls)

    quick = ef.fit(problem, "pso", seed=1, config={"pso.max_iterations": "5"})
    assert quick.iterations == 5

    try:
        ef.fit(problem, "nosuch")
    except ValueError as e:
        assert "pso" in str(e)
    else:
        raise AssertionError("unknown method accepted")

    try:
        ef.EcmParams(0.05, 0.02, 1000.0, 0.03, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative capacitance accepted")

    table = ef.reference_table()
    assert len(table) == 8
    assert ("Particle Swarm", 3.577e-7, 0.56) in table
    assert math.isfinite(ef.FitProblem.synthetic().mse(params.to_list()))
    print("smoke ok")


if __name__ == "__main__":
    main()
