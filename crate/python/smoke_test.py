"""Smoke test for the biharm_py extension module."""

import cmath
import math

import biharm_py as bh


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    b0 = bh.kernel_b(0.0)
    expected = -cmath.exp(7j * math.pi / 8) * math.gamma(1.25) / math.pi
    assert close(b0, expected, 1e-10), (b0, expected)

    assert close(bh.trace_value(0.0), 1.0, 1e-12)
    assert close(bh.trace_value(1 / 3), 1.2142670092351193 + 0.15986128450378092j, 1e-12)
    assert close(bh.derivative_trace_value(1 / 3), 0.35355339059327376 - 0.094734345490752999j, 1e-12)
    assert close(abs(bh.determinant(0.0, 1 / 3)), 0.36602540378443865, 1e-12)
    assert abs(bh.determinant(0.25, 0.25)) < 1e-14
    for pole in (1.0, -3.0):
        try:
            bh.trace_value(pole)
        except ValueError:
            pass
        else:
            raise AssertionError(f"a({pole}) should be a pole")

    lhs, rhs, rel = bh.mellin_check(0.2)
    assert rel < 1e-5, rel

    n, dt = 129, 1 / 128
    f = [complex(k * dt, 0.0) for k in range(n)]
    i_half = bh.frac_order(bh.frac_order(f, dt, 0.5), dt, 0.5)
    i_one = bh.frac_order(f, dt, 1.0)
    assert max(abs(a - b) for a, b in zip(i_half, i_one)) < 1e-5

    zero = bh.solve("zero", nx=64, nt=17)
    assert zero["converged"] and all(v == 0 for row in zero["u"] for v in row)

    res = bh.solve("manufactured-linear", nx=512, nt=257)
    assert res["converged"]
    assert res["dirichlet_error"] < 1e-4 and res["neumann_error"] < 1e-4, res
    assert len(res["u"]) == 257 and len(res["u"][0]) == len(res["x"]) == 256
    assert res["mass_residual"] < 1e-3

    try:
        bh.solve("zero", lambda1=0.2, lambda2=0.2)
    except ValueError:
        pass
    else:
        raise AssertionError("equal orders must be rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
