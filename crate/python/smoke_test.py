"""Smoke test for the dcext_py bindings: python python/smoke_test.py"""

import json
import math

import dcext_py as dc


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    for x, y in [(0.0, 0.0), (3.0, 0.0), (2.0, -0.5), (-4.0, -1.0)]:
        assert close(dc.strip_eval(x, y), x * x / (1.0 - y), 1e-12), (x, y)

    ok, rows = dc.strip_bounds([1.0, 10.0, 100.0])
    assert ok
    for tau, lb in rows:
        assert close(lb, 4.0 * tau * tau / 3.0, 1e-12), (tau, lb)

    ok, rows = dc.elltwo_rows(2)
    assert not ok
    n, k, norm, g, _ = rows[0]
    assert (n, k) == (1, 2) and close(norm, 0.5, 1e-12) and close(g, 2.0, 1e-12)
    ok, rows = dc.elltwo_rows(64)
    assert ok and max(r[3] for r in rows) > 1e3

    sq = json.dumps({"node": "norm_of_affine", "offset": [0.0, 0.0], "power": 2})
    ball = json.dumps({"kind": "ball", "center": [0.0, 0.0], "radius": 1.0})
    assert close(dc.eval_convex(sq, [3.0, 4.0]), 25.0, 1e-12)

    point, dist = dc.project(ball, [3.0, 4.0])
    assert close(dist, 4.0, 1e-8) and close(point[0], 0.6, 1e-8) and close(point[1], 0.8, 1e-8)

    pts = [[0.5, 0.0], [3.0, 4.0], [0.0, -2.0]]
    vals = dc.lipschitz_extend(sq, ball, 2.0, pts, samples=300, seed=1)
    for p, v in zip(pts, vals):
        r = math.hypot(*p)
        want = r * r if r <= 1.0 else 2.0 * r - 1.0
        assert close(v, want, 1e-6), (p, v, want)

    try:
        dc.lipschitz_extend(sq, ball, 1.0, pts, samples=300)
    except dc.CertificationError:
        pass
    else:
        raise AssertionError("L = 1 is below the slope of |x|^2 on the unit ball")

    try:
        dc.strip_bounds([10.0, 1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("decreasing tau list accepted")

    print("dcext_py smoke test passed")


if __name__ == "__main__":
    main()
