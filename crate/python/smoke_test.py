"""Smoke test for the gaussn extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/gaussn-*.whl
then run `python python/smoke_test.py`.
"""

import math

import gaussn


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    chi = gaussn.Model("chi2log")
    trig = gaussn.Model("trig")
    gauss = gaussn.Model("gauss", sigma=2.0)

    close(chi.fisher, 1.0, 0.0)
    close(trig.fisher, 4.0, 0.0)
    close(gauss.fisher, 0.25, 1e-15)

    grad, curv = gaussn.fisher(trig, 0.3)
    close(grad, 4.0, 1e-6)
    close(curv, 4.0, 1e-5)

    d = 0.7
    close(gaussn.h(chi, d), d + 1.0 - math.exp(d), 1e-9)
    close(gaussn.h(trig, d, closed_form=True), math.cos(2 * d) - 1.0, 1e-15)

    assert gaussn.minimal_n(chi)["n"] == 160
    assert gaussn.minimal_n(chi, mode="strict")["n"] == 161
    assert gaussn.minimal_n(trig)["n"] == 8
    assert [r[2] for r in gaussn.table(chi, [3, 10, 100])] == [3.263, 0.817, 0.135]

    xs = gauss.sample(1.5, 40, 7)
    assert xs == gauss.sample(1.5, 40, 7)
    close(gauss.ml_estimate(xs), sum(xs) / len(xs), 1e-9)
    grid, dens = gaussn.posterior(gauss, xs)
    mass = sum(0.5 * (grid[i + 1] - grid[i]) * (dens[i] + dens[i + 1]) for i in range(len(grid) - 1))
    close(mass, 1.0, 1e-6)
    assert gaussn.compare_to_gaussian(gauss, xs)["sup_log_deviation"] <= 1e-10

    ok, checks = gaussn.verify(["table1"])
    assert ok and len(checks) == 14

    try:
        gaussn.Model("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")

    print(f"gaussn {gaussn.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
