import math

import numpy as np
import pytest

from magvlasov.errors import ExponentError
from magvlasov.harness.inequalities import (PhaseGrid, interpolation_exponent, interpolation_ratio,
                                            probe_calderon_zygmund, probe_weak_young, verify_weak_product_bound,
                                            verify_moment_holder, verify_moment_interpolation)


def test_interpolation_exponent():
    # p = 1 gives r = 1 whatever k and k'
    assert interpolation_exponent(4.0, 2.0, 1.0) == pytest.approx(1.0)
    # p = inf, k' = 0 gives the classical (k + 3) / 3
    assert interpolation_exponent(4.0, 0.0, math.inf) == pytest.approx(7.0 / 3.0)


def test_interpolation_ratio_is_scale_free():
    rng = np.random.default_rng(0)
    mesh = PhaseGrid()
    f = rng.random((mesh.nx ** 3, mesh.nv ** 3))
    ratio = interpolation_ratio(f, mesh, 4.0, 1.0, 2.0)
    assert interpolation_ratio(3.0 * f, mesh, 4.0, 1.0, 2.0) == pytest.approx(ratio, rel=1e-12)
    assert interpolation_ratio(f, mesh.scaled(2.0), 4.0, 1.0, 2.0) == pytest.approx(ratio, rel=1e-12)
    with pytest.raises(ExponentError):
        interpolation_ratio(f, mesh, 4.0, 5.0, 2.0)
    with pytest.raises(ExponentError):
        interpolation_ratio(f, mesh, 4.0, 1.0, 0.5)


def test_moment_interpolation():
    reports = verify_moment_interpolation(trials=20, seed=1)
    assert len(reports) == 3
    constant, scaling, _stability = reports
    assert constant.passed and math.isfinite(constant.fitted_c)
    assert scaling.passed, scaling.record()


def test_moment_holder():
    report = verify_moment_holder(trials=50)
    assert report.passed, report.record()


def test_weak_product_bound():
    report = verify_weak_product_bound(trials=20)
    assert report.passed, report.record()


def test_weak_young_probe():
    report = probe_weak_young()
    assert report.passed, report.record()
    assert report.fitted_constants['r'] == pytest.approx(2.0)
    with pytest.raises(ExponentError):
        probe_weak_young(p=1.5)


def test_calderon_zygmund_probe():
    reports = probe_calderon_zygmund(trials=2, cells=16, smoothing=1.5)
    assert [r.name for r in reports] == ['ineq.calderon_zygmund(p=2)', 'ineq.calderon_zygmund(p=4)']
    assert all(r.passed for r in reports)
    # the Frobenius norm of the Hessian of the potential is the L^2 norm of g
    assert reports[0].fitted_c < 1.5
