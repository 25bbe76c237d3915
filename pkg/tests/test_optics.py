import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvcournot.model import ParameterError, TruncationError
from cvcournot.optics import (
    ModeAmplitudes,
    PoissonTruncation,
    apply_loss,
    beam_splitter,
    chernoff_upper_tail,
    encode_strategies,
    expected_quantities,
    lossy_quantities,
    poisson_grid,
    poisson_joint_pmf,
    truncated_expectation,
)

QP = math.pi / 4
xs = st.floats(0, 10)
gammas = st.floats(0, QP)


def _close(a: ModeAmplitudes, b, tol=1e-12):
    assert abs(a.alpha1 - b[0]) < tol and abs(a.alpha2 - b[1]) < tol


def test_encode_examples():
    _close(encode_strategies(0, 0), (0, 0))
    _close(encode_strategies(2, 0), (math.sqrt(2), 0))
    _close(encode_strategies(math.sqrt(2), math.sqrt(2)), (1, 1))


def test_beam_splitter_examples():
    _close(beam_splitter(ModeAmplitudes(math.sqrt(2), 0), 0.0), (math.sqrt(2), 0))
    _close(beam_splitter(ModeAmplitudes(math.sqrt(2), 0), QP), (1, 1j))
    for g in (0.1, 0.4, 0.7):
        n1, n2 = beam_splitter(ModeAmplitudes(1, 1), g).photon_numbers
        assert (n1, n2) == pytest.approx((1, 1), abs=1e-12)


def test_apply_loss_examples():
    _close(apply_loss(ModeAmplitudes(1, 1), 1, 1), (1, 1))
    _close(apply_loss(ModeAmplitudes(2, 0), 0.25, 1), (1, 0))
    e = math.exp(-1)
    _close(apply_loss(ModeAmplitudes(1, 1), e, e), (math.exp(-0.5), math.exp(-0.5)))
    with pytest.raises(ParameterError):
        apply_loss(ModeAmplitudes(1, 1), 0.0, 1)


def test_expected_quantities_examples():
    assert expected_quantities(2, 0, 0) == pytest.approx((2, 0))
    assert expected_quantities(2, 0, QP) == pytest.approx((1, 1))
    assert expected_quantities(1.3, 1.3, 0.3) == pytest.approx((1.3**2 / 2,) * 2)


def test_lossy_quantities_examples():
    assert lossy_quantities(1.1, 0.7, 0.3, 1.0) == expected_quantities(1.1, 0.7, 0.3)
    assert lossy_quantities(0, 2, 0, 0.5) == pytest.approx((0, 1))
    assert lossy_quantities(2, 2, math.pi / 8, 0.5) == pytest.approx((2, 1))
    with pytest.raises(ParameterError):
        lossy_quantities(1, 1, 0.1, 1.2)


@given(a1r=st.floats(-5, 5), a1i=st.floats(-5, 5), a2r=st.floats(-5, 5), a2i=st.floats(-5, 5), g=gammas)
def test_beam_splitter_is_passive(a1r, a1i, a2r, a2i, g):
    amps = ModeAmplitudes(complex(a1r, a1i), complex(a2r, a2i))
    out = beam_splitter(amps, g)
    assert sum(out.photon_numbers) == pytest.approx(sum(amps.photon_numbers), abs=1e-12 * (1 + sum(amps.photon_numbers)))


@given(x1=xs, x2=xs, e1=st.floats(1e-6, 1), e2=st.floats(1e-6, 1))
def test_loss_is_monotone(x1, x2, e1, e2):
    amps = encode_strategies(x1, x2)
    before = amps.photon_numbers
    after = apply_loss(amps, e1, e2).photon_numbers
    for b, a, e in zip(before, after, (e1, e2)):
        assert a <= b
        if e == 1.0:
            assert a == b
        elif b > 0:
            assert a < b


@given(x1=xs, x2=xs, g=gammas)
def test_expected_quantities_match_amplitudes(x1, x2, g):
    n = beam_splitter(encode_strategies(x1, x2), g).photon_numbers
    assert expected_quantities(x1, x2, g) == pytest.approx(n, abs=1e-12 * (1 + x1 * x1 + x2 * x2))
    assert sum(expected_quantities(x1, x2, g)) == pytest.approx((x1 * x1 + x2 * x2) / 2, rel=1e-12, abs=1e-300)


def test_joint_pmf_examples():
    assert poisson_joint_pmf(0, 0, 0, 0, 0.4) == 1.0
    assert poisson_joint_pmf(1, 0, math.sqrt(2), 0, 0) == pytest.approx(math.exp(-1), rel=1e-14)


@pytest.mark.parametrize("x1, x2, g", [(1.0, 2.0, 0.3), (2.5, 0.4, 0.7), (3.0, 3.0, 0.0)])
def test_joint_pmf_matches_single_exponential_form(x1, x2, g):
    # the printed joint distribution uses one normalization exp(-(x1^2+x2^2)/2)
    l1, l2 = expected_quantities(x1, x2, g)
    for m1 in range(6):
        for m2 in range(6):
            direct = math.exp(-(x1 * x1 + x2 * x2) / 2) * l1**m1 * l2**m2 / (math.factorial(m1) * math.factorial(m2))
            assert poisson_joint_pmf(m1, m2, x1, x2, g) == pytest.approx(direct, rel=1e-12)


def test_chernoff_bound_dominates_exact_tail():
    from scipy.stats import poisson

    for lam in (0.5, 3.0, 20.0):
        for m in range(math.ceil(lam) + 1, math.ceil(lam) + 40):
            assert poisson.sf(m - 1, lam) <= chernoff_upper_tail(lam, m) * (1 + 1e-9)


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 10.0, 50.0])
def test_truncation_meets_tail_bound(lam):
    trunc = PoissonTruncation()
    grid = poisson_grid(lam, lam / 2, trunc)
    kept = grid.prob.sum()
    assert grid.tail <= trunc.tail_bound
    assert 1 - trunc.tail_bound - 1e-14 <= kept <= 1 + 1e-14


def test_truncation_ceiling():
    with pytest.raises(TruncationError):
        PoissonTruncation(max_cutoff=10).cutoff(50.0)


@settings(max_examples=30, deadline=None)
@given(x1=st.floats(0, 7), x2=st.floats(0, 7), g=gammas)
def test_moment_identities(x1, x2, g):
    l1, l2 = expected_quantities(x1, x2, g)
    if l1 + l2 > 50:
        return
    E = lambda f: truncated_expectation(f, x1, x2, g)  # noqa: E731
    assert E(lambda m1, m2: np.ones_like(m1, dtype=float)) == pytest.approx(1, abs=1e-12)
    assert E(lambda m1, m2: m1) == pytest.approx(l1, abs=1e-8)
    assert E(lambda m1, m2: m2) == pytest.approx(l2, abs=1e-8)
    assert E(lambda m1, m2: m1 * m1) == pytest.approx(l1 * l1 + l1, abs=1e-8)
    assert E(lambda m1, m2: m1 * m2) == pytest.approx(l1 * l2, abs=1e-8)


def test_full_kernel_matches_fluctuation_shifted_margin():
    # <m1 (k - m1 - m2)> = lam1 k - (lam1^2 + lam1) - lam1 lam2
    k = 7.0
    for x1, x2, g in [(1.0, 2.0, 0.2), (2.2, 1.4, 0.6), (0.5, 3.0, 0.0)]:
        l1, l2 = expected_quantities(x1, x2, g)
        got = truncated_expectation(lambda m1, m2: m1 * (k - m1 - m2), x1, x2, g)
        assert got == pytest.approx(l1 * (k - 1 - l1 - l2), abs=1e-8)


def test_truncated_expectation_is_bit_stable():
    f = lambda m1, m2: m1 * (3.3 - m1 - m2)  # noqa: E731
    assert truncated_expectation(f, 1.7, 2.1, 0.5) == truncated_expectation(f, 1.7, 2.1, 0.5)
