import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paircal import source
from paircal.errors import ParameterError, TruncationError
from paircal.rng import make_rng


def test_pmf_examples():
    assert source.pmf(source.poisson(1.0), 0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert source.pmf(source.thermal(2.0), 1) == pytest.approx(2.0 / 9.0, rel=1e-14)
    for dist in (source.poisson(0.0), source.thermal(0.0)):
        assert dist.pmf(0) == 1.0
        assert dist.pmf(1) == 0.0
        assert dist.pmf(5) == 0.0


def test_pmf_matches_textbook_formulas():
    for n in (0.3, 2.0, 17.0):
        for k in (0, 1, 4, 30):
            assert source.pmf(source.poisson(n), k) == pytest.approx(n**k * math.exp(-n) / math.factorial(k), rel=1e-12)
            assert source.pmf(source.thermal(n), k) == pytest.approx(n**k / (1 + n) ** (k + 1), rel=1e-12)


def test_moment_examples():
    assert source.moments(source.poisson(1.0)) == (1.0, 2.0)
    assert source.moments(source.thermal(2.0)) == (2.0, 10.0)
    assert source.moments(source.custom([1.0])) == (0.0, 0.0)


@pytest.mark.parametrize("kind", ["poisson", "thermal"])
@pytest.mark.parametrize("n", [0.0, 0.5, 1.0, 5.0, 50.0, 1e3])
def test_pmf_normalised_over_default_cutoff(kind, n):
    dist = source.PairDistribution(kind, n)
    p = source.pmf_array(dist)
    assert np.all(p >= 0)
    assert 1 - 1e-9 <= p.sum() <= 1 + 1e-12
    assert source.tail_mass(dist) < 1e-12


def test_default_cutoffs():
    assert source.poisson(4.0).cutoff == math.ceil(4 + 12 * 2 + 30)
    assert source.thermal(2.0).cutoff == math.ceil(math.log(1e-12) / math.log(2 / 3))
    assert source.poisson(0.0).cutoff == 0


@pytest.mark.parametrize("dist", [source.poisson(3.0), source.thermal(3.0),
                                  source.custom([0.1, 0.2, 0.3, 0.4])], ids=str)
def test_factorial_moments_match_direct_sum(dist):
    kmax = 400 if dist.kind != "custom" else dist.cutoff
    p = source.pmf_array(dist, kmax)
    k = np.arange(p.size, dtype=float)
    for r, value in enumerate(source.factorial_moments(dist, 4)):
        falling = np.prod([k - j for j in range(r)], axis=0) if r else np.ones_like(k)
        assert value == pytest.approx(float(np.dot(falling, p)), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 30.0), st.sampled_from(["poisson", "thermal"]))
def test_closed_form_moments_match_summation(n, kind):
    dist = source.PairDistribution(kind, n)
    p = source.pmf_array(dist)
    k = np.arange(p.size, dtype=float)
    mean, second = source.moments(dist)
    assert mean == pytest.approx(np.dot(k, p), rel=1e-9)
    assert second == pytest.approx(np.dot(k * k, p), rel=1e-8)


def test_invalid_parameters():
    with pytest.raises(ParameterError):
        source.poisson(-1.0)
    with pytest.raises(ParameterError):
        source.thermal(float("nan"))
    with pytest.raises(ParameterError):
        source.custom([0.5, -0.1])
    with pytest.raises(ParameterError):
        source.custom([0.7, 0.7])
    with pytest.raises(ParameterError):
        source.PairDistribution("squeezed", 1.0)
    with pytest.raises(ParameterError):
        source.pmf(source.poisson(1.0), -1)


def test_custom_with_missing_tail_mass_is_a_truncation_error():
    dist = source.custom([0.5, 0.3])
    with pytest.raises(TruncationError):
        source.moments(dist)


def test_sampling_vacuum():
    rng = make_rng(3)
    assert source.sample_pairs(source.poisson(0.0), rng) == 0
    assert not source.sample_pairs(source.thermal(0.0), rng, size=100).any()


def test_poisson_sample_mean():
    k = source.sample_pairs(source.poisson(5.0), make_rng(11), size=10**6)
    assert abs(k.mean() - 5.0) < 5 * math.sqrt(5.0 / 1e6)


def test_thermal_sample_second_moment():
    k = source.sample_pairs(source.thermal(3.0), make_rng(12), size=10**6).astype(float)
    k2 = k * k
    se = k2.std() / math.sqrt(k2.size)
    assert abs(k2.mean() - 21.0) < 5 * se
    assert abs(k.mean() - 3.0) < 5 * k.std() / math.sqrt(k.size)


def test_custom_sampling_follows_table():
    table = [0.2, 0.5, 0.3]
    k = source.sample_pairs(source.custom(table), make_rng(5), size=200_000)
    freq = np.bincount(k, minlength=3) / k.size
    se = np.sqrt(np.array(table) * (1 - np.array(table)) / k.size)
    assert np.all(np.abs(freq - table) < 5 * se)


def test_sampling_is_deterministic():
    a = source.sample_pairs(source.thermal(2.0), make_rng(99), size=1000)
    b = source.sample_pairs(source.thermal(2.0), make_rng(99), size=1000)
    c = source.sample_pairs(source.thermal(2.0), make_rng(100), size=1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_load_pmf_file(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# two-pair source\n0.25\n0.5  # k=1\n\n0.25\n", encoding="utf-8")
    dist = source.load_pmf_file(path)
    assert dist.pmf_table == (0.25, 0.5, 0.25)
    assert dist.moments() == (1.0, 1.5)
    path.write_text("0.5\nhalf\n", encoding="utf-8")
    with pytest.raises(ParameterError, match=":2:"):
        source.load_pmf_file(path)
