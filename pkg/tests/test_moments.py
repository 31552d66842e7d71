import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paircal.detector import CountRecord, Counts
from paircal.errors import InsufficientDataError, ParameterError
from paircal.moments import MomentAccumulator, MomentSet, sample_moments


def test_identical_records():
    mom = sample_moments([CountRecord(1, 1), CountRecord(1, 1)])
    assert (mom.mean_l, mom.mean_m, mom.mean_diff2) == (1.0, 1.0, 0.0)
    assert not mom.cov.any()
    assert not mom.has_coincidences


def test_anticorrelated_records():
    mom = sample_moments([(2, 0), (0, 2)])
    assert mom.mean_lm == 0.0
    assert mom.mean_diff2 == 4.0


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        sample_moments([(1, 1)])
    with pytest.raises(InsufficientDataError):
        sample_moments([])


def test_covariance_uses_one_over_m():
    mom = sample_moments([(0, 0, 0), (2, 1, 1)])
    # l takes values 0 and 2: population variance 1
    assert mom.cov[0, 0] == 1.0
    assert mom.cov_of_means()[0, 0] == 0.5
    assert mom.stats[-2:] == ("c", "c2")


records = st.lists(st.tuples(st.integers(0, 60), st.integers(0, 60)), min_size=2, max_size=200)


@settings(max_examples=100, deadline=None)
@given(records)
def test_sample_moment_invariants(recs):
    mom = sample_moments(recs)
    l = np.array([r[0] for r in recs], dtype=float)
    m = np.array([r[1] for r in recs], dtype=float)
    assert mom.mean_l == pytest.approx(l.mean())
    assert mom.mean_diff2 == pytest.approx(np.mean((l - m) ** 2))
    assert mom.mean_l2 >= mom.mean_l**2 - 1e-12 * mom.mean_l**2
    assert mom.mean_m2 >= mom.mean_m**2 - 1e-12 * mom.mean_m**2
    assert np.all(np.linalg.eigvalsh(mom.cov) > -1e-7 * max(1.0, np.abs(mom.cov).max()))


@settings(max_examples=50, deadline=None)
@given(records, records)
def test_merge_is_exact(a, b):
    full = MomentAccumulator(False).add(Counts.from_records(a + b))
    merged = MomentAccumulator(False).add(Counts.from_records(a)).merge(
        MomentAccumulator(False).add(Counts.from_records(b)))
    assert merged.count == full.count
    np.testing.assert_array_equal(merged.sums, full.sums)
    np.testing.assert_array_equal(merged.cross, full.cross)


def test_dict_round_trip():
    mom = sample_moments([(1, 2, 1), (3, 0, 0), (2, 2, 2)])
    back = MomentSet.from_dict(mom.to_dict())
    np.testing.assert_array_equal(back.mean_vector(), mom.mean_vector())
    np.testing.assert_array_equal(back.cov, mom.cov)
    assert back.sample_size == 3


def test_validation():
    with pytest.raises(ParameterError):
        MomentSet(1, 1, 1, 1, 1, 0, mean_c=1.0)
    with pytest.raises(ParameterError):
        MomentSet(1, 1, 1, 1, 1, 0, cov=np.zeros((3, 3)))
    with pytest.raises(ParameterError):
        MomentAccumulator(True).add(Counts([1, 2], [1, 2]))
