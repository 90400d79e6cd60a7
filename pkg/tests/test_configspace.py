import pytest
from hypothesis import given, strategies as st

from hkopa.configspace import (AmbientShape, Configuration, divisors, enumerate_configurations,
                               is_nested, parameter_count)
from hkopa.exceptions import ShapeError


def _brute_divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


class TestEnumerate:
    def test_4x4(self):
        got = [(c.a_rows, c.a_cols) for c in enumerate_configurations(AmbientShape(4, 4))]
        assert got == [(1, 2), (1, 4), (2, 1), (2, 2), (2, 4), (4, 1), (4, 2)]

    def test_512_count(self):
        # ten divisors per axis: 10 * 10 - 2 corners
        assert len(_brute_divisors(512)) == 10
        assert len(enumerate_configurations(AmbientShape(512, 512))) == 98

    def test_only_trivial(self):
        assert enumerate_configurations(AmbientShape(2, 1)) == []
        assert enumerate_configurations(AmbientShape(1, 1)) == []

    @pytest.mark.parametrize("M,N", [(0, 3), (2, 2), (3, 1), (4, 5)])
    def test_power_of_two_count(self, M, N):
        assert len(enumerate_configurations(AmbientShape(2 ** M, 2 ** N))) == (M + 1) * (N + 1) - 2

    @given(st.integers(1, 60), st.integers(1, 60))
    def test_matches_brute_force(self, P, Q):
        shape = AmbientShape(P, Q)
        got = [(c.a_rows, c.a_cols) for c in enumerate_configurations(shape)]
        want = [(p, q) for p in _brute_divisors(P) for q in _brute_divisors(Q)
                if (p, q) not in ((1, 1), (P, Q))]
        assert got == want
        for c in enumerate_configurations(shape):
            assert P % c.a_rows == 0 and Q % c.a_cols == 0
            assert c.a_rows * c.b_rows == P and c.a_cols * c.b_cols == Q


@given(st.integers(1, 5000))
def test_divisors(n):
    assert divisors(n) == _brute_divisors(n)


class TestConfiguration:
    def test_rejects_non_divisor(self):
        with pytest.raises(ShapeError):
            Configuration(3, 2, AmbientShape(8, 8))

    def test_rejects_bad_shape(self):
        with pytest.raises(ShapeError):
            AmbientShape(0, 4)

    def test_from_factors(self):
        c = Configuration.from_factors((2, 4), (3, 5))
        assert c == Configuration(2, 4, AmbientShape(6, 20))
        assert c.b_shape == (3, 5)


class TestParameterCount:
    def test_reported_values(self):
        s = AmbientShape(512, 512)
        assert parameter_count(Configuration(64, 128, s)).report_count == 8223
        assert parameter_count(Configuration(16, 32, s)).report_count == 1023

    def test_small(self):
        pc = parameter_count(Configuration(2, 2, AmbientShape(4, 4)))
        assert pc == (8, 7)

    @given(st.integers(1, 40), st.integers(1, 40))
    def test_ic_is_report_plus_one(self, P, Q):
        for c in enumerate_configurations(AmbientShape(P, Q)):
            pc = parameter_count(c)
            assert pc.ic_count == pc.report_count + 1


class TestNested:
    def test_examples(self):
        s = AmbientShape(8, 8)
        assert is_nested(Configuration(2, 2, s), Configuration(4, 4, s))
        assert not is_nested(Configuration(2, 4, s), Configuration(4, 2, s))
        assert is_nested(Configuration(2, 2, s), Configuration(2, 2, s))

    def test_needs_same_ambient(self):
        with pytest.raises(ShapeError):
            is_nested(Configuration(2, 2, AmbientShape(4, 4)), Configuration(2, 2, AmbientShape(8, 8)))

    @given(st.sampled_from([12, 16, 18, 36]), st.sampled_from([8, 12, 30]), st.data())
    def test_partial_order(self, P, Q, data):
        shape = AmbientShape(P, Q)
        configs = [Configuration(p, q, shape) for p in divisors(P) for q in divisors(Q)]
        x, y, z = (data.draw(st.sampled_from(configs)) for _ in range(3))
        assert is_nested(x, x)
        if is_nested(x, y) and is_nested(y, x):
            assert x == y
        if is_nested(x, y) and is_nested(y, z):
            assert is_nested(x, z)
