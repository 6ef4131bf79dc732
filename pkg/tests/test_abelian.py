import itertools

import pytest
from hypothesis import given, strategies as st

from nmorbits.abelian import CyclicProduct, ShapeError, SpanCapExceeded, divisors

shapes = st.lists(st.integers(2, 6), min_size=1, max_size=3).map(lambda o: CyclicProduct(tuple(o)))


def elements_of(shape):
    return st.tuples(*(st.integers(0, d - 1) for d in shape.orders))


def test_basics():
    X = CyclicProduct((4, 2))
    assert X.order == 8 and X.exponent == 4 and X.zero == (0, 0)
    assert X.elements()[:3] == [(0, 0), (0, 1), (1, 0)]
    assert X.basis() == [(1, 0), (0, 1)]
    assert X.to_json() == {"orders": [4, 2]}
    assert CyclicProduct.from_json({"orders": [4, 2]}) == X


def test_scale_matches_repeated_addition():
    X = CyclicProduct((2, 5))
    assert X.scale(3, (1, 2)) == (1, 1)
    x = X.zero
    for _ in range(3):
        x = X.add(x, (1, 2))
    assert x == (1, 1)


@given(shapes.flatmap(lambda X: st.tuples(st.just(X), elements_of(X), st.integers(1, 12))))
def test_divisibility_matches_brute_force(case):
    X, x, k = case
    brute = any(X.scale(k, y) == x for y in X.elements())
    assert X.divisible_by(x, k) == brute


@given(shapes.flatmap(lambda X: st.tuples(st.just(X), elements_of(X))))
def test_element_order_matches_brute_force(case):
    X, x = case
    brute = next(n for n in itertools.count(1) if X.scale(n, x) == X.zero)
    assert X.element_order(x) == brute
    assert X.add(x, X.neg(x)) == X.zero


def test_span_and_cap():
    X = CyclicProduct((4, 2))
    assert X.span([(2, 0)]) == ((0, 0), (2, 0))
    assert len(X.span([(1, 0), (0, 1)])) == 8
    with pytest.raises(SpanCapExceeded):
        CyclicProduct((7, 7)).span([(1, 0), (0, 1)], cap=10)


def test_shape_errors():
    X = CyclicProduct((4, 2))
    with pytest.raises(ShapeError):
        X.add((1,), (1, 0))
    with pytest.raises(ShapeError):
        X.check((4, 0))
    with pytest.raises(IndexError):
        X.project((1, 1), [2])
    with pytest.raises(ValueError):
        CyclicProduct((1, 2))
    assert X.project((3, 1), [1]) == (1,)
    assert X.sub_product([0]) == CyclicProduct((4,))


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]
