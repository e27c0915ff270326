import itertools

import numpy as np
import pytest

from configura import gf as gfmod
from configura.errors import NotASubfield, NotPrime, ZeroElement
from configura.gf import FiniteField, dlog, field_new, subfield_test

import oracles

SMALL = [(2, 1), (3, 1), (7, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3), (7, 2), (2, 6), (11, 2)]


def test_prime_helpers():
    assert [n for n in range(30) if gfmod.is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert gfmod.prime_power(81) == (3, 4)
    assert not gfmod.is_prime_power(12)
    assert gfmod.smallest_primitive_root(7) == 3


def test_gf2_prime_field():
    F = field_new(2, 1)
    assert F.primitive == F.one


def test_gf7_root_and_logs():
    F = field_new(7, 1)
    assert F.encode(F.primitive) == 3
    assert dlog(F, F.element(1)) == 0
    assert dlog(F, F.element(3)) == 1
    assert dlog(F, F.element(2)) == 2


def test_gf81_x_has_full_order():
    F = field_new(3, 4)
    assert F.encode(F.primitive) == 3   # the polynomial x
    assert oracles.mult_order_of_x(list(F.modulus), 3) == 80


@pytest.mark.parametrize("p,m", SMALL)
def test_modulus_is_smallest_irreducible_with_primitive_x(p, m):
    F = field_new(p, m)
    f = list(F.modulus)
    assert len(f) == m + 1 and f[-1] == 1
    if m == 1:
        g = gfmod.smallest_primitive_root(p)
        assert f == [(-g) % p, 1]
        return
    assert oracles.is_irreducible_bruteforce(f, p)
    assert oracles.mult_order_of_x(f, p) == p ** m - 1
    # nothing smaller qualifies, comparing coefficient vectors written low to high
    for tail in itertools.product(range(p), repeat=m):
        cand = list(tail) + [1]
        if tuple(cand) >= tuple(f):
            continue
        ok = oracles.is_irreducible_bruteforce(cand, p) and oracles.mult_order_of_x(cand, p) == p ** m - 1
        assert not ok, cand


@pytest.mark.parametrize("p,m", SMALL)
def test_log_tables_are_bijective(p, m):
    F = field_new(p, m)
    q = p ** m
    assert sorted(F.antilog_table.tolist()) == list(range(1, q))
    for i in range(q - 1):
        assert F.log_table[F.antilog_table[i]] == i
    assert F.log_table[0] == -1


@pytest.mark.parametrize("p,m", [(2, 3), (3, 2), (2, 4), (5, 2), (3, 3), (2, 7), (11, 2)])
def test_table_multiplication_matches_polynomials(p, m):
    F = field_new(p, m)
    q = p ** m
    M = F.mul_table()
    f = list(F.modulus)
    rng = np.random.default_rng(p * 100 + m)
    pairs = itertools.product(range(q), repeat=2) if q <= 32 else \
        (tuple(x) for x in rng.integers(0, q, size=(3000, 2)))
    for a, b in pairs:
        assert M[a, b] == oracles.field_codes_product(a, b, f, p, m)


def test_exponent_law_exhaustive_small():
    F = field_new(2, 4)
    for i in range(15):
        for j in range(15):
            assert F.mul(F.antilog(i), F.antilog(j)) == F.antilog(i + j)


def test_element_ops():
    F = field_new(5, 2)
    x = F.element([2, 3])
    y = F.element([4, 1])
    assert F.sub(F.add(x, y), y) == x
    assert F.add(x, F.neg(x)) == F.zero
    assert F.mul(x, F.inv(x)) == F.one
    assert F.mul(x, y) == F.poly_mul(x, y)
    assert F.pow(x, 24) == F.one
    assert F.pow(F.zero, 0) == F.one


def test_add_table_codes():
    F = field_new(3, 2)
    A = F.add_table()
    for a in range(9):
        for b in range(9):
            assert A[a, b] == F.add_code(a, b)


def test_errors():
    with pytest.raises(NotPrime):
        FiniteField(4, 1)
    F = field_new(7, 1)
    with pytest.raises(ZeroElement):
        dlog(F, F.zero)


def test_subfield_test():
    F = field_new(3, 4)
    assert subfield_test(F, F.zero, 2)
    assert subfield_test(F, F.antilog(10), 2)
    assert not subfield_test(F, F.antilog(1), 2)
    with pytest.raises(NotASubfield):
        subfield_test(F, F.one, 3)


def test_field_new_is_deterministic():
    a = FiniteField(2, 6)
    b = FiniteField(2, 6)
    assert a.modulus == b.modulus
    assert np.array_equal(a.antilog_table, b.antilog_table)


def test_tables_are_read_only():
    F = field_new(2, 3)
    with pytest.raises(ValueError):
        F.log_table[1] = 5
