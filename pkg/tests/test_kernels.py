"""Parity between the pure-Python and compiled kernel backends.

The compiled module is optional; parity tests skip when it is absent,
everything else runs against whichever backend was selected at import.
"""

import random

import pytest

from smbmm import _kernels
from smbmm._kernels import pure

fast = pytest.importorskip("smbmm._kernels._fastcore")

MODULI = [5, 101, 257, 7919, (1 << 61) - 1, 18446744073709551557]


def test_backend_selected():
    assert _kernels.backend in ("pure", "compiled")


@pytest.mark.parametrize("q", MODULI)
def test_matmul_parity(q):
    rnd = random.Random(q)
    for _ in range(6):
        n, k, m = rnd.randint(1, 7), rnd.randint(1, 7), rnd.randint(1, 7)
        a = [rnd.randrange(q) for _ in range(n * k)]
        b = [rnd.randrange(q) for _ in range(k * m)]
        assert pure.matmul_mod(a, b, n, k, m, q) == fast.matmul_mod(a, b, n, k, m, q)


@pytest.mark.parametrize("q", MODULI)
def test_axpy_parity(q):
    rnd = random.Random(q + 1)
    for _ in range(6):
        d1 = [rnd.randrange(q) for _ in range(9)]
        d2 = list(d1)
        s = [rnd.randrange(q) for _ in range(9)]
        c = rnd.randrange(q)
        pure.axpy_mod(d1, s, c, q)
        fast.axpy_mod(d2, s, c, q)
        assert d1 == d2


@pytest.mark.parametrize("q", MODULI)
def test_lu_parity_and_correctness(q):
    rnd = random.Random(q + 2)
    solved = 0
    while solved < 5:
        n = rnd.randint(1, 9)
        mat = [rnd.randrange(q) for _ in range(n * n)]
        try:
            lu1 = pure.lu_factor_mod(mat, n, q)
        except ZeroDivisionError:
            with pytest.raises(ZeroDivisionError):
                fast.lu_factor_mod(mat, n, q)
            continue
        lu2 = fast.lu_factor_mod(mat, n, q)
        assert all(list(x) == list(y) for x, y in zip(lu1, lu2))
        rhs = [rnd.randrange(q) for _ in range(n)]
        x1 = pure.lu_solve_mod(*lu1, n, rhs, q)
        assert x1 == fast.lu_solve_mod(*lu2, n, rhs, q)
        # check against the original system
        assert [sum(mat[i * n + j] * x1[j] for j in range(n)) % q
                for i in range(n)] == rhs
        solved += 1


def test_lu_singular_raises():
    mat = [1, 2, 2, 4]
    with pytest.raises(ZeroDivisionError):
        pure.lu_factor_mod(mat, 2, 7)
    with pytest.raises(ZeroDivisionError):
        fast.lu_factor_mod(mat, 2, 7)
