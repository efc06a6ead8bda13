# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(q) kernels: same contract as smbmm._kernels.pure.

All arithmetic uses unsigned 128-bit intermediates, so any prime
modulus below 2**64 is handled exactly. Moduli below 2**32 take a
faster path that defers reduction across whole dot products.
"""

from libc.stdlib cimport free, malloc

ctypedef unsigned long long u64

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


cdef inline u64 mulmod(u64 a, u64 b, u64 q) noexcept nogil:
    return <u64>((<u128>a * b) % q)


cdef u64 powmod(u64 a, u64 e, u64 q) noexcept nogil:
    cdef u64 r = 1 % q
    a %= q
    while e:
        if e & 1:
            r = mulmod(r, a, q)
        a = mulmod(a, a, q)
        e >>= 1
    return r


cdef u64* _to_array(object seq, Py_ssize_t size) except NULL:
    cdef u64* buf = <u64*>malloc(size * sizeof(u64))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(size):
        buf[i] = seq[i]
    return buf


def matmul_mod(a, b, Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, q):
    """(n x k) @ (k x m) over GF(q), flat row-major operands and result."""
    cdef u64 qq = q
    cdef bint small = qq <= 0xFFFFFFFF
    cdef u64* aa = _to_array(a, n * k)
    cdef u64* bb
    cdef u64* oo
    try:
        bb = _to_array(b, k * m)
    except:  # noqa: E722 - release aa before propagating
        free(aa)
        raise
    oo = <u64*>malloc(n * m * sizeof(u64))
    if oo == NULL:
        free(aa)
        free(bb)
        raise MemoryError()
    cdef Py_ssize_t i, j, t
    cdef u64 av
    cdef u128 acc
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0
                if small:
                    # products fit in 64 bits; one reduction per dot product
                    for t in range(k):
                        acc += <u128>aa[i * k + t] * bb[t * m + j]
                else:
                    for t in range(k):
                        av = aa[i * k + t]
                        if av:
                            acc = (acc + <u128>av * bb[t * m + j]) % qq
                oo[i * m + j] = <u64>(acc % qq)
    out = [oo[i] for i in range(n * m)]
    free(aa)
    free(bb)
    free(oo)
    return out


def axpy_mod(list dst, src, c, q):
    """dst += c * src (elementwise, in place)."""
    cdef u64 qq = q
    cdef u64 cc = c
    cdef Py_ssize_t i, size = len(dst)
    if cc == 0:
        return
    for i in range(size):
        # sum can exceed 64 bits when q is close to 2**64
        dst[i] = <u64>(((<u128>(<u64>dst[i])) + mulmod(cc, <u64>src[i], qq)) % qq)


def lu_factor_mod(a, Py_ssize_t n, q):
    """PA = LU with first-nonzero pivoting; returns (lu, perm, dinv)."""
    cdef u64 qq = q
    cdef u64* lu = _to_array(a, n * n)
    cdef Py_ssize_t* perm = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef u64* dinv = <u64*>malloc(n * sizeof(u64))
    if perm == NULL or dinv == NULL:
        free(lu)
        if perm != NULL:
            free(perm)
        if dinv != NULL:
            free(dinv)
        raise MemoryError()
    cdef Py_ssize_t col, r, j, piv
    cdef u64 inv_p, f, tmp
    cdef bint singular = 0
    with nogil:
        for col in range(n):
            perm[col] = col
        for col in range(n):
            piv = -1
            for r in range(col, n):
                if lu[r * n + col] % qq:
                    piv = r
                    break
            if piv < 0:
                singular = 1
                break
            if piv != col:
                for j in range(n):
                    tmp = lu[piv * n + j]
                    lu[piv * n + j] = lu[col * n + j]
                    lu[col * n + j] = tmp
                r = perm[piv]
                perm[piv] = perm[col]
                perm[col] = r
            inv_p = powmod(lu[col * n + col] % qq, qq - 2, qq)
            dinv[col] = inv_p
            for r in range(col + 1, n):
                f = lu[r * n + col] % qq
                if f:
                    f = mulmod(f, inv_p, qq)
                    lu[r * n + col] = f
                    for j in range(col + 1, n):
                        # widen: value + qq can exceed 64 bits near 2**64
                        lu[r * n + j] = <u64>((<u128>(lu[r * n + j] % qq) + qq
                                               - mulmod(f, lu[col * n + j] % qq, qq)) % qq)
    if singular:
        free(lu)
        free(perm)
        free(dinv)
        raise ZeroDivisionError("singular matrix")
    lu_list = [lu[j] for j in range(n * n)]
    perm_list = [perm[j] for j in range(n)]
    dinv_list = [dinv[j] for j in range(n)]
    free(lu)
    free(perm)
    free(dinv)
    return lu_list, perm_list, dinv_list


def lu_solve_mod(lu, perm, dinv, Py_ssize_t n, rhs, q):
    """Solve L U x = P rhs for one column."""
    cdef u64 qq = q
    cdef bint small = qq <= 0xFFFFFFFF
    cdef u64* lubuf = _to_array(lu, n * n)
    cdef u64* x = <u64*>malloc(n * sizeof(u64))
    cdef u64* dv
    if x == NULL:
        free(lubuf)
        raise MemoryError()
    try:
        dv = _to_array(dinv, n)
    except:  # noqa: E722
        free(lubuf)
        free(x)
        raise
    cdef Py_ssize_t i, j
    for i in range(n):
        x[i] = rhs[perm[i]]
    cdef u128 acc
    with nogil:
        for i in range(1, n):
            acc = x[i]
            if small:
                for j in range(i):
                    acc += <u128>lubuf[i * n + j] * (qq - x[j])
            else:
                for j in range(i):
                    acc = (acc + <u128>lubuf[i * n + j] * (qq - x[j])) % qq
            x[i] = <u64>(acc % qq)
        for i in range(n - 1, -1, -1):
            acc = x[i]
            if small:
                for j in range(i + 1, n):
                    acc += <u128>lubuf[i * n + j] * (qq - x[j])
            else:
                for j in range(i + 1, n):
                    acc = (acc + <u128>lubuf[i * n + j] * (qq - x[j])) % qq
            x[i] = mulmod(<u64>(acc % qq), dv[i], qq)
    out = [x[i] for i in range(n)]
    free(lubuf)
    free(x)
    free(dv)
    return out
