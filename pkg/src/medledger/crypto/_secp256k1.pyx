# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled secp256k1 point arithmetic (hot kernel).

Same contract as the pure-Python kernel in _secp256k1_py: affine int
coordinates in, affine int coordinates out, so the two backends are
byte-for-byte interchangeable and differential-testable.

Field elements are four little-endian uint64 limbs, kept fully reduced
mod p = 2^256 - 2^32 - 977; products reduce via the identity
2^256 = 0x1000003D1 (mod p). Points use Jacobian coordinates (Z = 0 is
infinity). The base point uses a 32x256 fixed-window comb table so a
base multiplication needs no doublings; arbitrary points use width-5 wNAF.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy, memset

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

BACKEND = "cython"

# ---------------------------------------------------------------------------
# field constants
# ---------------------------------------------------------------------------

cdef uint64_t P0 = 0xFFFFFFFEFFFFFC2F
cdef uint64_t P1 = 0xFFFFFFFFFFFFFFFF
cdef uint64_t P2 = 0xFFFFFFFFFFFFFFFF
cdef uint64_t P3 = 0xFFFFFFFFFFFFFFFF
cdef uint64_t PC = 0x1000003D1          # 2^256 - p, fits in 33 bits

# p - 2, exponent for Fermat inversion
cdef uint64_t PM2[4]
PM2[0] = 0xFFFFFFFEFFFFFC2D
PM2[1] = 0xFFFFFFFFFFFFFFFF
PM2[2] = 0xFFFFFFFFFFFFFFFF
PM2[3] = 0xFFFFFFFFFFFFFFFF

N_ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

# ---------------------------------------------------------------------------
# field arithmetic on uint64_t[4]
# ---------------------------------------------------------------------------

cdef inline void fe_copy(uint64_t* r, const uint64_t* a):
    r[0] = a[0]; r[1] = a[1]; r[2] = a[2]; r[3] = a[3]

cdef inline void fe_zero(uint64_t* r):
    r[0] = 0; r[1] = 0; r[2] = 0; r[3] = 0

cdef inline int fe_is_zero(const uint64_t* a):
    return (a[0] | a[1] | a[2] | a[3]) == 0

cdef inline int fe_eq(const uint64_t* a, const uint64_t* b):
    return a[0] == b[0] and a[1] == b[1] and a[2] == b[2] and a[3] == b[3]

cdef inline int fe_ge_p(const uint64_t* a):
    # P1..P3 are all-ones limbs, so a >= p iff the top limbs saturate
    return a[1] == P1 and a[2] == P2 and a[3] == P3 and a[0] >= P0

cdef inline void fe_sub_p_inplace(uint64_t* a):
    # a -= p, caller guarantees a >= p
    cdef u128 t
    cdef uint64_t borrow = 0
    t = <u128>a[0] - P0
    a[0] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[1] - P1 - borrow
    a[1] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[2] - P2 - borrow
    a[2] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[3] - P3 - borrow
    a[3] = <uint64_t>t

cdef inline void fe_reduce_once(uint64_t* a):
    if fe_ge_p(a):
        fe_sub_p_inplace(a)

cdef void fe_add(uint64_t* r, const uint64_t* a, const uint64_t* b):
    cdef u128 t = <u128>a[0] + b[0]
    cdef uint64_t carry
    r[0] = <uint64_t>t; carry = <uint64_t>(t >> 64)
    t = <u128>a[1] + b[1] + carry
    r[1] = <uint64_t>t; carry = <uint64_t>(t >> 64)
    t = <u128>a[2] + b[2] + carry
    r[2] = <uint64_t>t; carry = <uint64_t>(t >> 64)
    t = <u128>a[3] + b[3] + carry
    r[3] = <uint64_t>t; carry = <uint64_t>(t >> 64)
    if carry:
        # fold 2^256 back in as +PC; cannot carry again (sum < 2p)
        t = <u128>r[0] + PC
        r[0] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        t = <u128>r[1] + carry
        r[1] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        t = <u128>r[2] + carry
        r[2] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        r[3] = r[3] + carry
    else:
        fe_reduce_once(r)

cdef void fe_sub(uint64_t* r, const uint64_t* a, const uint64_t* b):
    cdef u128 t
    cdef uint64_t borrow, carry
    t = <u128>a[0] - b[0]
    r[0] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[1] - b[1] - borrow
    r[1] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[2] - b[2] - borrow
    r[2] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    t = <u128>a[3] - b[3] - borrow
    r[3] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    if borrow:
        # add p back
        t = <u128>r[0] + P0
        r[0] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        t = <u128>r[1] + P1 + carry
        r[1] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        t = <u128>r[2] + P2 + carry
        r[2] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        r[3] = r[3] + P3 + carry

cdef void fe_mul(uint64_t* r, const uint64_t* a, const uint64_t* b):
    cdef uint64_t t[8]
    cdef u128 cur
    cdef uint64_t carry
    cdef int i, j
    memset(t, 0, sizeof(t))
    for i in range(4):
        carry = 0
        for j in range(4):
            cur = <u128>a[i] * b[j] + t[i + j] + carry
            t[i + j] = <uint64_t>cur
            carry = <uint64_t>(cur >> 64)
        t[i + 4] = carry
    fe_reduce512(r, t)

cdef void fe_sqr(uint64_t* r, const uint64_t* a):
    # squaring: off-diagonal products computed once and doubled
    cdef uint64_t t[8]
    cdef u128 cur
    cdef uint64_t carry, lo, hi
    cdef int i, j
    memset(t, 0, sizeof(t))
    for i in range(4):
        carry = 0
        for j in range(i + 1, 4):
            cur = <u128>a[i] * a[j] + t[i + j] + carry
            t[i + j] = <uint64_t>cur
            carry = <uint64_t>(cur >> 64)
        t[i + 4] = carry
    # double the off-diagonal part
    carry = 0
    for i in range(1, 8):
        lo = t[i]
        t[i] = (lo << 1) | carry
        carry = lo >> 63
    # add the diagonal squares
    carry = 0
    for i in range(4):
        cur = <u128>a[i] * a[i] + t[2 * i] + carry
        t[2 * i] = <uint64_t>cur
        cur = (cur >> 64) + t[2 * i + 1]
        t[2 * i + 1] = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
    fe_reduce512(r, t)

cdef void fe_reduce512(uint64_t* r, const uint64_t* t):
    # fold t[4..7] * PC into t[0..3]; shared by fe_mul and fe_sqr
    cdef u128 cur
    cdef uint64_t carry, c4
    cdef uint64_t m[4]
    cur = <u128>t[4] * PC + t[0]
    m[0] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
    cur = <u128>t[5] * PC + t[1] + carry
    m[1] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
    cur = <u128>t[6] * PC + t[2] + carry
    m[2] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
    cur = <u128>t[7] * PC + t[3] + carry
    m[3] = <uint64_t>cur; c4 = <uint64_t>(cur >> 64)
    while True:
        cur = <u128>c4 * PC + m[0]
        m[0] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
        cur = <u128>m[1] + carry
        m[1] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
        cur = <u128>m[2] + carry
        m[2] = <uint64_t>cur; carry = <uint64_t>(cur >> 64)
        cur = <u128>m[3] + carry
        m[3] = <uint64_t>cur; c4 = <uint64_t>(cur >> 64)
        if c4 == 0:
            break
    fe_reduce_once(m)
    fe_copy(r, m)

cdef void fe_inv(uint64_t* r, const uint64_t* a):
    # Fermat: a^(p-2) mod p, plain square-and-multiply MSB->LSB
    cdef uint64_t acc[4]
    cdef int i
    cdef int started = 0
    acc[0] = 1; acc[1] = 0; acc[2] = 0; acc[3] = 0
    for i in range(255, -1, -1):
        if started:
            fe_sqr(acc, acc)
        if (PM2[i >> 6] >> (i & 63)) & 1:
            if started:
                fe_mul(acc, acc, a)
            else:
                fe_copy(acc, a)
                started = 1
    fe_copy(r, acc)

# ---------------------------------------------------------------------------
# point arithmetic (Jacobian; Z == 0 is infinity)
# ---------------------------------------------------------------------------

cdef struct JP:
    uint64_t x[4]
    uint64_t y[4]
    uint64_t z[4]

cdef struct AP:
    uint64_t x[4]
    uint64_t y[4]

cdef inline int pt_is_inf(const JP* a):
    return fe_is_zero(a.z)

cdef inline void pt_set_inf(JP* a):
    fe_zero(a.x); fe_zero(a.y); fe_zero(a.z)
    a.x[0] = 1; a.y[0] = 1

cdef inline void pt_from_affine(JP* r, const AP* a):
    fe_copy(r.x, a.x); fe_copy(r.y, a.y)
    fe_zero(r.z); r.z[0] = 1

cdef void pt_double(JP* r, const JP* a):
    # dbl-2009-l for a=0 curves
    cdef uint64_t A_[4]
    cdef uint64_t B_[4]
    cdef uint64_t C_[4]
    cdef uint64_t D_[4]
    cdef uint64_t E_[4]
    cdef uint64_t F_[4]
    cdef uint64_t t[4]
    cdef uint64_t x3[4]
    cdef uint64_t y3[4]
    cdef uint64_t z3[4]
    if pt_is_inf(a):
        pt_set_inf(r)
        return
    fe_sqr(A_, a.x)
    fe_sqr(B_, a.y)
    fe_sqr(C_, B_)
    fe_add(t, a.x, B_)
    fe_sqr(t, t)
    fe_sub(t, t, A_)
    fe_sub(t, t, C_)
    fe_add(D_, t, t)
    fe_add(E_, A_, A_)
    fe_add(E_, E_, A_)
    fe_sqr(F_, E_)
    fe_sub(x3, F_, D_)
    fe_sub(x3, x3, D_)
    fe_sub(t, D_, x3)
    fe_mul(y3, E_, t)
    fe_add(C_, C_, C_)      # 2C
    fe_add(C_, C_, C_)      # 4C
    fe_add(C_, C_, C_)      # 8C
    fe_sub(y3, y3, C_)
    fe_mul(z3, a.y, a.z)
    fe_add(z3, z3, z3)
    fe_copy(r.x, x3); fe_copy(r.y, y3); fe_copy(r.z, z3)

cdef void pt_add(JP* r, const JP* a, const JP* b):
    # add-2007-bl with doubling/infinity dispatch
    cdef uint64_t z1z1[4]
    cdef uint64_t z2z2[4]
    cdef uint64_t u1[4]
    cdef uint64_t u2[4]
    cdef uint64_t s1[4]
    cdef uint64_t s2[4]
    cdef uint64_t h[4]
    cdef uint64_t i_[4]
    cdef uint64_t j_[4]
    cdef uint64_t rr[4]
    cdef uint64_t v[4]
    cdef uint64_t t[4]
    cdef uint64_t x3[4]
    cdef uint64_t y3[4]
    cdef uint64_t z3[4]
    if pt_is_inf(a):
        r[0] = b[0]
        return
    if pt_is_inf(b):
        r[0] = a[0]
        return
    fe_sqr(z1z1, a.z)
    fe_sqr(z2z2, b.z)
    fe_mul(u1, a.x, z2z2)
    fe_mul(u2, b.x, z1z1)
    fe_mul(t, b.z, z2z2)
    fe_mul(s1, a.y, t)
    fe_mul(t, a.z, z1z1)
    fe_mul(s2, b.y, t)
    if fe_eq(u1, u2):
        if not fe_eq(s1, s2):
            pt_set_inf(r)
        else:
            pt_double(r, a)
        return
    fe_sub(h, u2, u1)
    fe_add(t, h, h)
    fe_sqr(i_, t)
    fe_mul(j_, h, i_)
    fe_sub(rr, s2, s1)
    fe_add(rr, rr, rr)
    fe_mul(v, u1, i_)
    fe_sqr(x3, rr)
    fe_sub(x3, x3, j_)
    fe_sub(x3, x3, v)
    fe_sub(x3, x3, v)
    fe_sub(t, v, x3)
    fe_mul(y3, rr, t)
    fe_mul(t, s1, j_)
    fe_sub(y3, y3, t)
    fe_sub(y3, y3, t)
    fe_add(z3, a.z, b.z)
    fe_sqr(z3, z3)
    fe_sub(z3, z3, z1z1)
    fe_sub(z3, z3, z2z2)
    fe_mul(z3, z3, h)
    fe_copy(r.x, x3); fe_copy(r.y, y3); fe_copy(r.z, z3)

cdef void pt_add_affine(JP* r, const JP* a, const AP* b):
    # madd-2007-bl (Z2 = 1) with dispatch
    cdef uint64_t z1z1[4]
    cdef uint64_t u2[4]
    cdef uint64_t s2[4]
    cdef uint64_t h[4]
    cdef uint64_t hh[4]
    cdef uint64_t i_[4]
    cdef uint64_t j_[4]
    cdef uint64_t rr[4]
    cdef uint64_t v[4]
    cdef uint64_t t[4]
    cdef uint64_t x3[4]
    cdef uint64_t y3[4]
    cdef uint64_t z3[4]
    if pt_is_inf(a):
        pt_from_affine(r, b)
        return
    fe_sqr(z1z1, a.z)
    fe_mul(u2, b.x, z1z1)
    fe_mul(t, a.z, z1z1)
    fe_mul(s2, b.y, t)
    if fe_eq(u2, a.x):
        if not fe_eq(s2, a.y):
            pt_set_inf(r)
        else:
            pt_double(r, a)
        return
    fe_sub(h, u2, a.x)
    fe_sqr(hh, h)
    fe_add(i_, hh, hh)
    fe_add(i_, i_, i_)
    fe_mul(j_, h, i_)
    fe_sub(rr, s2, a.y)
    fe_add(rr, rr, rr)
    fe_mul(v, a.x, i_)
    fe_sqr(x3, rr)
    fe_sub(x3, x3, j_)
    fe_sub(x3, x3, v)
    fe_sub(x3, x3, v)
    fe_sub(t, v, x3)
    fe_mul(y3, rr, t)
    fe_mul(t, a.y, j_)
    fe_sub(y3, y3, t)
    fe_sub(y3, y3, t)
    fe_add(z3, a.z, h)
    fe_sqr(z3, z3)
    fe_sub(z3, z3, z1z1)
    fe_sub(z3, z3, hh)
    fe_copy(r.x, x3); fe_copy(r.y, y3); fe_copy(r.z, z3)

cdef void pt_neg_inplace(JP* a):
    cdef uint64_t t[4]
    if not pt_is_inf(a) and not fe_is_zero(a.y):
        fe_zero(t)
        fe_sub(a.y, t, a.y)

cdef int pt_to_affine(const JP* a, uint64_t* ox, uint64_t* oy):
    # returns 0 for infinity
    cdef uint64_t zi[4]
    cdef uint64_t zi2[4]
    if pt_is_inf(a):
        return 0
    fe_inv(zi, a.z)
    fe_sqr(zi2, zi)
    fe_mul(ox, a.x, zi2)
    fe_mul(zi2, zi2, zi)
    fe_mul(oy, a.y, zi2)
    return 1

cdef void batch_to_affine(JP* src, AP* dst, int count):
    # Montgomery's trick: one inversion for the whole batch
    cdef uint64_t* prods = <uint64_t*>malloc(32 * count)
    cdef uint64_t acc[4]
    cdef uint64_t inv[4]
    cdef uint64_t zi[4]
    cdef uint64_t zi2[4]
    cdef int i
    fe_copy(acc, src[0].z)
    fe_copy(&prods[0], acc)
    for i in range(1, count):
        fe_mul(acc, acc, src[i].z)
        fe_copy(&prods[4 * i], acc)
    fe_inv(inv, acc)
    for i in range(count - 1, -1, -1):
        if i == 0:
            fe_copy(zi, inv)
        else:
            fe_mul(zi, inv, &prods[4 * (i - 1)])
            fe_mul(inv, inv, src[i].z)
        fe_sqr(zi2, zi)
        fe_mul(dst[i].x, src[i].x, zi2)
        fe_mul(zi2, zi2, zi)
        fe_mul(dst[i].y, src[i].y, zi2)
    free(prods)

# ---------------------------------------------------------------------------
# scalar helpers (5 limbs, little-endian, room for wNAF spill)
# ---------------------------------------------------------------------------

cdef inline int k_is_zero(const uint64_t* k):
    return (k[0] | k[1] | k[2] | k[3] | k[4]) == 0

cdef inline void k_rshift1(uint64_t* k):
    k[0] = (k[0] >> 1) | (k[1] << 63)
    k[1] = (k[1] >> 1) | (k[2] << 63)
    k[2] = (k[2] >> 1) | (k[3] << 63)
    k[3] = (k[3] >> 1) | (k[4] << 63)
    k[4] = k[4] >> 1

cdef inline void k_sub_small(uint64_t* k, uint64_t v):
    cdef u128 t = <u128>k[0] - v
    cdef uint64_t borrow
    cdef int i
    k[0] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
    i = 1
    while borrow and i < 5:
        t = <u128>k[i] - borrow
        k[i] = <uint64_t>t; borrow = 1 if (t >> 64) != 0 else 0
        i += 1

cdef inline void k_add_small(uint64_t* k, uint64_t v):
    cdef u128 t = <u128>k[0] + v
    cdef uint64_t carry
    cdef int i
    k[0] = <uint64_t>t; carry = <uint64_t>(t >> 64)
    i = 1
    while carry and i < 5:
        t = <u128>k[i] + carry
        k[i] = <uint64_t>t; carry = <uint64_t>(t >> 64)
        i += 1

cdef int wnaf_digits(signed char* out, uint64_t* k, int w):
    cdef uint64_t mask = (1 << w) - 1
    cdef uint64_t bound = 1 << (w - 1)
    cdef uint64_t d
    cdef int count = 0
    while not k_is_zero(k):
        if k[0] & 1:
            d = k[0] & mask
            if d >= bound:
                out[count] = <signed char>(<int64_t>d - (1 << w))
                k_add_small(k, (1 << w) - d)
            else:
                out[count] = <signed char>d
                k_sub_small(k, d)
        else:
            out[count] = 0
        count += 1
        k_rshift1(k)
    return count

# ---------------------------------------------------------------------------
# precomputed tables for the base point
# ---------------------------------------------------------------------------

cdef enum:
    COMB_WINDOWS = 32

cdef AP COMB[32][256]          # COMB[i][v] = (v << (8 i)) * G, v in 1..255
cdef AP G_AFFINE
cdef int TABLES_READY = 0

cdef void _int_to_limbs_py(object v, uint64_t* out):
    raw = int(v).to_bytes(32, "little")
    cdef const unsigned char[::1] b = raw
    cdef int i, j
    for i in range(4):
        out[i] = 0
        for j in range(7, -1, -1):
            out[i] = (out[i] << 8) | b[8 * i + j]

cdef object _limbs_to_int_py(const uint64_t* a):
    return (int(a[3]) << 192) | (int(a[2]) << 128) | (int(a[1]) << 64) | int(a[0])

cdef void _build_tables():
    global TABLES_READY
    cdef JP scratch[255]
    cdef JP acc
    cdef int col, v, d
    _int_to_limbs_py(_GX, G_AFFINE.x)
    _int_to_limbs_py(_GY, G_AFFINE.y)
    # column 0: 1G .. 255G
    pt_from_affine(&acc, &G_AFFINE)
    scratch[0] = acc
    for v in range(2, 256):
        pt_add_affine(&acc, &acc, &G_AFFINE)
        scratch[v - 1] = acc
    batch_to_affine(scratch, &COMB[0][1], 255)
    # column i: previous column doubled 8 times
    for col in range(1, COMB_WINDOWS):
        for v in range(1, 256):
            pt_from_affine(&acc, &COMB[col - 1][v])
            for d in range(8):
                pt_double(&acc, &acc)
            scratch[v - 1] = acc
        batch_to_affine(scratch, &COMB[col][1], 255)
    TABLES_READY = 1

cdef void comb_mul(JP* r, const uint64_t* k4):
    cdef int i
    cdef uint64_t b
    pt_set_inf(r)
    for i in range(COMB_WINDOWS):
        b = (k4[i >> 3] >> ((i & 7) * 8)) & 0xFF
        if b:
            pt_add_affine(r, r, &COMB[i][b])

cdef void wnaf_mul(JP* r, uint64_t* k5, const JP* base):
    # width-5 wNAF: odd multiples base, 3*base, ..., 15*base
    cdef JP table[8]
    cdef JP dbl
    cdef JP tmp
    cdef signed char digits[262]
    cdef int count, idx
    cdef int d
    table[0] = base[0]
    pt_double(&dbl, base)
    for idx in range(1, 8):
        pt_add(&table[idx], &table[idx - 1], &dbl)
    count = wnaf_digits(digits, k5, 5)
    pt_set_inf(r)
    for idx in range(count - 1, -1, -1):
        pt_double(r, r)
        d = digits[idx]
        if d > 0:
            pt_add(r, r, &table[(d - 1) >> 1])
        elif d < 0:
            tmp = table[(-d - 1) >> 1]
            pt_neg_inplace(&tmp)
            pt_add(r, r, &tmp)

# ---------------------------------------------------------------------------
# Python-facing API (mirrors _secp256k1_py)
# ---------------------------------------------------------------------------

def mul_base(k):
    """k * G in affine coordinates; k must not be a multiple of the order."""
    k = int(k) % N_ORDER
    if k == 0:
        raise ValueError("scalar is a multiple of the group order")
    cdef uint64_t limbs[5]
    cdef JP acc
    cdef uint64_t ox[4]
    cdef uint64_t oy[4]
    limbs[4] = 0
    _int_to_limbs_py(k, limbs)
    comb_mul(&acc, limbs)
    if not pt_to_affine(&acc, ox, oy):
        raise ValueError("scalar is a multiple of the group order")
    return (_limbs_to_int_py(ox), _limbs_to_int_py(oy))

def mul_point(k, x, y):
    """k * (x, y) in affine coordinates; result must not be infinity."""
    k = int(k) % N_ORDER
    cdef uint64_t limbs[5]
    cdef JP base
    cdef JP acc
    cdef uint64_t ox[4]
    cdef uint64_t oy[4]
    limbs[4] = 0
    _int_to_limbs_py(k, limbs)
    _int_to_limbs_py(x, base.x)
    _int_to_limbs_py(y, base.y)
    fe_zero(base.z); base.z[0] = 1
    wnaf_mul(&acc, limbs, &base)
    if not pt_to_affine(&acc, ox, oy):
        raise ValueError("scalar multiple landed on the point at infinity")
    return (_limbs_to_int_py(ox), _limbs_to_int_py(oy))

def mul_add(u1, u2, x, y):
    """u1 * G + u2 * (x, y) in affine coordinates, or None for infinity."""
    u1 = int(u1) % N_ORDER
    u2 = int(u2) % N_ORDER
    cdef uint64_t limbs[5]
    cdef JP base
    cdef JP acc
    cdef JP q
    cdef uint64_t ox[4]
    cdef uint64_t oy[4]
    limbs[4] = 0
    if u1:
        _int_to_limbs_py(u1, limbs)
        comb_mul(&acc, limbs)
    else:
        pt_set_inf(&acc)
    if u2:
        limbs[4] = 0
        _int_to_limbs_py(u2, limbs)
        _int_to_limbs_py(x, base.x)
        _int_to_limbs_py(y, base.y)
        fe_zero(base.z); base.z[0] = 1
        wnaf_mul(&q, limbs, &base)
        pt_add(&acc, &acc, &q)
    if not pt_to_affine(&acc, ox, oy):
        return None
    return (_limbs_to_int_py(ox), _limbs_to_int_py(oy))

P_INT = (1 << 256) - (1 << 32) - 977


def is_on_curve(x, y):
    cdef uint64_t fx[4]
    cdef uint64_t fy[4]
    cdef uint64_t lhs[4]
    cdef uint64_t rhs[4]
    cdef uint64_t seven[4]
    if not (0 <= int(x) < P_INT and 0 <= int(y) < P_INT):
        return False
    _int_to_limbs_py(x, fx)
    _int_to_limbs_py(y, fy)
    fe_sqr(lhs, fy)
    fe_sqr(rhs, fx)
    fe_mul(rhs, rhs, fx)
    fe_zero(seven); seven[0] = 7
    fe_add(rhs, rhs, seven)
    return bool(fe_eq(lhs, rhs))

# test hooks: field arithmetic exposed for differential checks
def _fe_mul_hook(a, b):
    cdef uint64_t fa[4]
    cdef uint64_t fb[4]
    cdef uint64_t fr[4]
    _int_to_limbs_py(a, fa)
    _int_to_limbs_py(b, fb)
    fe_mul(fr, fa, fb)
    return _limbs_to_int_py(fr)

def _fe_add_hook(a, b):
    cdef uint64_t fa[4]
    cdef uint64_t fb[4]
    cdef uint64_t fr[4]
    _int_to_limbs_py(a, fa)
    _int_to_limbs_py(b, fb)
    fe_add(fr, fa, fb)
    return _limbs_to_int_py(fr)

def _fe_sub_hook(a, b):
    cdef uint64_t fa[4]
    cdef uint64_t fb[4]
    cdef uint64_t fr[4]
    _int_to_limbs_py(a, fa)
    _int_to_limbs_py(b, fb)
    fe_sub(fr, fa, fb)
    return _limbs_to_int_py(fr)

def _fe_inv_hook(a):
    cdef uint64_t fa[4]
    cdef uint64_t fr[4]
    _int_to_limbs_py(a, fa)
    fe_inv(fr, fa)
    return _limbs_to_int_py(fr)

def _fe_sqr_hook(a):
    cdef uint64_t fa[4]
    cdef uint64_t fr[4]
    _int_to_limbs_py(a, fa)
    fe_sqr(fr, fa)
    return _limbs_to_int_py(fr)

_build_tables()
