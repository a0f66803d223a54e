"""Pure-Python secp256k1 point arithmetic.

Fallback kernel, selected when the compiled extension is unavailable or when
MEDLEDGER_PURE_ECC=1 is set. Exposes the same three entry points as the
compiled module; both kernels take and return affine coordinates as Python
ints, so results are directly comparable in differential tests.

Internals use Jacobian coordinates ((X, Y, Z) with x = X/Z^2, y = Y/Z^3);
the point at infinity is any triple with Z == 0.
"""

from __future__ import annotations

from .params import B, GX, GY, N, P

BACKEND = "pure-python"

_JINF = (1, 1, 0)


def _j_is_inf(pt) -> bool:
    return pt[2] == 0


def _j_double(pt):
    x, y, z = pt
    if z == 0:
        return _JINF
    # dbl-2009-l (a = 0)
    a = x * x % P
    b = y * y % P
    c = b * b % P
    d = 2 * ((x + b) * (x + b) - a - c) % P
    e = 3 * a % P
    f = e * e % P
    x3 = (f - 2 * d) % P
    y3 = (e * (d - x3) - 8 * c) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def _j_add(p, q):
    if p[2] == 0:
        return q
    if q[2] == 0:
        return p
    x1, y1, z1 = p
    x2, y2, z2 = q
    # add-2007-bl
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    u1 = x1 * z2z2 % P
    u2 = x2 * z1z1 % P
    s1 = y1 * z2 * z2z2 % P
    s2 = y2 * z1 * z1z1 % P
    if u1 == u2:
        if s1 != s2:
            return _JINF
        return _j_double(p)
    h = (u2 - u1) % P
    i = 4 * h * h % P
    j = h * i % P
    r = 2 * (s2 - s1) % P
    v = u1 * i % P
    x3 = (r * r - j - 2 * v) % P
    y3 = (r * (v - x3) - 2 * s1 * j) % P
    z3 = ((z1 + z2) * (z1 + z2) - z1z1 - z2z2) % P * h % P
    return (x3, y3, z3)


def _j_add_affine(p, ax, ay):
    """Mixed addition with an affine (never-infinite) point."""
    if p[2] == 0:
        return (ax, ay, 1)
    x1, y1, z1 = p
    # madd-2007-bl
    z1z1 = z1 * z1 % P
    u2 = ax * z1z1 % P
    s2 = ay * z1 * z1z1 % P
    if u2 == x1:
        if s2 != y1:
            return _JINF
        return _j_double(p)
    h = (u2 - x1) % P
    hh = h * h % P
    i = 4 * hh % P
    j = h * i % P
    r = 2 * (s2 - y1) % P
    v = x1 * i % P
    x3 = (r * r - j - 2 * v) % P
    y3 = (r * (v - x3) - 2 * y1 * j) % P
    z3 = ((z1 + h) * (z1 + h) - z1z1 - hh) % P
    return (x3, y3, z3)


def _j_to_affine(pt):
    if pt[2] == 0:
        return None
    x, y, z = pt
    zi = pow(z, -1, P)
    zi2 = zi * zi % P
    return (x * zi2 % P, y * zi2 * zi % P)


def _affine_double(x, y):
    lam = 3 * x * x * pow(2 * y, -1, P) % P
    x3 = (lam * lam - 2 * x) % P
    y3 = (lam * (x - x3) - y) % P
    return (x3, y3)


def _build_doubles_table():
    # table[i] = 2^i * G in affine coordinates
    table = [(GX, GY)]
    for _ in range(255):
        table.append(_affine_double(*table[-1]))
    return table

_G_DOUBLES = _build_doubles_table()


def _mul_base_j(k: int):
    acc = _JINF
    i = 0
    while k:
        if k & 1:
            gx, gy = _G_DOUBLES[i]
            acc = _j_add_affine(acc, gx, gy)
        k >>= 1
        i += 1
    return acc


def _mul_point_j(k: int, x: int, y: int):
    acc = _JINF
    for bit in reversed(range(k.bit_length())):
        acc = _j_double(acc)
        if (k >> bit) & 1:
            acc = _j_add_affine(acc, x, y)
    return acc


def mul_base(k: int):
    """k * G in affine coordinates; k must not be a multiple of the order."""
    pt = _j_to_affine(_mul_base_j(k % N))
    if pt is None:
        raise ValueError("scalar is a multiple of the group order")
    return pt


def mul_point(k: int, x: int, y: int):
    """k * (x, y) in affine coordinates; result must not be infinity."""
    pt = _j_to_affine(_mul_point_j(k % N, x, y))
    if pt is None:
        raise ValueError("scalar multiple landed on the point at infinity")
    return pt


def mul_add(u1: int, u2: int, x: int, y: int):
    """u1 * G + u2 * (x, y) in affine coordinates, or None for infinity."""
    acc = _j_add(_mul_base_j(u1 % N), _mul_point_j(u2 % N, x, y))
    return _j_to_affine(acc)


def is_on_curve(x: int, y: int) -> bool:
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - (x * x * x + B)) % P == 0
