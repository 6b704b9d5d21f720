"""Jacobi elliptic functions sn, cn, dn and the complete elliptic integral K.

All routines use the arithmetic-geometric mean (AGM) together with the
descending Landen recurrence for the Jacobi amplitude.  This is spectrally
accurate over the whole modulus range 0 <= k <= 1 and needs no external
special-function library.  The modulus convention is k itself (not m = k^2),
so ``jacobi_sn_cn_dn(u, 0.5)`` means sn(u | k=0.5).
"""

from __future__ import annotations

import math

_AGM_EPS = 1e-16
_AGM_MAX_ITER = 40


def _check_modulus(k: float) -> float:
    k = float(k)
    if math.isnan(k) or not (0.0 <= k <= 1.0):
        raise ValueError(f"elliptic modulus must lie in [0, 1], got {k!r}")
    return k


def complete_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k) via the AGM.

    K(0) = pi/2; K diverges as k -> 1, so k = 1 is rejected.
    """
    k = _check_modulus(k)
    if k == 1.0:
        raise ValueError("K(k) diverges at k = 1")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def jacobi_am(u: float, k: float) -> float:
    """Continuous Jacobi amplitude am(u | k).

    Monotone in u for k < 1 (am(u + 2K) = am(u) + pi); no branch wrapping,
    which makes exp(i*am) == cn + i*sn safe to raise to arbitrary powers.
    """
    u = float(u)
    k = _check_modulus(k)
    if k == 0.0:
        return u
    if k == 1.0:
        # gudermannian of u; saturates at +-pi/2
        return math.asin(math.tanh(u))

    # reduce modulo the half period so the forward AGM angle stays small
    big_k = complete_k(k)
    n = math.floor(u / (2.0 * big_k))
    r = u - 2.0 * big_k * n

    a = [1.0]
    b = [math.sqrt((1.0 - k) * (1.0 + k))]
    c = [k]
    while abs(c[-1]) > _AGM_EPS * a[-1] and len(a) < _AGM_MAX_ITER:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))

    last = len(a) - 1
    phi = float(2 ** last) * a[last] * r
    for i in range(last, 0, -1):
        s = c[i] * math.sin(phi) / a[i]
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, s))))
    return n * math.pi + phi


def jacobi_sn_cn_dn(u: float, k: float) -> tuple[float, float, float]:
    """Jacobi sn, cn, dn evaluated simultaneously at real u, modulus k.

    Limits: (sin u, cos u, 1) at k = 0 and (tanh u, sech u, sech u) at k = 1.
    dn is recovered from dn^2 = 1 - k^2 sn^2, which is exact for real
    arguments since dn >= k' >= 0 throughout.
    """
    k = _check_modulus(k)
    if k == 1.0:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech
    phi = jacobi_am(u, k)
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(max(0.0, 1.0 - (k * sn) ** 2))
    return sn, cn, dn
