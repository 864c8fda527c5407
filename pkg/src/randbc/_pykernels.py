"""Pure-python numerical kernels (fallback backend).

Mirrors randbc._kernels (the Cython extension) operation-for-operation so the
two backends agree to rounding.  Hot paths: Bessel J_k / spherical j_l of
complex argument, and the radial finite-difference shooting recurrence.
"""
import math

BACKEND_NAME = "python"

_RESCALE = 1e250
_TINY_SEED = 1e-30


def _cexp(z):
    e = math.exp(z.real)
    return complex(e * math.cos(z.imag), e * math.sin(z.imag))


def _ccos(z):
    return complex(math.cos(z.real) * math.cosh(z.imag),
                   -math.sin(z.real) * math.sinh(z.imag))


def _csin(z):
    return complex(math.sin(z.real) * math.cosh(z.imag),
                   math.cos(z.real) * math.sinh(z.imag))


def _csqrt(z):
    r = abs(z)
    if r == 0.0:
        return 0j
    th = 0.5 * math.atan2(z.imag, z.real)
    rt = math.sqrt(r)
    return complex(rt * math.cos(th), rt * math.sin(th))


def _bessel_series_pair(k, x):
    # J_k and J_{k+1} by ascending series; safe for |x| <= 12 or k >= |x|^2/2.
    def one(order):
        head = 1.0 + 0j
        half = x / 2.0
        for i in range(1, order + 1):
            head *= half / i
        term = head
        total = term
        x2 = -(half * half)
        for m in range(1, 500):
            term *= x2 / (m * (m + order))
            total += term
            if abs(term) <= 1e-18 * abs(total) + 1e-305:
                break
        return total

    jk = one(k)
    jk1 = one(k + 1)
    return jk, (k / x) * jk - jk1


_IPOW = (1.0 + 0j, -1j, -1.0 + 0j, 1j)  # (-1j) ** n, exactly


def _bessel_miller_pair(k, x):
    # Backward recurrence; x canonicalized to Re >= 0, Im >= 0 by the caller.
    # Real x: normalize with J0 + 2*sum J_{2m} = 1.  Off the real axis that sum
    # cancels catastrophically (terms ~ e^{Im x} adding up to 1), so use
    # J0 + 2*sum (-i)^n J_n = e^{-ix}, whose target matches the term scale.
    ax = abs(x)
    n_start = (k + int(math.ceil(ax)) + 20
               + int(math.ceil(7.0 * ax ** (1.0 / 3.0))))
    if n_start % 2 == 1:
        n_start += 1
    real_axis = x.imag == 0.0
    jp = 0.0 + 0j
    jc = _TINY_SEED + 0j
    norm = 0.0 + 0j
    out_k = 0j
    out_k1 = 0j
    phase = _IPOW[n_start % 4]
    for m in range(n_start, 0, -1):
        jm = (2.0 * m / x) * jc - jp
        jp = jc
        jc = jm
        phase *= 1j
        if m - 1 == k:
            out_k = jc
        if m - 1 == k + 1:
            out_k1 = jc
        if m - 1 > 0:
            if real_axis:
                if (m - 1) % 2 == 0:
                    norm += 2.0 * jc
            else:
                norm += 2.0 * phase * jc
        if max(abs(jc.real), abs(jc.imag)) > _RESCALE:
            jp /= _RESCALE
            jc /= _RESCALE
            norm /= _RESCALE
            out_k /= _RESCALE
            out_k1 /= _RESCALE
    norm += jc
    if not real_axis:
        norm /= _cexp(-1j * x)
    jk = out_k / norm
    jk1 = out_k1 / norm
    return jk, (k / x) * jk - jk1


def _bessel_asym_one(k, x):
    # Hankel large-argument expansion; caller guarantees |x| >= max(50, 4k^2).
    mu = 4.0 * k * k
    chi = x - (0.5 * k + 0.25) * math.pi
    p = 1.0 + 0j
    q = 0.0 + 0j
    term = 1.0 + 0j
    prev = 1e300
    for j in range(1, 40):
        term *= (mu - (2 * j - 1) ** 2) / (8.0 * j * x)
        t = abs(term)
        if t > prev:
            break
        prev = t
        if j % 2 == 1:
            q += term if j % 4 == 1 else -term
        else:
            p += term if j % 4 == 0 else -term
        if t < 1e-17:
            break
    amp = _csqrt(2.0 / (math.pi * x))
    return amp * (p * _ccos(chi) - q * _csin(chi))


def _bessel_asym_pair(k, x):
    jk = _bessel_asym_one(k, x)
    if k == 0:
        return jk, -_bessel_asym_one(1, x)
    jkm1 = _bessel_asym_one(k - 1, x)
    return jk, jkm1 - (k / x) * jk


def bessel_jk(k, x):
    """J_k(x) and J_k'(x) for integer k >= 0, complex x."""
    x = complex(x)
    if x.real < 0.0:
        v, d = bessel_jk(k, -x)
        s = -1.0 if k % 2 else 1.0
        return s * v, -s * d
    if x.imag < 0.0:
        v, d = bessel_jk(k, x.conjugate())
        return v.conjugate(), d.conjugate()
    ax = abs(x)
    if ax == 0.0:
        if k == 0:
            return 1.0 + 0j, 0.0 + 0j
        return 0.0 + 0j, (0.5 + 0j if k == 1 else 0.0 + 0j)
    if ax <= 12.0 or ax * ax <= 2.0 * (k + 1):
        return _bessel_series_pair(k, x)
    if ax >= 50.0 and ax >= 4.0 * k * k:
        return _bessel_asym_pair(k, x)
    return _bessel_miller_pair(k, x)


def _spherical_series_pair(l, x):
    def one(order):
        head = 1.0 + 0j
        for i in range(1, order + 1):
            head *= x / (2 * i + 1)
        term = head
        total = term
        x2 = -(x * x / 2.0)
        for m in range(1, 500):
            term *= x2 / (m * (2 * order + 2 * m + 1))
            total += term
            if abs(term) <= 1e-18 * abs(total) + 1e-305:
                break
        return total

    jl = one(l)
    jl1 = one(l + 1)
    return jl, (l / x) * jl - jl1


def spherical_jl(l, x):
    """Spherical j_l(x) and j_l'(x) for integer l >= 0, complex x.

    Tiny arguments by series; otherwise backward recurrence rescaled against
    the exact closed form j_0 = sin(x)/x (or j_1 when j_0 sits near a zero),
    which stays accurate on both sides of the turning point.
    """
    x = complex(x)
    if x.real < 0.0:
        v, d = spherical_jl(l, -x)
        s = -1.0 if l % 2 else 1.0
        return s * v, -s * d
    if x.imag < 0.0:
        v, d = spherical_jl(l, x.conjugate())
        return v.conjugate(), d.conjugate()
    ax = abs(x)
    if ax == 0.0:
        if l == 0:
            return 1.0 + 0j, 0.0 + 0j
        return 0.0 + 0j, (complex(1.0 / 3.0) if l == 1 else 0.0 + 0j)
    if ax <= 0.5:
        return _spherical_series_pair(l, x)
    n_start = (l + int(math.ceil(ax)) + 20
               + int(math.ceil(7.0 * ax ** (1.0 / 3.0))))
    jp = 0.0 + 0j
    jc = _TINY_SEED + 0j
    out_l = 0j
    out_l1 = 0j
    for m in range(n_start, 0, -1):
        jm = (2 * m + 1) / x * jc - jp
        jp = jc
        jc = jm
        if m - 1 == l:
            out_l = jc
        if m - 1 == l + 1:
            out_l1 = jc
        if max(abs(jc.real), abs(jc.imag)) > _RESCALE:
            jp /= _RESCALE
            jc /= _RESCALE
            out_l /= _RESCALE
            out_l1 /= _RESCALE
    j0e = _csin(x) / x
    j1e = _csin(x) / (x * x) - _ccos(x) / x
    scale = j0e / jc if abs(j0e) >= abs(j1e) else j1e / jp
    jl = out_l * scale
    jl1 = out_l1 * scale
    return jl, (l / x) * jl - jl1


def fd_radial_edge(dim, mode, lam, ab, n_grid):
    """Shoot the conservative radial FD scheme on (0, 1].

    Second-difference discretization of
        -(1/(ab r^{d-1})) (r^{d-1} u')' + mu/(ab r^2) u = lam^2 u
    with mu the angular eigenvalue, regular start at r=0, plus a ghost node
    past r=1.  Returns (u_{M-1}, u_M, u_{M+1}) up to a common positive factor
    (downscaled on overflow; only ratios are meaningful).
    """
    m_nodes = n_grid
    h = 1.0 / m_nodes
    lam = complex(lam)
    lam2 = ab * lam * lam * h * h
    if dim == 2:
        mu = float(mode * mode)
        pw = 1
        lim = 2.0
    else:
        mu = float(mode * (mode + 1))
        pw = 2
        lim = 3.0
    if mode == 0:
        um = 1.0 + 0j
        uc = um * (1.0 - lam2 / (2.0 * lim))
    else:
        um = 0.0 + 0j
        uc = 1.0 + 0j
    u_before = 0j
    for i in range(1, m_nodes + 1):
        if i == m_nodes:
            u_before = um
        r = i * h
        if pw == 1:
            rp = r + h / 2.0
            rm = r - h / 2.0
            cent = (mu / r) * h * h
        else:
            rp = (r + h / 2.0) ** 2
            rm = (r - h / 2.0) ** 2
            cent = mu * h * h
        un = ((rp + rm + cent - lam2 * r**pw) * uc - rm * um) / rp
        um = uc
        uc = un
        if max(abs(uc.real), abs(uc.imag)) > 1e200:
            um /= 1e200
            uc /= 1e200
            u_before /= 1e200
    return u_before, um, uc
