# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled numerical kernels: Bessel J_k / spherical j_l of complex argument
and the radial finite-difference shooting recurrence.

Algorithm-identical to randbc._pykernels (the fallback backend); keep the two
in sync operation-for-operation.
"""
from libc.math cimport atan2, ceil, cos, cosh, exp, fabs, sin, sinh, sqrt

BACKEND_NAME = "cython"

cdef double _RESCALE = 1e250
cdef double _TINY_SEED = 1e-30


cdef inline double complex _cexp(double complex z):
    cdef double e = exp(z.real)
    return e * cos(z.imag) + 1j * (e * sin(z.imag))


cdef inline double complex _ccos(double complex z):
    return cos(z.real) * cosh(z.imag) - 1j * (sin(z.real) * sinh(z.imag))


cdef inline double complex _csin(double complex z):
    return sin(z.real) * cosh(z.imag) + 1j * (cos(z.real) * sinh(z.imag))


cdef inline double complex _csqrt(double complex z):
    cdef double r = abs(z)
    if r == 0.0:
        return 0
    cdef double th = 0.5 * atan2(z.imag, z.real)
    cdef double rt = sqrt(r)
    return rt * cos(th) + 1j * (rt * sin(th))


cdef inline double complex _ipow(long n):
    # (-1j) ** n for n >= 0, exactly
    cdef long r = n % 4
    if r == 0:
        return 1.0 + 0j
    if r == 1:
        return -1j
    if r == 2:
        return -1.0 + 0j
    return 1j


cdef double complex _series_one(long order, double complex x):
    cdef double complex head = 1.0 + 0j
    cdef double complex half = x / 2.0
    cdef long i, m
    for i in range(1, order + 1):
        head = head * (half / i)
    cdef double complex term = head
    cdef double complex total = term
    cdef double complex x2 = -(half * half)
    for m in range(1, 500):
        term = term * (x2 / (m * (m + order)))
        total = total + term
        if abs(term) <= 1e-18 * abs(total) + 1e-305:
            break
    return total


cdef (double complex, double complex) _series_pair(long k, double complex x):
    cdef double complex jk = _series_one(k, x)
    cdef double complex jk1 = _series_one(k + 1, x)
    return jk, (<double>k / x) * jk - jk1


cdef (double complex, double complex) _miller_pair(long k, double complex x):
    cdef double ax = abs(x)
    cdef long n_start = (k + <long>ceil(ax) + 20
                         + <long>ceil(7.0 * ax ** (1.0 / 3.0)))
    if n_start % 2 == 1:
        n_start += 1
    cdef bint real_axis = x.imag == 0.0
    cdef double complex jp = 0
    cdef double complex jc = _TINY_SEED
    cdef double complex norm = 0
    cdef double complex out_k = 0
    cdef double complex out_k1 = 0
    cdef double complex phase = _ipow(n_start)
    cdef double complex jm
    cdef long m
    for m in range(n_start, 0, -1):
        jm = (2.0 * m / x) * jc - jp
        jp = jc
        jc = jm
        phase = phase * 1j
        if m - 1 == k:
            out_k = jc
        if m - 1 == k + 1:
            out_k1 = jc
        if m - 1 > 0:
            if real_axis:
                if (m - 1) % 2 == 0:
                    norm = norm + 2.0 * jc
            else:
                norm = norm + 2.0 * phase * jc
        if max(fabs(jc.real), fabs(jc.imag)) > _RESCALE:
            jp = jp / _RESCALE
            jc = jc / _RESCALE
            norm = norm / _RESCALE
            out_k = out_k / _RESCALE
            out_k1 = out_k1 / _RESCALE
    norm = norm + jc
    if not real_axis:
        norm = norm / _cexp(-1j * x)
    cdef double complex jk = out_k / norm
    cdef double complex jk1 = out_k1 / norm
    return jk, (<double>k / x) * jk - jk1


cdef double complex _asym_one(long k, double complex x):
    cdef double mu = 4.0 * k * k
    cdef double complex chi = x - (0.5 * k + 0.25) * 3.141592653589793
    cdef double complex p = 1.0 + 0j
    cdef double complex q = 0
    cdef double complex term = 1.0 + 0j
    cdef double prev = 1e300
    cdef double t
    cdef long j
    for j in range(1, 40):
        term = term * ((mu - (2 * j - 1) ** 2) / (8.0 * j * x))
        t = abs(term)
        if t > prev:
            break
        prev = t
        if j % 2 == 1:
            if j % 4 == 1:
                q = q + term
            else:
                q = q - term
        else:
            if j % 4 == 0:
                p = p + term
            else:
                p = p - term
        if t < 1e-17:
            break
    cdef double complex amp = _csqrt(2.0 / (3.141592653589793 * x))
    return amp * (p * _ccos(chi) - q * _csin(chi))


cdef (double complex, double complex) _asym_pair(long k, double complex x):
    cdef double complex jk = _asym_one(k, x)
    cdef double complex jkm1
    if k == 0:
        return jk, -_asym_one(1, x)
    jkm1 = _asym_one(k - 1, x)
    return jk, jkm1 - (<double>k / x) * jk


cdef (double complex, double complex) _bessel_jk_c(long k, double complex x):
    cdef double complex v, d
    cdef double s
    if x.real < 0.0:
        v, d = _bessel_jk_c(k, -x)
        s = -1.0 if k % 2 else 1.0
        return s * v, -s * d
    if x.imag < 0.0:
        v, d = _bessel_jk_c(k, x.conjugate())
        return v.conjugate(), d.conjugate()
    cdef double ax = abs(x)
    if ax == 0.0:
        if k == 0:
            return 1.0 + 0j, 0
        if k == 1:
            return 0, 0.5 + 0j
        return 0, 0
    if ax <= 12.0 or ax * ax <= 2.0 * (k + 1):
        return _series_pair(k, x)
    if ax >= 50.0 and ax >= 4.0 * k * k:
        return _asym_pair(k, x)
    return _miller_pair(k, x)


def bessel_jk(k, x):
    """J_k(x) and J_k'(x) for integer k >= 0, complex x."""
    cdef double complex v, d
    v, d = _bessel_jk_c(<long>k, <double complex>complex(x))
    return complex(v), complex(d)


cdef (double complex, double complex) _spherical_series_pair(long l,
                                                             double complex x):
    cdef double complex jl = _sph_series_one(l, x)
    cdef double complex jl1 = _sph_series_one(l + 1, x)
    return jl, (<double>l / x) * jl - jl1


cdef double complex _sph_series_one(long order, double complex x):
    cdef double complex head = 1.0 + 0j
    cdef long i, m
    for i in range(1, order + 1):
        head = head * (x / (2 * i + 1))
    cdef double complex term = head
    cdef double complex total = term
    cdef double complex x2 = -(x * x / 2.0)
    for m in range(1, 500):
        term = term * (x2 / (m * (2 * order + 2 * m + 1)))
        total = total + term
        if abs(term) <= 1e-18 * abs(total) + 1e-305:
            break
    return total


cdef (double complex, double complex) _spherical_jl_c(long l, double complex x):
    cdef double complex v, d, jm, j0e, j1e, scale, jl, jl1
    cdef double s
    if x.real < 0.0:
        v, d = _spherical_jl_c(l, -x)
        s = -1.0 if l % 2 else 1.0
        return s * v, -s * d
    if x.imag < 0.0:
        v, d = _spherical_jl_c(l, x.conjugate())
        return v.conjugate(), d.conjugate()
    cdef double ax = abs(x)
    if ax == 0.0:
        if l == 0:
            return 1.0 + 0j, 0
        if l == 1:
            return 0, 1.0 / 3.0 + 0j
        return 0, 0
    if ax <= 0.5:
        return _spherical_series_pair(l, x)
    cdef long n_start = (l + <long>ceil(ax) + 20
                         + <long>ceil(7.0 * ax ** (1.0 / 3.0)))
    cdef double complex jp = 0
    cdef double complex jc = _TINY_SEED
    cdef double complex out_l = 0
    cdef double complex out_l1 = 0
    cdef long m
    for m in range(n_start, 0, -1):
        jm = (<double>(2 * m + 1) / x) * jc - jp
        jp = jc
        jc = jm
        if m - 1 == l:
            out_l = jc
        if m - 1 == l + 1:
            out_l1 = jc
        if max(fabs(jc.real), fabs(jc.imag)) > _RESCALE:
            jp = jp / _RESCALE
            jc = jc / _RESCALE
            out_l = out_l / _RESCALE
            out_l1 = out_l1 / _RESCALE
    j0e = _csin(x) / x
    j1e = _csin(x) / (x * x) - _ccos(x) / x
    if abs(j0e) >= abs(j1e):
        scale = j0e / jc
    else:
        scale = j1e / jp
    jl = out_l * scale
    jl1 = out_l1 * scale
    return jl, (<double>l / x) * jl - jl1


def spherical_jl(l, x):
    """Spherical j_l(x) and j_l'(x) for integer l >= 0, complex x."""
    cdef double complex v, d
    v, d = _spherical_jl_c(<long>l, <double complex>complex(x))
    return complex(v), complex(d)


def fd_radial_edge(dim, mode, lam, ab, n_grid):
    """Shoot the conservative radial FD scheme on (0, 1].

    Returns (u_{M-1}, u_M, u_{M+1}) up to a common factor; see the python
    backend for the discretization.
    """
    cdef long m_nodes = <long>n_grid
    cdef long md = <long>mode
    cdef long dm = <long>dim
    cdef double h = 1.0 / m_nodes
    cdef double complex lamc = <double complex>complex(lam)
    cdef double complex lam2 = <double>ab * lamc * lamc * h * h
    cdef double mu, lim
    cdef long pw
    if dm == 2:
        mu = <double>(md * md)
        pw = 1
        lim = 2.0
    else:
        mu = <double>(md * (md + 1))
        pw = 2
        lim = 3.0
    cdef double complex um, uc, un, u_before
    if md == 0:
        um = 1.0 + 0j
        uc = um * (1.0 - lam2 / (2.0 * lim))
    else:
        um = 0
        uc = 1.0 + 0j
    u_before = 0
    cdef long i
    cdef double r, rp, rm, cent
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
        un = ((rp + rm + cent - lam2 * (r ** pw)) * uc - rm * um) / rp
        um = uc
        uc = un
        if max(fabs(uc.real), fabs(uc.imag)) > 1e200:
            um = um / 1e200
            uc = uc / 1e200
            u_before = u_before / 1e200
    return complex(u_before), complex(um), complex(uc)
