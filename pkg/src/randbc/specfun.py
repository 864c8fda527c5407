"""Bessel functions of the first kind and robust scalar root finding.

Self-contained: evaluation goes through the randbc kernel backend (power
series, backward Miller recurrence, large-argument asymptotics), never through
an external special-function library.
"""
import math
from dataclasses import dataclass, field

from randbc._backend import bessel_jk, spherical_jl

MAX_ORDER = 200
MAX_ABS_ARGUMENT = 1.0e4


class SpecFunError(ValueError):
    pass


@dataclass(frozen=True)
class BesselEval:
    """One evaluation J_k(x) (or spherical j_l(x)) with its derivative."""
    order: int
    argument: complex
    value: complex
    derivative: complex


def bessel_j(k: int, x) -> BesselEval:
    """Evaluate J_k(x) and J_k'(x) for integer order k >= 0.

    Validated for |x| <= 1e4; orders above 200 are rejected (unnormalized
    recurrence scales overflow well before that, this keeps the contract
    honest).
    """
    if k < 0 or k != int(k):
        raise SpecFunError(f"order must be a nonnegative integer, got {k!r}")
    if k > MAX_ORDER:
        raise SpecFunError(f"order {k} exceeds the validated maximum {MAX_ORDER}")
    x = complex(x)
    if abs(x) > MAX_ABS_ARGUMENT:
        raise SpecFunError(f"|x|={abs(x):.3g} outside validated range")
    if abs(x.imag) > 600.0:
        raise SpecFunError("Im x too large: J_k would overflow double range")
    v, d = bessel_jk(int(k), x)
    return BesselEval(int(k), x, v, d)


def spherical_j(l: int, x) -> BesselEval:
    """Evaluate spherical j_l(x) and j_l'(x) for integer order l >= 0."""
    if l < 0 or l != int(l):
        raise SpecFunError(f"order must be a nonnegative integer, got {l!r}")
    if l > MAX_ORDER:
        raise SpecFunError(f"order {l} exceeds the validated maximum {MAX_ORDER}")
    x = complex(x)
    if abs(x) > MAX_ABS_ARGUMENT:
        raise SpecFunError(f"|x|={abs(x):.3g} outside validated range")
    if abs(x.imag) > 600.0:
        raise SpecFunError("Im x too large: j_l would overflow double range")
    v, d = spherical_jl(int(l), x)
    return BesselEval(int(l), x, v, d)


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.f_lo * self.f_hi < 0:
            raise SpecFunError("bracket endpoints must have opposite signs")


@dataclass
class RootSearchResult:
    roots: list = field(default_factory=list)
    suspected_double: list = field(default_factory=list)
    brackets: list = field(default_factory=list)
    n_evals: int = 0


def _bisect(f, lo, hi, f_lo, f_hi):
    # plain bisection to near machine width, then one Newton polish
    n = 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        fm = f(mid)
        n += 1
        if fm == 0.0:
            return mid, n
        if f_lo * fm < 0:
            hi, f_hi = mid, fm
        else:
            lo, f_lo = mid, fm
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    root = 0.5 * (lo + hi)
    step = 1e-7 * max(1.0, abs(root))
    f0 = f(root)
    deriv = (f(root + step) - f(root - step)) / (2.0 * step)
    n += 3
    if deriv != 0.0:
        polished = root - f0 / deriv
        if lo - (hi - lo) <= polished <= hi + (hi - lo):
            if abs(f(polished)) <= abs(f0):
                root = polished
            n += 1
    return root, n


def find_real_roots(f, window, max_roots=None, n_grid=1024,
                    min_spacing=None) -> RootSearchResult:
    """Bracket and polish the real roots of a scalar function on a window.

    Scan on a uniform grid (refined locally so no cell holds more than one
    sign change), bisection per bracket, one Newton polish per root.  Grid
    minima with |f| below 1e-8 of the local scale but no sign change are
    reported as suspected double roots instead of being dropped.
    """
    a, b = float(window[0]), float(window[1])
    if not a < b:
        raise SpecFunError(f"empty window {window!r}")
    if min_spacing is not None and min_spacing > 0:
        n_grid = max(n_grid, int(math.ceil(4.0 * (b - a) / min_spacing)))
    result = RootSearchResult()
    xs = [a + (b - a) * i / n_grid for i in range(n_grid + 1)]
    fs = [float(f(x)) for x in xs]
    result.n_evals += len(xs)
    scale = max(max(abs(v) for v in fs), 1e-300)

    def handle_interval(lo, hi, f_lo, f_hi, depth):
        # enforce at most one sign change per step by local subdivision
        if depth > 0:
            sub = 16
            pts = [lo + (hi - lo) * i / sub for i in range(sub + 1)]
            vals = [f_lo] + [float(f(p)) for p in pts[1:-1]] + [f_hi]
            result.n_evals += sub - 1
            changes = [i for i in range(sub)
                       if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0]
            if len(changes) > 1:
                for i in changes:
                    handle_interval(pts[i], pts[i + 1], vals[i], vals[i + 1],
                                    depth - 1)
                return
        result.brackets.append(RootBracket(lo, hi, f_lo, f_hi))
        root, n = _bisect(f, lo, hi, f_lo, f_hi)
        result.n_evals += n
        result.roots.append(root)

    for i in range(n_grid):
        if max_roots is not None and len(result.roots) >= max_roots:
            break
        if fs[i] == 0.0:
            result.roots.append(xs[i])
            continue
        if fs[i] * fs[i + 1] < 0:
            handle_interval(xs[i], xs[i + 1], fs[i], fs[i + 1], depth=2)

    # suspected double roots: interior |f| minima without a sign change are
    # refined by ternary search, then tested against 1e-8 * scale
    for i in range(1, n_grid):
        ai, bi, ci = abs(fs[i - 1]), abs(fs[i]), abs(fs[i + 1])
        if bi < ai and bi < ci and fs[i - 1] * fs[i] > 0 and fs[i] * fs[i + 1] > 0:
            if bi > 1e-3 * scale:
                continue
            lo, hi = xs[i - 1], xs[i + 1]
            for _ in range(60):
                m1 = lo + (hi - lo) / 3.0
                m2 = hi - (hi - lo) / 3.0
                if abs(f(m1)) < abs(f(m2)):
                    hi = m2
                else:
                    lo = m1
                result.n_evals += 2
            x_min = 0.5 * (lo + hi)
            if abs(f(x_min)) <= 1e-8 * scale:
                near_root = any(abs(x_min - r) < 4 * (b - a) / n_grid
                                for r in result.roots)
                if not near_root:
                    result.suspected_double.append(x_min)

    result.roots.sort()
    if max_roots is not None:
        result.roots = result.roots[:max_roots]
    return result


@dataclass(frozen=True)
class PolishResult:
    root: complex
    converged: bool
    residual: float
    iterations: int


def complex_root_polish(f, seed, tol=1e-10, max_iter=100) -> PolishResult:
    """Damped Newton iteration with a numerical derivative.

    Convergence requires |f(z)| <= tol * scale with scale set by the local
    derivative; when the iteration stagnates without reaching that (multiple
    roots flatten f), the flag comes back False and the best point is
    returned, which may still be accurate to ~|f|^(1/multiplicity).
    """
    z = complex(seed)
    fz = f(z)
    best_z, best_f = z, abs(fz)
    for it in range(1, max_iter + 1):
        h = 1e-7 * max(1.0, abs(z))
        deriv = (f(z + h) - f(z - h)) / (2.0 * h)
        if deriv == 0:
            break
        step = fz / deriv
        damp = 1.0
        for _ in range(12):
            z_new = z - damp * step
            f_new = f(z_new)
            if abs(f_new) < abs(fz) or abs(f_new) == 0.0:
                break
            damp *= 0.5
        else:
            break
        z, fz = z_new, f_new
        if abs(fz) < best_f:
            best_z, best_f = z, abs(fz)
        scale = max(abs(deriv) * max(1.0, abs(z)), 1e-300)
        if abs(fz) <= tol * scale:
            return PolishResult(z, True, abs(fz), it)
        if abs(damp * step) <= 1e-14 * max(1.0, abs(z)):
            break
    return PolishResult(best_z, False, best_f, max_iter)
