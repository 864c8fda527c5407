"""Constant-coefficient acoustic model on the unit disk and unit ball.

Per boundary mode the time-harmonic problem -Div(alpha^-1 grad p) = lam^2
beta p with alpha = a I, beta = b separates; the radial solution regular at
the origin is a Bessel function of w = sqrt(ab) lam (J_k on the disk,
spherical j_l on the ball).  That gives closed forms for the per-mode
Dirichlet-to-Neumann value, the Neumann-to-Dirichlet diagonal entry, and the
secular function whose zeros are the eigenvalues under a diagonal impedance
boundary condition.  An independent finite-difference shooting oracle guards
every sign convention.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from randbc._backend import fd_radial_edge
from randbc.impedance import ACCRETIVE_TOL, cayley_zeta_to_xi
from randbc.specfun import (BesselEval, bessel_j, complex_root_polish,
                            find_real_roots, spherical_j)


class DiskModelError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """A root refinement failed to converge; distinct from a wrong answer."""


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic constant material constants alpha = a I, beta = b."""
    a: float = 1.0
    b: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DiskModelError("material constants must be positive")
        if self.dim not in (2, 3):
            raise DiskModelError("dim must be 2 (disk) or 3 (ball)")

    @property
    def wave_factor(self):
        return math.sqrt(self.a * self.b)


def mode_mu(params: MaterialParams, mode: int) -> float:
    """Laplace-Beltrami eigenvalue of the boundary mode."""
    if mode < 0:
        raise DiskModelError("mode index must be >= 0")
    return float(mode * mode if params.dim == 2 else mode * (mode + 1))


@dataclass(frozen=True)
class ModeProblem:
    """One boundary mode of the impedance problem."""
    mode: int
    zeta: complex
    params: MaterialParams

    def __post_init__(self):
        if complex(self.zeta).real < -ACCRETIVE_TOL:
            raise DiskModelError(
                f"Re zeta = {complex(self.zeta).real:.3g} < 0: not accretive")

    @property
    def mu(self):
        return mode_mu(self.params, self.mode)


def _radial(mode, w, params) -> BesselEval:
    if params.dim == 2:
        return bessel_j(mode, w)
    return spherical_j(mode, w)


@dataclass(frozen=True)
class NtDSample:
    """Diagonal entry of the Neumann-to-Dirichlet map on one mode."""
    mode: int
    lam: complex
    value: complex
    dtn_pole: bool


def dtn_mode(mode: int, lam, params: MaterialParams) -> complex:
    """m_DtN(lam^2) on the mode: boundary co-normal over boundary trace.

    With u(r) the regular radial solution, m = (1/a) u'(1) / u(1)
    = sqrt(b/a) lam C'(w) / C(w), w = sqrt(ab) lam.
    """
    lam = complex(lam)
    w = params.wave_factor * lam
    ev = _radial(mode, w, params)
    if ev.value == 0:
        raise DiskModelError(f"lam={lam} is a Dirichlet resonance of mode {mode}")
    return math.sqrt(params.b / params.a) * lam * ev.derivative / ev.value


def ntd_mode(mode: int, lam, params: MaterialParams) -> NtDSample:
    """NtD diagonal entry via M_DtN(lam) = -(1/lam) m_DtN(lam^2) and
    M_NtD = -M_DtN^{-1}; collapses to sqrt(a/b) C(w)/C'(w).

    At a Dirichlet resonance (C(w) = 0) the DtN value has a pole and the NtD
    value is a regular zero: the sample is returned with dtn_pole set.
    """
    lam = complex(lam)
    if lam == 0:
        raise DiskModelError("lam = 0 excluded (static mode)")
    w = params.wave_factor * lam
    ev = _radial(mode, w, params)
    if ev.derivative == 0:
        raise DiskModelError(
            f"lam={lam} is a Neumann resonance of mode {mode}: NtD pole")
    value = math.sqrt(params.a / params.b) * ev.value / ev.derivative
    scale = max(abs(ev.value), abs(ev.derivative))
    pole = abs(ev.value) <= 1e-12 * scale
    return NtDSample(mode=mode, lam=lam, value=value, dtn_pole=pole)


def fd_dtn_value(mode: int, lam, params: MaterialParams, grid=50_000) -> complex:
    """Finite-difference oracle for the DtN value, Richardson-extrapolated.

    Independent of the Bessel route: integrates the radial equation with the
    conservative second-order scheme on two grids.
    """
    if grid < 1000:
        raise DiskModelError("grid must be >= 1e3")
    lam = complex(lam)
    ab = params.a * params.b
    out = []
    for m_nodes in (grid // 2, grid):
        um1, u_m, up1 = fd_radial_edge(params.dim, mode, lam, ab, m_nodes)
        h = 1.0 / m_nodes
        du = (up1 - um1) / (2.0 * h)
        out.append((du / params.a) / u_m)
    return (4.0 * out[1] - out[0]) / 3.0


def secular_value(mode: int, zeta, lam, params: MaterialParams) -> complex:
    """Characteristic function F(lam) = sqrt(b/a) C'(w) - i zeta C(w).

    Zeros are the mode eigenvalues of the impedance operator: the boundary
    condition zeta gamma0(p) = -gamma_n(alpha^-1 grad u) with p = -i lam u
    divided by lam.  At zeta = 0 the zeros are Neumann eigenvalues; as
    |zeta| -> infinity they approach Dirichlet eigenvalues.
    """
    lam = complex(lam)
    w = params.wave_factor * lam
    ev = _radial(mode, w, params)
    return math.sqrt(params.b / params.a) * ev.derivative - 1j * complex(zeta) * ev.value


def neumann_eigenvalues(mode: int, params: MaterialParams, window):
    """Real zeros of C'(sqrt(ab) lam) in the window."""
    spacing = math.pi / params.wave_factor
    res = find_real_roots(
        lambda lam: secular_value(mode, 0.0, lam, params).real,
        window, min_spacing=spacing)
    return res.roots


def dirichlet_eigenvalues(mode: int, params: MaterialParams, window):
    """Real zeros of C(sqrt(ab) lam) in the window."""
    spacing = math.pi / params.wave_factor

    def f(lam):
        w = params.wave_factor * lam
        return _radial(mode, w, params).value.real

    return find_real_roots(f, window, min_spacing=spacing).roots


@dataclass
class ModeEigenvalues:
    mode: int
    zeta: complex
    params: MaterialParams
    eigenvalues: list
    method: str
    expected_count: int
    warnings: list = field(default_factory=list)

    def max_imag(self):
        return max((ev.imag for ev in self.eigenvalues), default=-math.inf)


def _real_axis_roots(char_fn, window, spacing):
    res = find_real_roots(lambda lam: char_fn(lam).real, window,
                          min_spacing=spacing)
    return res


def _re_zeta_schedule(re_part):
    """Geometric homotopy targets: roots move like log(Re zeta), so linear
    stepping would need millions of polishes for the Dirichlet limit."""
    if re_part <= 0.25:
        return list(np.linspace(0.0, re_part, 5)[1:])
    targets = list(np.linspace(0.0, 0.25, 5)[1:])
    while targets[-1] < re_part:
        targets.append(min(2.0 * targets[-1], re_part))
    return targets


def _continue_in_re_zeta(char_of_zeta, zeta, seeds, step_cap=1.5):
    """Homotopy in Re zeta from the imaginary-axis solution, Newton-polished.

    A step is accepted only when the root moves less than step_cap (half a
    typical root spacing); otherwise the zeta-step is bisected, so the
    iteration tracks one branch instead of hopping to a neighbor.
    """
    re_part, im_part = zeta.real, zeta.imag
    schedule = _re_zeta_schedule(re_part)
    roots, failures = [], []
    for seed in seeds:
        z = complex(seed)
        re_prev = 0.0
        targets = list(reversed(schedule))
        ok = True
        while targets:
            re_now = targets[-1]
            zz = complex(re_now, im_part)
            pol = complex_root_polish(lambda lam: char_of_zeta(zz, lam), z)
            if pol.converged and abs(pol.root - z) <= step_cap:
                z = pol.root
                re_prev = re_now
                targets.pop()
                continue
            if re_now - re_prev <= 1e-6 * max(re_now, 0.25):
                failures.append((seed, float(re_now)))
                ok = False
                break
            targets.append(0.5 * (re_prev + re_now))
        if ok:
            roots.append(z)
    return roots, failures


def solve_mode_eigenvalues(mode: int, zeta, params: MaterialParams, window,
                           budget=None) -> ModeEigenvalues:
    """Eigenvalues of the mode under impedance zeta with Re lambda in window.

    Re zeta = 0: the spectrum is real; bracketed search with
    Neumann/Dirichlet-interlacing-scale resolution.  Re zeta > 0: homotopy
    continuation in Re zeta from the imaginary-axis roots.  A mismatch with
    the zeta = 0 interlacing count is reported in warnings, never silently
    accepted.
    """
    zeta = complex(zeta)
    if zeta.real < -ACCRETIVE_TOL:
        raise DiskModelError("Re zeta < 0: not accretive")
    lo, hi = float(window[0]), float(window[1])
    if not 0.0 < lo < hi:
        raise DiskModelError("window must satisfy 0 < lo < hi")
    spacing = math.pi / params.wave_factor
    expected = len(neumann_eigenvalues(mode, params, (lo, hi)))

    def char_of_zeta(zz, lam):
        return secular_value(mode, zz, lam, params)

    warnings = []
    if abs(zeta.real) <= ACCRETIVE_TOL:
        res = _real_axis_roots(lambda lam: char_of_zeta(zeta, lam), (lo, hi),
                               spacing)
        eigs = [complex(r) for r in res.roots]
        if res.suspected_double:
            warnings.append(f"suspected double roots at {res.suspected_double}")
        method = "bracketed"
    else:
        # seeds: real roots of the imaginary-axis problem inside the window;
        # their continuations are the reported set (the window is a seed
        # window, not a completeness claim -- see module docs)
        seed_res = _real_axis_roots(
            lambda lam: char_of_zeta(complex(0.0, zeta.imag), lam),
            (lo, hi), spacing)
        roots, failures = _continue_in_re_zeta(char_of_zeta, zeta,
                                               seed_res.roots,
                                               step_cap=0.5 * spacing)
        for seed, s in failures:
            warnings.append(
                f"continuation from seed {seed:.6g} stalled at Re zeta={s:.3g}")
        drifted = [r for r in roots if not lo <= r.real <= hi]
        for r in drifted:
            warnings.append(f"root {r:.6g} drifted out of the window")
        eigs = [r for r in roots if lo <= r.real <= hi]
        eigs = _dedupe(eigs, 1e-8 * max(1.0, hi))
        method = "continuation"
    if budget is not None:
        eigs = sorted(eigs, key=lambda z: z.real)[:budget]
    eigs = sorted(eigs, key=lambda z: z.real)
    if len(eigs) != expected:
        warnings.append(
            f"count {len(eigs)} differs from zeta=0 interlacing count "
            f"{expected}: possible lost or migrated root")
    return ModeEigenvalues(mode=mode, zeta=zeta, params=params,
                           eigenvalues=eigs, method=method,
                           expected_count=expected, warnings=warnings)


def _dedupe(values, tol):
    out = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        if not out or abs(v - out[-1]) > tol:
            out.append(v)
    return out


def fd_oracle(mode: int, zeta, params: MaterialParams, grid=1024,
              window=None, n_values=3):
    """Lowest eigenvalues from the finite-difference pencil, independent of
    the Bessel route.

    The conservative radial scheme plus the ghost-node impedance row define a
    discrete characteristic function whose zeros are the eigenvalues of the
    banded FD pencil; they are located by the same bracket/continuation
    strategy and Richardson-extrapolated across grids (grid/2, grid).
    """
    if grid < 1000:
        raise DiskModelError("grid must be >= 1e3")
    zeta = complex(zeta)
    ab = params.a * params.b
    spacing = math.pi / params.wave_factor
    if window is None:
        window = (0.2 * spacing, (mode + 16.0) / params.wave_factor)
    lo, hi = window

    def fd_char_raw(zz, lam, m_nodes):
        # entire in lam (the shooting recurrence is polynomial): safe for
        # complex Newton polishing
        um1, u_m, up1 = fd_radial_edge(params.dim, mode, lam, ab, m_nodes)
        h = 1.0 / m_nodes
        du = (up1 - um1) / (2.0 * h)
        return (du / params.a) - 1j * complex(lam) * zz * u_m

    def fd_char_scan(zz, lam, m_nodes):
        # positive normalization for bracketing: same zeros and signs
        um1, u_m, up1 = fd_radial_edge(params.dim, mode, lam, ab, m_nodes)
        h = 1.0 / m_nodes
        du = (up1 - um1) / (2.0 * h)
        scale = abs(u_m) + abs(du) / (1.0 + abs(params.wave_factor * lam))
        return ((du / params.a) - 1j * complex(lam) * zz * u_m) / scale

    per_grid = []
    for m_nodes in (grid // 2, grid):
        seed_res = find_real_roots(
            lambda lam: fd_char_scan(complex(0.0, zeta.imag), lam, m_nodes).real,
            (lo, hi), min_spacing=spacing)
        seeds = seed_res.roots
        if abs(zeta.real) <= ACCRETIVE_TOL:
            roots = [complex(r) for r in seeds]
        else:
            roots, failures = _continue_in_re_zeta(
                lambda zz, lam: fd_char_raw(zz, lam, m_nodes), zeta, seeds,
                step_cap=0.5 * spacing)
            if failures:
                raise ConvergenceError(
                    f"FD continuation failed for mode {mode}, zeta {zeta}: "
                    f"{failures}")
        roots = [r for r in roots if lo <= r.real <= hi]
        roots = _dedupe(roots, 1e-8 * max(1.0, hi))
        roots = sorted(roots, key=lambda z: z.real)[:n_values]
        per_grid.append(roots)
    coarse, fine = per_grid
    if len(coarse) != len(fine):
        raise ConvergenceError(
            f"FD root counts differ across grids: {len(coarse)} vs {len(fine)}")
    return [(4.0 * f - c) / 3.0 for c, f in zip(coarse, fine)]


def contraction_route_residual(mode: int, zeta, lam,
                               params: MaterialParams) -> float:
    """Pointwise discrepancy between the impedance-form and contraction-form
    boundary conditions on one mode.

    The contraction form (K+I) V^-1 gamma0(p) - (K-I) V* gamma_n(a^-1 grad u)
    with the Cayley entry xi and V acting as (1+mu)^(-1/4) is algebraically
    proportional to the secular function; the residual is the normalized
    difference after removing the exact proportionality factor
    2 sqrt(s) lam / (zeta + s), s = sqrt(1 + mu).
    """
    zeta = complex(zeta)
    lam = complex(lam)
    if lam == 0:
        raise DiskModelError("lam = 0 excluded")
    mu = mode_mu(params, mode)
    s = math.sqrt(1.0 + mu)
    xi = cayley_zeta_to_xi(zeta, mu)
    w = params.wave_factor * lam
    ev = _radial(mode, w, params)
    gamma0_p = -1j * lam * ev.value
    gamma_n = math.sqrt(params.b / params.a) * lam * ev.derivative
    contraction_form = ((xi + 1.0) * s ** 0.5 * gamma0_p
                        - (xi - 1.0) * s ** -0.5 * gamma_n)
    factor = 2.0 * math.sqrt(s) * lam / (zeta + s)
    normalized = contraction_form / factor
    impedance_form = secular_value(mode, zeta, lam, params)
    return abs(normalized - impedance_form) / (1.0 + abs(impedance_form))


def route_equivalence_report(mode: int, zeta, params: MaterialParams,
                             window) -> dict:
    """Cross-evaluate the two boundary-condition forms at each other's roots."""
    zeta = complex(zeta)
    mu = mode_mu(params, mode)
    s = math.sqrt(1.0 + mu)
    xi = cayley_zeta_to_xi(zeta, mu)

    def contraction_char(zz, lam):
        # written as the raw contraction form, solved independently
        w = params.wave_factor * lam
        ev = _radial(mode, w, params)
        gamma0_p = -1j * lam * ev.value
        gamma_n = math.sqrt(params.b / params.a) * lam * ev.derivative
        xi_s = cayley_zeta_to_xi(zz, mu)
        return ((xi_s + 1.0) * s ** 0.5 * gamma0_p
                - (xi_s - 1.0) * s ** -0.5 * gamma_n)

    sec = solve_mode_eigenvalues(mode, zeta, params, window)
    spacing = math.pi / params.wave_factor
    if abs(zeta.real) <= ACCRETIVE_TOL:
        con_res = find_real_roots(
            lambda lam: (contraction_char(zeta, lam) / lam).real, window,
            min_spacing=spacing)
        con_roots = [complex(r) for r in con_res.roots]
    else:
        seed_res = find_real_roots(
            lambda lam: (contraction_char(complex(0, zeta.imag), lam) / lam).real,
            window, min_spacing=spacing)
        con_roots, _ = _continue_in_re_zeta(
            lambda zz, lam: contraction_char(zz, lam) / lam, zeta,
            seed_res.roots, step_cap=0.5 * spacing)
        con_roots = [r for r in con_roots
                     if window[0] <= r.real <= window[1]]

    def sec_scale(lam):
        h = 1e-6 * max(1.0, abs(lam))
        d = (secular_value(mode, zeta, lam + h, params)
             - secular_value(mode, zeta, lam - h, params)) / (2 * h)
        return max(abs(d) * max(1.0, abs(lam)), 1e-300)

    cross = 0.0
    for r in con_roots:
        cross = max(cross, abs(secular_value(mode, zeta, r, params))
                    / sec_scale(r))
    for r in sec.eigenvalues:
        factor = 2.0 * math.sqrt(s) * r / (zeta + s)
        val = contraction_char(zeta, r) / factor
        cross = max(cross, abs(val) / sec_scale(r))
    return {
        "mode": mode,
        "zeta": zeta,
        "xi": xi,
        "secular_roots": sec.eigenvalues,
        "contraction_roots": con_roots,
        "cross_residual": cross,
    }


def eigenvalue_rows(result: ModeEigenvalues, residual_fn=None):
    """CSV rows: mode, mu, Re zeta, Im zeta, Re lambda, Im lambda, method, residual."""
    rows = []
    mu = mode_mu(result.params, result.mode)
    for ev in result.eigenvalues:
        res = (abs(secular_value(result.mode, result.zeta, ev, result.params))
               if residual_fn is None else residual_fn(ev))
        rows.append([result.mode, mu, result.zeta.real, result.zeta.imag,
                     ev.real, ev.imag, result.method, res])
    return rows
