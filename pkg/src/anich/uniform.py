"""Uniform-time-step weighted/shifted BDF2 steppers with SAV forces.

The two-step operator

    D u = ((theta + 1/2) u^{n+1} - 2 theta u^n + (theta - 1/2) u^{n-1}) / tau

approximates u'(t^n + theta tau) for theta in [1/2, 1].  Each step solves
one Fourier-diagonal operator equation twice plus a scalar rank-one
correction; the auxiliary scalar makes the scheme unconditionally stable in
a discrete modified energy built from a two-level quadratic form.

Quadratic-form convention: the telescoping identity (see
:func:`two_level_identity_terms`) fixes which history slot carries which matrix
entry.  In ``g_norm_sq(g, u_new, u_old)`` the NEWEST member carries the
theta(2 theta + 3)/2 weight; at theta = 1/2 the form degenerates to
``||u_new||^2``.  The remainder coefficients are alpha0 = alpha2 =
sqrt(theta(2 theta - 1)) and alpha1 = -2 alpha0, the unique choice that
annihilates constant sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model as _model
from .errors import DenominatorDegenerate, NumericalBlowup
from .model import ModelParams, SavParams, sav_linear_uniform, sav_willmore_uniform
from .spectral import Field, apply_symbol, inner, laplacian, linf_norm, solve_diagonal

#: sup-norm threshold beyond which a run is declared blown up
BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class UniformSchemeParams:
    """Time-scheme constants for the uniform-step methods.

    theta in [1/2, 1]; tau > 0; s1, s2 are the stabilizer weights (s3 only
    enters the Willmore scheme).  ``bootstrap_substeps`` splits the first
    interval into that many backward-Euler substeps: the first-step error
    scales as tau^2 / substeps, which keeps coarse-step order measurements
    clean while the history pair stays (phi^1, phi^0) with spacing tau.
    """

    theta: float
    tau: float
    s1: float = 4.0
    s2: float = 4.0
    s3: float = 0.01
    sav: SavParams = SavParams()
    bootstrap_substeps: int = 8

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if min(self.s1, self.s2, self.s3) < 0:
            raise ValueError("stabilizers must be non-negative")
        if self.bootstrap_substeps < 1:
            raise ValueError("bootstrap_substeps must be at least 1")


@dataclass(frozen=True)
class UniformState:
    """Two-level history: fields, SAV scalars, clock."""

    phi_n: Field
    phi_nm1: Field
    r_n: float
    r_nm1: float
    t: float
    step_index: int


@dataclass(frozen=True)
class GMatrix:
    """Entries of the two-level quadratic form plus remainder coefficients."""

    theta: float
    g11: float   # weight of the OLDER slot
    g12: float
    g22: float   # weight of the NEWER slot
    alpha0: float
    alpha1: float
    alpha2: float

    @classmethod
    def from_theta(cls, theta: float) -> "GMatrix":
        if not 0.5 <= theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        root = math.sqrt(theta * (2.0 * theta - 1.0))
        return cls(
            theta=theta,
            g11=theta * (2.0 * theta - 1.0) / 2.0,
            g12=-(theta + 1.0) * (2.0 * theta - 1.0) / 2.0,
            g22=theta * (2.0 * theta + 3.0) / 2.0,
            alpha0=root,
            alpha1=-2.0 * root,
            alpha2=root,
        )


def _pair_product(u, v):
    if isinstance(u, Field):
        return inner(u, v)
    return float(u) * float(v)


def g_norm_sq(g: GMatrix, u_new, u_old) -> float:
    """Two-level quadratic form; the newest member carries g22.

    Accepts a pair of Fields (L2 pairing) or a pair of scalars.  For theta
    in [1/2, 1] the form is positive semidefinite; at theta = 1/2 it equals
    ||u_new||^2.
    """
    return (g.g22 * _pair_product(u_new, u_new)
            + 2.0 * g.g12 * _pair_product(u_new, u_old)
            + g.g11 * _pair_product(u_old, u_old))


def wsbdf2_apply(theta: float, tau: float, u_np1, u_n, u_nm1):
    """Weighted/shifted BDF2 difference approximating u'(t^n + theta tau)."""
    return ((theta + 0.5) * u_np1 - 2.0 * theta * u_n + (theta - 0.5) * u_nm1) * (1.0 / tau)


def two_level_identity_terms(theta: float, u_np1, u_n, u_nm1):
    """Both sides of the two-level telescoping identity (tau-independent).

    lhs = tau * (D u, theta u^{n+1} + (1-theta) u^n)
    rhs = (Q(u^{n+1}, u^n) - Q(u^n, u^{n-1})) / 2
          + ||alpha2 u^{n+1} + alpha1 u^n + alpha0 u^{n-1}||^2 / 4

    Exposed for property testing; not used while stepping.
    """
    g = GMatrix.from_theta(theta)
    d = wsbdf2_apply(theta, 1.0, u_np1, u_n, u_nm1)
    mid = theta * u_np1 + (1.0 - theta) * u_n
    lhs = _pair_product(d, mid)
    rem = g.alpha2 * u_np1 + g.alpha1 * u_n + g.alpha0 * u_nm1
    rhs = 0.5 * (g_norm_sq(g, u_np1, u_n) - g_norm_sq(g, u_n, u_nm1)) \
        + 0.25 * _pair_product(rem, rem)
    return lhs, rhs


def _force_uniform(phi: Field, model: ModelParams, sav: SavParams, kind: str):
    if kind == _model.LINEAR:
        return sav_linear_uniform(phi, model, sav)
    return sav_willmore_uniform(phi, model, sav)


def _sixth_coeff(model: ModelParams, scheme: UniformSchemeParams, kind: str) -> float:
    # |k|^6 weight of the implicit operator: beta*theta for the linear model
    # (biharmonic kept implicit), s3 for the Willmore stabilizer.
    if kind == _model.LINEAR:
        return model.beta * scheme.theta
    return scheme.s3


def _check_finite(phi: Field, t: float, step_index: int):
    m = linf_norm(phi)
    if not np.isfinite(m) or m > BLOWUP_LIMIT:
        raise NumericalBlowup(f"|phi|_inf = {m:.3e} at t = {t:.6g}", t=t, step_index=step_index)


def _step_uniform(state: UniformState, model: ModelParams, scheme: UniformSchemeParams,
                  kind: str, source: Field | None) -> UniformState:
    theta, tau = scheme.theta, scheme.tau
    M = model.mobility
    eps2 = model.epsilon**2
    phi_n, phi_m = state.phi_n, state.phi_nm1
    grid = phi_n.grid

    phi_star = (1.0 + theta) * phi_n - theta * phi_m
    force, _ = _force_uniform(phi_star, model, scheme.sav, kind)

    two_theta = 2.0 * theta
    gtilde = (4.0 * theta * state.r_n - (two_theta - 1.0) * state.r_nm1) / (two_theta + 1.0) \
        - 0.5 * inner(force, (4.0 * theta * phi_n - (two_theta - 1.0) * phi_m)
                      * (1.0 / (two_theta + 1.0)))

    K2 = grid.ksq_mesh
    c6 = _sixth_coeff(model, scheme, kind)
    implicit_poly = M * ((scheme.s1 / eps2) * K2 + scheme.s2 * K2**2 + c6 * K2**3)
    a_symbol = (two_theta + 1.0) / (2.0 * tau) + implicit_poly

    div_m_grad_force = M * laplacian(force)

    # right-hand side: all known-level terms of the phi equation
    # stabilizers act on the second difference: their known-level part lands
    # on the right-hand side with the SAME symbol sign as the implicit part
    rhs = (4.0 * theta * phi_n - (two_theta - 1.0) * phi_m) * (1.0 / (2.0 * tau)) \
        + (theta * gtilde + (1.0 - theta) * state.r_n) * div_m_grad_force
    extrap = 2.0 * phi_n - phi_m
    stab_poly = M * ((scheme.s1 / eps2) * K2 + scheme.s2 * K2**2
                     + (scheme.s3 if kind == _model.WILLMORE else 0.0) * K2**3)
    rhs = rhs + apply_symbol(extrap, stab_poly)
    if kind == _model.LINEAR:
        # the biharmonic is implicit only with weight theta; the (1-theta)
        # share of it is a known term (MΔ then flips the K2^3 sign)
        rhs = rhs - apply_symbol(phi_n, M * model.beta * (1.0 - theta) * K2**3)
    if source is not None:
        rhs = rhs + source

    w1 = solve_diagonal(rhs, a_symbol)
    w2 = solve_diagonal(div_m_grad_force, a_symbol)

    denom = 1.0 - 0.5 * theta * inner(force, w2)
    if abs(denom) < 0.5:
        raise DenominatorDegenerate(f"rank-one denominator {denom:.6g}")
    force_phi_new = inner(force, w1) / denom

    phi_new = (0.5 * theta * force_phi_new) * w2 + w1
    r_new = 0.5 * force_phi_new + gtilde

    t_new = state.t + tau
    _check_finite(phi_new, t_new, state.step_index + 1)
    return UniformState(phi_new, phi_n, float(r_new), state.r_n, t_new, state.step_index + 1)


def step_UL(state: UniformState, model: ModelParams, scheme: UniformSchemeParams,
            source: Field | None = None) -> UniformState:
    """One step of the linear-regularization uniform scheme.

    Procedure: evaluate the SAV force at the extrapolation
    phi* = (1+theta) phi^n - theta phi^{n-1}, solve the diagonal operator
    equation for the known right-hand side and for the force coupling, close
    the scalar loop through the rank-one denominator (provably >= 1 for
    constant mobility), then update the auxiliary scalar.  ``source`` is an
    optional manufactured forcing evaluated at t^n + theta tau.
    """
    if model.regularization != _model.LINEAR:
        raise ValueError("step_UL requires regularization='linear'")
    return _step_uniform(state, model, scheme, _model.LINEAR, source)


def step_UW(state: UniformState, model: ModelParams, scheme: UniformSchemeParams,
            source: Field | None = None) -> UniformState:
    """One step of the Willmore-regularization uniform scheme.

    Same skeleton as :func:`step_UL` with the Willmore SAV force, no
    implicit biharmonic term (it lives inside the force), and a third
    stabilizer s3 on the second-difference.
    """
    if model.regularization != _model.WILLMORE:
        raise ValueError("step_UW requires regularization='willmore'")
    return _step_uniform(state, model, scheme, _model.WILLMORE, source)


def bootstrap_bdf1(phi0: Field, model: ModelParams, scheme: UniformSchemeParams,
                   source_fn=None) -> UniformState:
    """Backward-Euler SAV pass over the first interval.

    Sets r^0 = sqrt(E(phi^0)) and advances to t = tau with
    ``scheme.bootstrap_substeps`` first-order substeps (each local error is
    O(dt^2), so global second order is unaffected).  The returned history
    pair is (phi^1, phi^0) with spacing tau.  The stabilizers act on the
    substep difference, which keeps them zero-consistent.  ``source_fn(t)``
    supplies the manufactured forcing at each substep end time.  Mass is
    conserved exactly.
    """
    kind = model.regularization
    M = model.mobility
    eps2 = model.epsilon**2
    grid = phi0.grid
    m = scheme.bootstrap_substeps
    dt = scheme.tau / m

    K2 = grid.ksq_mesh
    c6 = model.beta if kind == _model.LINEAR else scheme.s3
    a_symbol = 1.0 / dt + M * ((scheme.s1 / eps2) * K2 + scheme.s2 * K2**2 + c6 * K2**3)
    # only the first-difference stabilizers have a known-level share; the
    # biharmonic (linear kind) is fully implicit here
    stab_poly = M * ((scheme.s1 / eps2) * K2 + scheme.s2 * K2**2
                     + (scheme.s3 if kind == _model.WILLMORE else 0.0) * K2**3)

    _, E0 = _force_uniform(phi0, model, scheme.sav, kind)
    r0 = math.sqrt(E0)
    phi, r = phi0, r0
    for j in range(m):
        force, _ = _force_uniform(phi, model, scheme.sav, kind)
        div_m_grad_force = M * laplacian(force)
        rhs = phi * (1.0 / dt) + (r - 0.5 * inner(force, phi)) * div_m_grad_force \
            + apply_symbol(phi, stab_poly)
        if source_fn is not None:
            rhs = rhs + source_fn((j + 1) * dt)
        w1 = solve_diagonal(rhs, a_symbol)
        w2 = solve_diagonal(div_m_grad_force, a_symbol)
        denom = 1.0 - 0.5 * inner(force, w2)
        if abs(denom) < 0.5:
            raise DenominatorDegenerate(f"bootstrap denominator {denom:.6g}")
        force_phi_new = inner(force, w1) / denom
        phi_new = (0.5 * force_phi_new) * w2 + w1
        r = r + 0.5 * (force_phi_new - inner(force, phi))
        phi = phi_new

    _check_finite(phi, scheme.tau, 1)
    return UniformState(phi, phi0, float(r), r0, scheme.tau, 1)


def discrete_energy_uniform(state: UniformState, model: ModelParams,
                            scheme: UniformSchemeParams) -> float:
    """Discrete modified energy of the uniform schemes at the state's level.

    Linear:   |[r^{n+1}, r^n]|_G^2 + (beta/2) ||[lap phi^{n+1}, lap phi^n]||_G^2
              + (s1 / 2 eps^2) ||d phi||^2 + (s2 / 2) ||grad d phi||^2
    Willmore: |[r^{n+1}, r^n]|_G^2 + (s1 / 2 eps^2) ||d phi||^2
              + (s2 / 2) ||grad d phi||^2 + (s3 / 2) ||lap d phi||^2

    with d phi = phi^{n+1} - phi^n.  Non-increasing step over step.
    """
    g = GMatrix.from_theta(scheme.theta)
    eps2 = model.epsilon**2
    diff_phi = state.phi_n - state.phi_nm1
    lap_diff = laplacian(diff_phi)
    energy = g_norm_sq(g, state.r_n, state.r_nm1)
    energy += 0.5 * scheme.s1 / eps2 * inner(diff_phi, diff_phi)
    # ||grad u||^2 = -(u, lap u) on a periodic grid
    energy += 0.5 * scheme.s2 * (-inner(diff_phi, lap_diff))
    if model.regularization == _model.LINEAR:
        energy += 0.5 * model.beta * g_norm_sq(
            g, laplacian(state.phi_n), laplacian(state.phi_nm1))
    else:
        energy += 0.5 * scheme.s3 * inner(lap_diff, lap_diff)
    return float(energy)


def simulate_uniform(phi0: Field, model: ModelParams, scheme: UniformSchemeParams,
                     n_steps: int, source_fn=None, observer=None) -> UniformState:
    """Drive a uniform-step run: bootstrap, then n_steps - 1 two-level steps.

    ``source_fn(t)`` supplies the manufactured forcing at the scheme's
    evaluation time.  ``observer(state)`` is called after the bootstrap and
    after every step.
    """
    step = step_UL if model.regularization == _model.LINEAR else step_UW
    tau, theta = scheme.tau, scheme.theta
    state = bootstrap_bdf1(phi0, model, scheme, source_fn=source_fn)
    if observer is not None:
        observer(state)
    for _ in range(n_steps - 1):
        src = source_fn(state.t + theta * tau) if source_fn else None
        state = step(state, model, scheme, source=src)
        if observer is not None:
            observer(state)
    return state
