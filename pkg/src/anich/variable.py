"""Variable-time-step weighted BDF2 steppers with the relaxed SAV scalar.

The nonuniform two-step operator, with step ratio gamma = tau_{n+1}/tau_n,

    D u = (1 + 2 theta gamma) / (tau_{n+1} (1 + gamma)) * (u^{n+1} - u^n)
        + (1 - 2 theta) gamma^2 / (tau_{n+1} (1 + gamma)) * (u^n - u^{n-1})

approximates u'(t^n + theta tau_{n+1}) and reduces to the uniform operator
at gamma = 1.  Stability holds for adjacent ratios up to the positive root
gamma* of (1-2 theta)^2 g^3 - 4 theta^2 g^2 - 4 theta g - 1 = 0 (infinite at
theta = 1/2).  The SAV scalar is relaxed: a positive weight V with V(1) = 1
and V'(1) = -1 multiplies the explicit force, and the relaxation factor
xi = u^{n+1}/sqrt(E~^n) is found from a scalar nonlinear equation by Newton
iteration each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import model as _model
from .errors import NewtonDiverged, NumericalBlowup, RatioViolation
from .model import ModelParams, SavParams, sav_linear_variable, sav_willmore_variable
from .spectral import (
    Field,
    apply_symbol,
    inner,
    inv_grad_norm_sq,
    laplacian,
    linf_norm,
    solve_diagonal,
)
from .uniform import BLOWUP_LIMIT


def gamma_star(theta: float) -> float:
    """Largest admissible adjacent step ratio for a given theta.

    The unique positive root of the stability cubic, found by bracketing and
    bisection; +inf at theta = 1/2 where the cubic has no positive root.
    Strictly decreasing in theta; gamma_star(1) = 4.8645365123...
    """
    if not 0.5 <= theta <= 1.0:
        raise ValueError("theta must lie in [1/2, 1]")
    if theta == 0.5:
        return math.inf

    def cubic(g: float) -> float:
        return ((1.0 - 2.0 * theta) ** 2) * g**3 - 4.0 * theta**2 * g**2 - 4.0 * theta * g - 1.0

    lo, hi = 1.0, 2.0
    while cubic(hi) < 0.0:
        hi *= 2.0
        if hi > 1e15:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cubic(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


def vbdf2_apply(theta: float, tau_np1: float, gamma_np1: float, u_np1, u_n, u_nm1):
    """Nonuniform weighted BDF2 difference; equals the uniform one at gamma = 1."""
    c_new = (1.0 + 2.0 * theta * gamma_np1) / (tau_np1 * (1.0 + gamma_np1))
    c_old = (1.0 - 2.0 * theta) * gamma_np1**2 / (tau_np1 * (1.0 + gamma_np1))
    return c_new * (u_np1 - u_n) + c_old * (u_n - u_nm1)


def ratio_bound_function(theta: float, x, y):
    """The lower-bound weight R(x, y) of the step-ratio inequality.

    R(0, 0) = 2 and R(gamma*, gamma*) = 0; nonnegative for ratios in
    [0, gamma*].  Vectorizes over x, y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    first = (2.0 * (1.0 + 2.0 * theta * x) + (1.0 - 2.0 * theta) * x**1.5) / (1.0 + x)
    second = (2.0 * theta - 1.0) * y**1.5 / (1.0 + y)
    out = first - second
    return float(out) if out.ndim == 0 else out


def ratio_bound_terms(theta: float, gammas, phis, taus):
    """Both sides of the variable-step lower-bound inequality (lhs >= rhs).

    gammas = (gamma_{n+1}, gamma_{n+2}), phis = (u^{n+1}, u^n, u^{n-1}),
    taus = (tau_n, tau_{n+1}) with gamma_{n+1} = tau_{n+1}/tau_n.  Scalars or
    arrays (elementwise).  Exposed for property tests.
    """
    g_np1, g_np2 = gammas
    u_np1, u_n, u_nm1 = (np.asarray(v, dtype=float) for v in phis)
    tau_n, tau_np1 = taus
    d = vbdf2_apply(theta, tau_np1, g_np1, u_np1, u_n, u_nm1)
    lhs = d * (u_np1 - u_n)
    r_new = (2.0 * theta - 1.0) * g_np2**1.5 / (2.0 * (1.0 + g_np2)) \
        * (u_np1 - u_n) ** 2 / tau_np1
    r_old = (2.0 * theta - 1.0) * g_np1**1.5 / (2.0 * (1.0 + g_np1)) \
        * (u_n - u_nm1) ** 2 / tau_n
    rhs = r_new - r_old + ratio_bound_function(theta, g_np1, g_np2) \
        * (u_np1 - u_n) ** 2 / (2.0 * tau_np1)
    return lhs, rhs


# admitted relaxation weights: name -> (V, V')
def _v_exp_bump(xi):
    return math.exp(xi * (1.0 - xi))


def _v_exp_bump_prime(xi):
    return (1.0 - 2.0 * xi) * math.exp(xi * (1.0 - xi))


V_CHOICES: dict[str, tuple[Callable[[float], float], Callable[[float], float]]] = {
    "exp_bump": (_v_exp_bump, _v_exp_bump_prime),
}


@dataclass(frozen=True)
class VariableSchemeParams:
    """Time-scheme constants for the variable-step methods.

    ``v_kind`` selects the relaxation weight (must satisfy V(1) = 1 and
    V'(1) = -1, checked here).  ``gamma_cap`` optionally tightens the
    admissible ratio below gamma_star(theta).
    """

    theta: float
    sav: SavParams = SavParams()
    v_kind: str = "exp_bump"
    newton_tol: float = 1e-12
    newton_max_iters: int = 50
    gamma_cap: float | None = None

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if self.v_kind not in V_CHOICES:
            raise ValueError(f"unknown V choice {self.v_kind!r}")
        V, Vp = V_CHOICES[self.v_kind]
        if abs(V(1.0) - 1.0) > 1e-14 or abs(Vp(1.0) + 1.0) > 1e-12:
            raise ValueError("V must satisfy V(1) = 1 and V'(1) = -1")
        if self.gamma_cap is not None and self.gamma_cap <= 0:
            raise ValueError("gamma_cap must be positive")

    @property
    def v_funcs(self):
        return V_CHOICES[self.v_kind]

    def max_ratio(self) -> float:
        cap = self.gamma_cap if self.gamma_cap is not None else math.inf
        return min(cap, gamma_star(self.theta))


@dataclass(frozen=True)
class VariableState:
    """Two-level history plus the relaxed SAV scalar and step bookkeeping.

    ``tau_n`` is the size of the last completed step; ``xi`` and
    ``newton_iters`` record the relaxation solve of that step.
    """

    phi_n: Field
    phi_nm1: Field
    u_n: float
    tau_n: float
    t: float
    step_index: int
    xi: float = 1.0
    newton_iters: int = 0


@dataclass(frozen=True)
class StepSequence:
    """Precomputed step sizes with their admissibility cap."""

    taus: tuple[float, ...]
    gamma_cap: float

    def __post_init__(self):
        if any(t <= 0 for t in self.taus):
            raise ValueError("step sizes must be positive")

    @property
    def ratios(self) -> np.ndarray:
        t = np.asarray(self.taus)
        return t[1:] / t[:-1]

    @property
    def total(self) -> float:
        return float(np.sum(self.taus))

    @property
    def tau_max(self) -> float:
        return float(max(self.taus))

    def gamma_after(self, k: int) -> float:
        """Ratio tau_{k+2}/tau_{k+1} looking ahead of step k (0 past the end)."""
        t = self.taus
        return t[k + 1] / t[k] if k + 1 < len(t) else 0.0


UNIFORM_STEPS = "uniform"
RANDOM_STEPS = "random_admissible"


def make_steps(kind: str, T: float, n_steps: int, theta: float,
               delta: float = 0.1, seed: int = 0, gamma_cap: float = 5.0) -> StepSequence:
    """Build a deterministic step sequence summing to T.

    ``uniform``: equal steps.  ``random_admissible``: i.i.d. seeded sizes,
    normalized, with every adjacent ratio below
    min(gamma_star(theta) - delta, gamma_cap).
    """
    if n_steps < 2:
        raise ValueError("need at least two steps")
    if T <= 0:
        raise ValueError("horizon must be positive")
    if kind == UNIFORM_STEPS:
        taus = np.full(n_steps, T / n_steps)
        cap = gamma_cap
    elif kind == RANDOM_STEPS:
        gs = gamma_star(theta)
        if not 0.0 < delta < gs:
            raise ValueError("delta must lie in (0, gamma_star(theta))")
        cap = min(gs - delta, gamma_cap)
        if cap <= 1.0:
            raise ValueError("admissible ratio cap must exceed 1 to randomize")
        hi = min(3.0, cap)
        rng = np.random.default_rng(seed)
        taus = rng.uniform(1.0, hi, size=n_steps)
    else:
        raise ValueError(f"unknown step kind {kind!r}")
    taus = taus * (T / taus.sum())
    seq = StepSequence(taus=tuple(float(t) for t in taus), gamma_cap=float(cap))
    if len(seq.ratios) and seq.ratios.max() > cap * (1.0 + 1e-12):
        raise AssertionError("generated ratios exceed the cap")
    return seq


def _force_variable(phi: Field, model: ModelParams, sav: SavParams, kind: str):
    if kind == _model.LINEAR:
        return sav_linear_variable(phi, model, sav)
    return sav_willmore_variable(phi, model, sav)


def _shift_poly(model: ModelParams, sav: SavParams, kind: str, K2):
    # |k|-polynomial of the implicit shift operator applied under M*laplacian
    eps2 = model.epsilon**2
    c6 = model.beta if kind == _model.LINEAR else sav.lambda3
    return model.mobility * ((sav.lambda1 / eps2) * K2 + sav.lambda2 * K2**2 + c6 * K2**3)


def _solve_relaxation(scheme: VariableSchemeParams, sqrt_e: float, u_n: float,
                      a: float, b: float):
    """Root of W(xi) = xi sqrt(E) - u^n - V(xi)/(2 sqrt(E)) (xi V(xi) a + b).

    Newton from xi = 1 inside the trust region |xi - 1| <= 1/2, with a
    bracketing bisection fallback on [0, 2].
    """
    V, Vp = scheme.v_funcs

    def W(xi: float) -> float:
        v = V(xi)
        return xi * sqrt_e - u_n - v / (2.0 * sqrt_e) * (xi * v * a + b)

    def Wp(xi: float) -> float:
        v, vp = V(xi), Vp(xi)
        return sqrt_e - vp / (2.0 * sqrt_e) * (xi * v * a + b) \
            - v / (2.0 * sqrt_e) * ((v + xi * vp) * a)

    tol = scheme.newton_tol * max(1.0, sqrt_e)
    xi = 1.0
    for it in range(1, scheme.newton_max_iters + 1):
        w = W(xi)
        if abs(w) <= tol:
            return xi, it
        wp = Wp(xi)
        if wp == 0.0 or not math.isfinite(wp):
            break
        xi = xi - w / wp
        if not math.isfinite(xi) or abs(xi - 1.0) > 0.5:
            break
    else:
        if abs(W(xi)) <= tol:
            return xi, scheme.newton_max_iters

    # fallback: scan [0, 2] for sign changes and bisect the bracket whose
    # root lies nearest 1 (far roots are spurious branches of W)
    grid = np.linspace(0.0, 2.0, 81)
    vals = [W(x) for x in grid]
    brackets = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            brackets.append((grid[i], grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            brackets.append((grid[i], grid[i + 1]))
    if not brackets:
        raise NewtonDiverged("no relaxation-factor root in [0, 2]")
    lo, hi = min(brackets, key=lambda br: abs(0.5 * (br[0] + br[1]) - 1.0))
    if lo == hi:
        return float(lo), scheme.newton_max_iters
    flo = W(lo)
    for it in range(200):
        mid = 0.5 * (lo + hi)
        fm = W(mid)
        if abs(fm) <= tol:
            return mid, scheme.newton_max_iters + it
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi), scheme.newton_max_iters + 200


def _step_variable(state: VariableState, model: ModelParams, scheme: VariableSchemeParams,
                   tau_next: float, kind: str, source: Field | None,
                   gamma_override: float | None = None) -> VariableState:
    theta = scheme.theta
    M = model.mobility
    grid = state.phi_n.grid
    if tau_next <= 0:
        raise ValueError("tau_next must be positive")
    gamma = tau_next / state.tau_n if gamma_override is None else gamma_override
    if gamma > scheme.max_ratio() * (1.0 + 1e-9):
        raise RatioViolation(f"step ratio {gamma:.6g} exceeds admissible "
                             f"{scheme.max_ratio():.6g}")

    phi_n, phi_m = state.phi_n, state.phi_nm1
    phi_star = (1.0 + theta * gamma) * phi_n - theta * gamma * phi_m
    force_star, _ = _force_variable(phi_star, model, scheme.sav, kind)
    _, e_n = _force_variable(phi_n, model, scheme.sav, kind)
    sqrt_e = math.sqrt(e_n)

    c_new = (1.0 + 2.0 * theta * gamma) / (tau_next * (1.0 + gamma))
    c_old = (1.0 - 2.0 * theta) * gamma**2 / (tau_next * (1.0 + gamma))
    K2 = grid.ksq_mesh
    shift = _shift_poly(model, scheme.sav, kind, K2)
    a_symbol = c_new + theta * shift

    rhs = c_new * phi_n - c_old * (phi_n - phi_m) - apply_symbol(phi_n, (1.0 - theta) * shift)
    if source is not None:
        rhs = rhs + source

    phi_1 = solve_diagonal(rhs, a_symbol)
    phi_2 = solve_diagonal(M * laplacian(force_star), a_symbol)

    a = inner(force_star, phi_2)
    b = inner(force_star, phi_1 - phi_n)
    xi, iters = _solve_relaxation(scheme, sqrt_e, state.u_n, a, b)
    V, _ = scheme.v_funcs
    phi_new = phi_1 + (xi * V(xi)) * phi_2
    u_new = xi * sqrt_e

    t_new = state.t + tau_next
    m = linf_norm(phi_new)
    if not np.isfinite(m) or m > BLOWUP_LIMIT:
        raise NumericalBlowup(f"|phi|_inf = {m:.3e} at t = {t_new:.6g}",
                              t=t_new, step_index=state.step_index + 1)
    return VariableState(phi_new, phi_n, float(u_new), tau_next, t_new,
                         state.step_index + 1, xi=float(xi), newton_iters=iters)


def step_VL(state: VariableState, model: ModelParams, scheme: VariableSchemeParams,
            tau_next: float, source: Field | None = None) -> VariableState:
    """One variable step of the linear-regularization scheme.

    Evaluates the shifted force at phi* = (1 + theta gamma) phi^n
    - theta gamma phi^{n-1} and the energy radicand at phi^n, solves the two
    diagonal systems of the splitting, finds the relaxation factor xi from
    the scalar equation, and recombines phi^{n+1} = phi_1 + xi V(xi) phi_2.
    """
    if model.regularization != _model.LINEAR:
        raise ValueError("step_VL requires regularization='linear'")
    return _step_variable(state, model, scheme, tau_next, _model.LINEAR, source)


def step_VW(state: VariableState, model: ModelParams, scheme: VariableSchemeParams,
            tau_next: float, source: Field | None = None) -> VariableState:
    """One variable step of the Willmore-regularization scheme.

    As :func:`step_VL` with the Willmore force and the third shift weight on
    the biharmonic term.  The shift coefficients are the same constants that
    define the shifted energy radicand (one set, not a separate stabilizer
    family).
    """
    if model.regularization != _model.WILLMORE:
        raise ValueError("step_VW requires regularization='willmore'")
    return _step_variable(state, model, scheme, tau_next, _model.WILLMORE, source)


def bootstrap_variable(phi0: Field, model: ModelParams, scheme: VariableSchemeParams,
                       tau1: float, source: Field | None = None) -> VariableState:
    """First step: the variable scheme at ratio 0 is backward Euler.

    Sets u^0 = sqrt(E~(phi^0)); the previous-level field never enters
    because its difference coefficient carries a factor gamma^2 = 0.
    """
    kind = model.regularization
    _, e0 = _force_variable(phi0, model, scheme.sav, kind)
    seed_state = VariableState(phi_n=phi0, phi_nm1=phi0, u_n=math.sqrt(e0),
                               tau_n=tau1, t=0.0, step_index=0)
    return _step_variable(seed_state, model, scheme, tau1, kind, source,
                          gamma_override=0.0)


def discrete_energy_variable(state: VariableState, model: ModelParams,
                             scheme: VariableSchemeParams, gamma_next: float) -> float:
    """Discrete modified energy of the variable schemes at the state's level.

    The look-ahead term weights the last increment by the NEXT step ratio;
    pass 0 after the final step, which zeroes it.  Linear kind adds the
    (beta/2) ||lap phi||^2 penalty; the Willmore kind replaces it with the
    lambda3 shift term (the curvature penalty lives inside |u|^2 there).
    """
    theta = scheme.theta
    sav = scheme.sav
    eps2 = model.epsilon**2
    phi = state.phi_n
    lap_phi = laplacian(phi)
    grad_sq = -inner(phi, lap_phi)

    energy = state.u_n**2
    energy += 0.5 * sav.lambda1 / eps2 * inner(phi, phi)
    energy += 0.5 * sav.lambda2 * grad_sq
    if model.regularization == _model.LINEAR:
        energy += 0.5 * model.beta * inner(lap_phi, lap_phi)
    else:
        energy += 0.5 * sav.lambda3 * inner(lap_phi, lap_phi)

    coeff = (2.0 * theta - 1.0) * gamma_next**1.5 / (2.0 * (1.0 + gamma_next))
    if coeff > 0.0 and state.step_index > 0:
        increment = state.phi_n - state.phi_nm1
        energy += coeff * inv_grad_norm_sq(increment) / (model.mobility * state.tau_n)
    return float(energy)


def simulate_variable(phi0: Field, model: ModelParams, scheme: VariableSchemeParams,
                      steps: StepSequence, source_fn=None, observer=None) -> VariableState:
    """Drive a variable-step run over a precomputed step sequence.

    ``source_fn(t)`` supplies manufactured forcing at the evaluation time
    t^n + theta tau_{n+1}; ``observer(state, k)`` is called after every step
    with the index into the sequence.
    """
    theta = scheme.theta
    taus = steps.taus
    state = bootstrap_variable(phi0, model, scheme, taus[0],
                               source=source_fn(theta * taus[0]) if source_fn else None)
    if observer is not None:
        observer(state, 0)
    for k in range(1, len(taus)):
        src = source_fn(state.t + theta * taus[k]) if source_fn else None
        stepper = step_VL if model.regularization == _model.LINEAR else step_VW
        state = stepper(state, model, scheme, taus[k], source=src)
        if observer is not None:
            observer(state, k)
    return state
