"""Fast invariant suite behind ``anich verify``.

A condensed version of the property checks the test suite runs in full:
each check prints one PASS/FAIL line and the suite reports overall success.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ModelParams, SavParams
from .spectral import Field, build_grid, from_spectral, integrate, to_spectral
from .uniform import (
    UniformSchemeParams,
    bootstrap_bdf1,
    discrete_energy_uniform,
    two_level_identity_terms,
    step_UL,
    wsbdf2_apply,
)
from .variable import gamma_star, ratio_bound_terms, make_steps, vbdf2_apply


def _check_round_trip() -> bool:
    grid = build_grid(2, 32)
    rng = np.random.default_rng(0)
    u = Field(grid, rng.standard_normal(grid.shape))
    v = from_spectral(to_spectral(u))
    return np.max(np.abs(v.values - u.values)) <= 1e-13 * np.max(np.abs(u.values))


def _check_gamma_star() -> bool:
    return abs(gamma_star(1.0) - 4.8645365123) < 1e-6 and math.isinf(gamma_star(0.5))


def _check_two_level_identity() -> bool:
    rng = np.random.default_rng(1)
    for _ in range(100):
        theta = rng.uniform(0.5, 1.0)
        a, b, c = rng.normal(size=3) * 2
        lhs, rhs = two_level_identity_terms(theta, a, b, c)
        if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
            return False
    return True


def _check_ratio_inequality() -> bool:
    rng = np.random.default_rng(2)
    for theta in (0.5, 0.75, 1.0):
        cap = min(gamma_star(theta), 20.0)
        g1 = rng.uniform(0.0, cap, size=2000)
        g2 = rng.uniform(0.0, cap, size=2000)
        tau_n = rng.uniform(0.01, 1.0, size=2000)
        tau_np1 = np.maximum(g1 * tau_n, 1e-8)
        u = rng.normal(size=(3, 2000))
        lhs, rhs = ratio_bound_terms(theta, (g1, g2), (u[0], u[1], u[2]), (tau_n, tau_np1))
        if not np.all(lhs >= rhs - 1e-12 * np.maximum(1.0, np.abs(lhs))):
            return False
    return True


def _check_operator_degeneration() -> bool:
    rng = np.random.default_rng(3)
    for theta in np.arange(0.5, 1.001, 0.1):
        u2, u1, u0 = rng.normal(size=3)
        a = vbdf2_apply(theta, 0.2, 1.0, u2, u1, u0)
        b = wsbdf2_apply(theta, 0.2, u2, u1, u0)
        if abs(a - b) > 1e-14 * max(1.0, abs(b)):
            return False
    return True


def _check_mass_and_energy_run() -> bool:
    grid = build_grid(1, 64)
    model = ModelParams(epsilon=0.2, alpha=0.05, beta=6e-4)
    scheme = UniformSchemeParams(theta=0.75, tau=1e-3, sav=SavParams(c0=100.0))
    phi0 = Field(grid, np.abs(np.sin(grid.meshes[0])))
    mass0 = integrate(phi0)
    state = bootstrap_bdf1(phi0, model, scheme)
    prev = discrete_energy_uniform(state, model, scheme)
    for _ in range(50):
        state = step_UL(state, model, scheme)
        cur = discrete_energy_uniform(state, model, scheme)
        if cur > prev + 1e-10 * (1 + abs(prev)):
            return False
        prev = cur
        if abs(integrate(state.phi_n) - mass0) > 1e-10 * abs(mass0):
            return False
    return True


def _check_step_sequences() -> bool:
    seq = make_steps("random_admissible", 1.0, 100, 1.0, delta=0.1, seed=7)
    return (abs(seq.total - 1.0) < 1e-12
            and seq.ratios.max() <= gamma_star(1.0) - 0.1 + 1e-12)


CHECKS = [
    ("spectral round trip", _check_round_trip),
    ("admissible-ratio root", _check_gamma_star),
    ("two-level telescoping identity", _check_two_level_identity),
    ("variable-step lower bound", _check_ratio_inequality),
    ("operator degeneration at ratio 1", _check_operator_degeneration),
    ("mass conservation and energy decay", _check_mass_and_energy_run),
    ("random admissible step sequences", _check_step_sequences),
]


def run_verification(print_fn=print) -> bool:
    ok = True
    for label, check in CHECKS:
        try:
            passed = check()
        except Exception as exc:  # a crash is a failure, not an abort
            passed = False
            label = f"{label} ({type(exc).__name__}: {exc})"
        print_fn(f"{'PASS' if passed else 'FAIL'}  {label}")
        ok &= passed
    return ok
