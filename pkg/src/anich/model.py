"""Continuous-model ingredients for the anisotropic Cahn-Hilliard system.

Everything here is pointwise algebra on collocation values plus spectral
derivatives: the double-well potential, the fourfold anisotropy weight and
its regularized interface normal, the anisotropic flux vector, the SAV
auxiliary force fields for the uniform and variable-step schemes, and the
original total energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveRadicand
from .spectral import (
    Field,
    dealias_23,
    divergence,
    gradient,
    inner,
    integrate,
    laplacian,
)

LINEAR = "linear"
WILLMORE = "willmore"

#: anisotropy strength at and above which the unregularized problem is ill-posed
STRONG_ANISOTROPY_THRESHOLD = 1.0 / 15.0


@dataclass(frozen=True)
class ModelParams:
    """Physical and model constants.

    epsilon: interface thickness (> 0).
    alpha: fourfold anisotropy strength (>= 0); alpha >= 1/15 is the strongly
        anisotropic regime.
    beta: curvature-regularization weight (>= 0).
    mobility: constant mobility M (> 0); the fast diagonal solves require it
        to be constant.
    regularization: "linear" (bi-Laplacian penalty) or "willmore".
    eta: floor regularizing the interface normal where the gradient vanishes.
    eta_flux: separate, larger floor for the 1/|grad phi| division in the
        anisotropic flux.  With a single floor the flux carries spikes of
        height ~ alpha W / eta wherever a grid point's gradient magnitude
        drifts through the eta window (the projector factor n^3 (1 - n^2)
        peaks exactly where the division blows up); each spike permanently
        degrades the relaxed auxiliary scalar of the variable-step schemes.
        Splitting the floors bounds the product by ~ alpha W eta / eta_flux^2,
        which vanishes with eta, while gradients above eta_flux see the
        exact 1/|grad phi| flux.
    dealias: apply the 2/3 rule to the assembled nonlinear force fields.
    willmore_pointwise: reproduce the pointwise-product variant of the
        Willmore force instead of the operator form (comparison only; the
        operator form is the variational derivative).
    """

    epsilon: float = 0.2
    alpha: float = 0.0
    beta: float = 6e-4
    mobility: float = 1.0
    regularization: str = LINEAR
    eta: float = 1e-6
    eta_flux: float = 1e-2
    dealias: bool = False
    willmore_pointwise: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.mobility <= 0:
            raise ValueError("mobility must be positive")
        if self.eta <= 0 or self.eta_flux <= 0:
            raise ValueError("eta and eta_flux must be positive")
        if self.regularization not in (LINEAR, WILLMORE):
            raise ValueError(f"unknown regularization {self.regularization!r}")

    @property
    def strongly_anisotropic(self) -> bool:
        return self.alpha >= STRONG_ANISOTROPY_THRESHOLD


@dataclass(frozen=True)
class SavParams:
    """Scalar-auxiliary-variable constants.

    c0 shifts the energy radicand positive; it must dominate the shift
    deductions of the variable-step energies (checked at runtime, not
    assumed).  lambda1..lambda3 are the zero-consistent shift coefficients
    of the variable-step schemes (lambda3 only enters the Willmore variant).
    """

    c0: float = 1000.0
    lambda1: float = 0.0
    lambda2: float = 4.0
    lambda3: float = 0.01

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("shift coefficients must be non-negative")


def double_well(phi: Field) -> tuple[Field, Field, Field]:
    """Double-well potential F = (phi^2-1)^2/4 with f = F' and f' pointwise."""
    v = phi.values
    F = 0.25 * (v * v - 1.0) ** 2
    f = v * (v * v - 1.0)
    fprime = 3.0 * v * v - 1.0
    g = phi.grid
    return Field(g, F), Field(g, f), Field(g, fprime)


def anisotropy(grad_phi, params: ModelParams, potential_density: Field | None = None):
    """Fourfold anisotropy weight and the anisotropic flux vector.

    With the regularized gradient magnitude g = sqrt(|grad phi|^2 + eta^2)
    and normal n = grad phi / g:

        gamma = 1 + alpha (4 sum_d n_d^4 - 3)
        m     = gamma grad phi + (P grad_n gamma) * W * g / (g^2 + eta_flux^2)

    where P = I - n n^T, grad_n gamma = 16 alpha n_d^3, and the energy
    density W = |grad phi|^2 / 2 + potential_density uses the unregularized
    gradient.  The division factor equals 1/|grad phi| wherever the gradient
    exceeds eta_flux and decays to zero below it, which suppresses the
    single-floor regularization spikes (see :class:`ModelParams`).
    ``potential_density`` is F(phi)/eps^2 when the full flux is wanted;
    omitting it drops that term (gamma is unaffected).

    Returns (gamma, m) with m a list of one Field per dimension.
    """
    grid = grad_phi[0].grid
    gvals = [g.values for g in grad_phi]
    grad_sq = sum(v * v for v in gvals)
    reg_mag = np.sqrt(grad_sq + params.eta**2)
    normals = [v / reg_mag for v in gvals]

    alpha = params.alpha
    s4 = sum(n**4 for n in normals)
    gamma_vals = 1.0 + alpha * (4.0 * s4 - 3.0)

    W = 0.5 * grad_sq
    if potential_density is not None:
        W = W + potential_density.values

    inv_mag = reg_mag / (reg_mag**2 + params.eta_flux**2)
    dgamma = [16.0 * alpha * n**3 for n in normals]
    n_dot_dg = sum(n * d for n, d in zip(normals, dgamma))
    m = []
    for d in range(grid.dim):
        proj = dgamma[d] - normals[d] * n_dot_dg
        m.append(Field(grid, gamma_vals * gvals[d] + proj * inv_mag * W))
    return Field(grid, gamma_vals), m


def _anisotropic_parts(phi: Field, params: ModelParams):
    """Shared assembly: returns (gamma*W density, gamma*f/eps^2 - div m, f, F)."""
    eps2 = params.epsilon**2
    grads = gradient(phi)
    F, f, _ = double_well(phi)
    gamma, m = anisotropy(grads, params, potential_density=F * (1.0 / eps2))
    grad_sq = sum(g * g for g in grads)
    density = gamma * (0.5 * grad_sq + F * (1.0 / eps2))
    force = gamma * f * (1.0 / eps2) - divergence(m)
    return density, force, f, F


def _willmore_extra(phi: Field, params: ModelParams):
    """Willmore penalty pieces: (omega, force contribution)."""
    eps2 = params.epsilon**2
    _, f, fprime = double_well(phi)
    omega = laplacian(phi) - f * (1.0 / eps2)
    if params.willmore_pointwise:
        # pointwise-product variant, kept for comparison runs only
        contrib = omega * (laplacian(phi) - fprime * (1.0 / eps2))
    else:
        contrib = laplacian(omega) - fprime * omega * (1.0 / eps2)
    return omega, params.beta * contrib


def _checked_energy(value: float, what: str) -> float:
    if not value > 0.0:
        raise NonPositiveRadicand(f"{what} radicand {value:.6g} <= 0; increase the SAV constant")
    return value


def sav_linear_uniform(phi: Field, params: ModelParams, sav: SavParams):
    """Uniform-mesh SAV force for the linear-regularization model.

    Returns (H, E1) with E1 = int gamma (|grad phi|^2/2 + F/eps^2) + C and
    H the anisotropic variational force divided by sqrt(E1).
    """
    density, force, _, _ = _anisotropic_parts(phi, params)
    E1 = _checked_energy(integrate(density) + sav.c0, "E1")
    if params.dealias:
        force = dealias_23(force)
    return force * (1.0 / np.sqrt(E1)), E1


def sav_willmore_uniform(phi: Field, params: ModelParams, sav: SavParams):
    """Uniform-mesh SAV force for the Willmore-regularization model."""
    density, force, _, _ = _anisotropic_parts(phi, params)
    omega, extra = _willmore_extra(phi, params)
    E2 = _checked_energy(
        integrate(density + 0.5 * params.beta * omega * omega) + sav.c0, "E2")
    force = force + extra
    if params.dealias:
        force = dealias_23(force)
    return force * (1.0 / np.sqrt(E2)), E2


def sav_linear_variable(phi: Field, params: ModelParams, sav: SavParams):
    """Shifted SAV force for the variable-step linear scheme.

    Returns (scriptH, E1_tilde).  scriptH is NOT divided by the square root;
    the ratio enters through the relaxation factor in the stepper.
    """
    eps2 = params.epsilon**2
    grads = gradient(phi)
    F, f, _ = double_well(phi)
    gamma, m = anisotropy(grads, params, potential_density=F * (1.0 / eps2))
    grad_sq = sum(g * g for g in grads)
    density = gamma * (0.5 * grad_sq + F * (1.0 / eps2)) \
        - (0.5 * sav.lambda1 / eps2) * (phi * phi) - 0.5 * sav.lambda2 * grad_sq
    E1t = _checked_energy(integrate(density) + sav.c0, "E1_tilde")
    force = gamma * f * (1.0 / eps2) - divergence(m) \
        - (sav.lambda1 / eps2) * phi + sav.lambda2 * laplacian(phi)
    if params.dealias:
        force = dealias_23(force)
    return force, E1t


def sav_willmore_variable(phi: Field, params: ModelParams, sav: SavParams):
    """Shifted SAV force for the variable-step Willmore scheme."""
    eps2 = params.epsilon**2
    grads = gradient(phi)
    F, f, _ = double_well(phi)
    gamma, m = anisotropy(grads, params, potential_density=F * (1.0 / eps2))
    grad_sq = sum(g * g for g in grads)
    omega, extra = _willmore_extra(phi, params)
    lap_phi = laplacian(phi)
    density = gamma * (0.5 * grad_sq + F * (1.0 / eps2)) \
        + 0.5 * params.beta * omega * omega \
        - (0.5 * sav.lambda1 / eps2) * (phi * phi) \
        - 0.5 * sav.lambda2 * grad_sq \
        - 0.5 * sav.lambda3 * (lap_phi * lap_phi)
    E2t = _checked_energy(integrate(density) + sav.c0, "E2_tilde")
    force = gamma * f * (1.0 / eps2) - divergence(m) + extra \
        - (sav.lambda1 / eps2) * phi + sav.lambda2 * lap_phi \
        - sav.lambda3 * laplacian(phi, power=2)
    if params.dealias:
        force = dealias_23(force)
    return force, E2t


def total_energy(phi: Field, params: ModelParams) -> float:
    """Original total energy: anisotropic part plus the curvature penalty.

    The penalty is (beta/2)(lap phi)^2 for the linear regularization and
    (beta/2)(lap phi - f/eps^2)^2 for the Willmore one.
    """
    density, _, f, _ = _anisotropic_parts(phi, params)
    if params.regularization == LINEAR:
        pen = laplacian(phi)
    else:
        pen = laplacian(phi) - f * (1.0 / params.epsilon**2)
    return integrate(density + 0.5 * params.beta * pen * pen)
