"""Activation dynamics: sigmoids, interaction terms and the descent loop.

Both models evolve an activation stack ``a`` by explicit time stepping of

    da/dt = -(1 + lam) a + lam a0 + mu + (1/2M) * S[a]

where ``S`` applies the heat kernel to a sigmoid of the activity (WC) or
of the local contrast (LHE).  The LHE contrast term is made separable by
replacing the clamped-linear sigmoid with an odd polynomial fit: the
kernel average of ``poly(a(xi) - a(eta))`` expands into coefficient
fields times heat-evolved powers of ``a``.

The LHE flow is the gradient descent of an explicit energy; this module
evaluates that energy (for testing and traces) using the exact even
primitive of the fitted polynomial, so that the finite-difference
gradient of the energy matches the implemented drift.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .cakes import lift
from .core import LHE, WC, ModelConfig, as_stack, project, relative_change
from .heat import HeatPropagator, _evolve_batch, heat_evolve

FIT_SAMPLES = 2001
MAX_POLY_DEGREE = 15


def sigmoid(r, alpha: float):
    """Decreasing saturation of activity: -clamp(alpha * (r - 1/2), -1, 1)."""
    return -np.clip(alpha * (np.asarray(r, dtype=float) - 0.5), -1.0, 1.0)


def sigmoid_hat(r, alpha: float):
    """Odd saturation of contrast: clamp(alpha * r, -1, 1)."""
    return np.clip(alpha * np.asarray(r, dtype=float), -1.0, 1.0)


@dataclass
class PolyCoeffs:
    """Odd-polynomial fit of the contrast sigmoid on [-1, 1].

    ``coeffs[i]`` multiplies r^i (even entries are zero); ``sup_error``
    is the recorded maximum fit deviation over the sample grid.
    """

    degree: int
    coeffs: np.ndarray
    alpha: float
    sup_error: float


def fit_polynomial(alpha: float, degree: int) -> PolyCoeffs:
    """Least-squares odd-monomial fit of ``sigmoid_hat`` over [-1, 1]."""
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    if degree < 1 or degree % 2 == 0:
        raise ValueError("degree must be odd and >= 1")
    if degree > MAX_POLY_DEGREE:
        raise ValueError(f"degree capped at {MAX_POLY_DEGREE}")
    r = np.linspace(-1.0, 1.0, FIT_SAMPLES)
    target = sigmoid_hat(r, alpha)
    exponents = np.arange(1, degree + 1, 2)
    basis = r[:, None] ** exponents[None, :]
    sol, *_ = np.linalg.lstsq(basis, target, rcond=None)
    coeffs = np.zeros(degree + 1)
    coeffs[exponents] = sol
    sup_error = float(np.abs(basis @ sol - target).max())
    return PolyCoeffs(degree, coeffs, alpha, sup_error)


def expand_coefficients(a, poly: PolyCoeffs) -> list[np.ndarray]:
    """Coefficient fields C_i with sum_i C_i(xi) b^i = poly(a(xi) - b).

    The binomial expansion of ``sum_j c_j (a(xi) - a(eta))^j`` collected
    by powers of ``a(eta)``.
    """
    return _collect(as_stack(a), poly.coeffs)


def _collect(a, coeffs) -> list[np.ndarray]:
    n = len(coeffs) - 1
    powers = [np.ones_like(a)]
    for _ in range(n):
        powers.append(powers[-1] * a)
    fields = []
    for i in range(n + 1):
        acc = np.zeros_like(a)
        for j in range(i, n + 1):
            if coeffs[j] != 0.0:
                acc += coeffs[j] * math.comb(j, i) * powers[j - i]
        fields.append((-1.0) ** i * acc)
    return fields


def _primitive_coeffs(coeffs) -> np.ndarray:
    """Even primitive (vanishing at 0) of an odd polynomial, termwise."""
    prim = np.zeros(len(coeffs) + 1)
    for j, c in enumerate(coeffs):
        if c != 0.0:
            prim[j + 1] = c / (j + 1)
    return prim


def wc_interaction(a, prop: HeatPropagator, tau: float, alpha: float, sign: float = 1.0):
    """Heat evolution of the voxelwise activity sigmoid."""
    return heat_evolve(sign * sigmoid(as_stack(a), alpha), prop, tau)


def lhe_interaction(a, prop: HeatPropagator, tau: float, poly: PolyCoeffs):
    """Kernel average of the polynomial contrast sigmoid.

    Computes ``sum_i C_i(xi) * exp(tau L)[a^i](xi)``; the zeroth power
    evolves to the constant 1 and is folded in directly.
    """
    a = as_stack(a)
    evolved = _evolved_powers(a, prop, tau, poly.degree)
    return _combine(a, poly.coeffs, evolved)


def _evolved_powers(a, prop, tau, nmax):
    """Heat-evolved monomials a^1 .. a^nmax, stacked on a trailing axis."""
    m = prop.step_count(tau)
    powers = np.empty(a.shape + (nmax,))
    powers[..., 0] = a
    for i in range(1, nmax):
        powers[..., i] = powers[..., i - 1] * a
    if m == 0:
        return powers
    return _evolve_batch(powers, prop, m)


def _combine(a, coeffs, evolved):
    fields = _collect(a, coeffs)
    out = fields[0].copy()
    for i in range(1, len(fields)):
        out += fields[i] * evolved[..., i - 1]
    return out


def local_mean(a0, sigma_mu: float):
    """Spatial Gaussian blur of each orientation slice (periodic, 4-sigma)."""
    if sigma_mu <= 0:
        raise ValueError("sigma_mu must be > 0")
    return gaussian_filter(
        as_stack(a0), sigma=(sigma_mu, sigma_mu, 0.0), mode="wrap", truncate=4.0
    )


@dataclass
class EvolutionState:
    """Loop state: current activation, lifted stimulus, local mean."""

    a: np.ndarray
    a0: np.ndarray
    mu: np.ndarray
    p: int = 0
    last_change: float = math.inf

    def __post_init__(self):
        if not (self.a.shape == self.a0.shape == self.mu.shape):
            raise ValueError("state stacks must share one shape")


def _forcing(cfg: ModelConfig, a0, mu):
    if cfg.forcing == "continuous":
        return cfg.lam * a0 + mu
    return a0 + cfg.lam * mu  # the discrete-compatibility role swap


def _nonlinearity_sign(cfg: ModelConfig) -> float:
    return 1.0 if cfg.sigma_sign == "paper" else -1.0


def _model_poly(cfg: ModelConfig) -> PolyCoeffs:
    poly = fit_polynomial(cfg.alpha, cfg.poly_degree)
    sign = _nonlinearity_sign(cfg)
    if sign < 0:
        poly = PolyCoeffs(poly.degree, -poly.coeffs, poly.alpha, poly.sup_error)
    return poly


def gd_step(state: EvolutionState, cfg: ModelConfig, interaction) -> np.ndarray:
    """One explicit descent update from a precomputed interaction term."""
    drift = (
        -(1.0 + cfg.lam) * state.a
        + _forcing(cfg, state.a0, state.mu)
        + interaction / (2.0 * cfg.m_scale)
    )
    return state.a + cfg.dt * drift


def model_drift(a, a0, mu, cfg: ModelConfig, prop: HeatPropagator) -> np.ndarray:
    """Right-hand side of the evolution at state ``a``."""
    a = as_stack(a)
    if cfg.model == WC:
        inter = wc_interaction(a, prop, cfg.tau, cfg.alpha, _nonlinearity_sign(cfg))
    else:
        inter = lhe_interaction(a, prop, cfg.tau, _model_poly(cfg))
    return -(1.0 + cfg.lam) * a + _forcing(cfg, a0, mu) + inter / (2.0 * cfg.m_scale)


def lhe_energy(a, a0, mu, cfg: ModelConfig, prop: HeatPropagator) -> float:
    """Energy whose negative gradient is the LHE drift.

    Two quadratic fidelity terms plus the kernel-averaged even primitive
    of the polynomial contrast sigmoid.  The primitive is integrated
    termwise (so Sigma(0) = 0) and the double kernel sum is evaluated
    with the same power expansion as the interaction; the interaction
    term enters with coefficient -1/(4M), which is what makes the
    printed flow its exact gradient descent.
    """
    if cfg.model != LHE:
        raise ValueError("energy is defined for the LHE model")
    a = as_stack(a)
    poly = _model_poly(cfg)
    prim = _primitive_coeffs(poly.coeffs)
    evolved = _evolved_powers(a, prop, cfg.tau, len(prim) - 1)
    return _energy_from_terms(a, a0, mu, cfg, prim, evolved)


def _energy_from_terms(a, a0, mu, cfg, prim, evolved) -> float:
    fidelity = 0.5 * cfg.lam * float(((a - a0) ** 2).sum())
    mean_term = 0.5 * float(((a - mu) ** 2).sum())
    inter_field = _combine(a, prim, evolved)
    inter = -float(inter_field.sum()) / (4.0 * cfg.m_scale)
    return fidelity + mean_term + inter


@dataclass
class RunResult:
    """Outcome of a model run: projected image plus loop diagnostics."""

    image: np.ndarray
    stack: np.ndarray
    iterations: int
    converged: bool
    last_change: float
    rel_history: list
    energies: list | None = None


def run_model(
    f0,
    cfg: ModelConfig,
    bank,
    prop: HeatPropagator,
    trace_energy: bool = False,
) -> RunResult:
    """Lift, iterate to the stopping rule, project.

    Non-convergence within ``cfg.max_iters`` is reported through the
    ``converged`` flag, not an exception.  With ``trace_energy`` (LHE
    only) the energy sequence E(A_0) .. E(A_P) is recorded; it reuses
    the evolved powers already needed by the interaction.
    """
    a0 = lift(f0, bank)
    mu = local_mean(a0, cfg.sigma_mu)
    state = EvolutionState(a=a0.copy(), a0=a0, mu=mu)
    sign = _nonlinearity_sign(cfg)
    trace_energy = trace_energy and cfg.model == LHE
    if cfg.model == LHE:
        poly = _model_poly(cfg)
        prim = _primitive_coeffs(poly.coeffs)
        n_powers = len(prim) - 1 if trace_energy else poly.degree

    rel_history = []
    energies = [] if trace_energy else None
    converged = False
    for p in range(1, cfg.max_iters + 1):
        if cfg.model == WC:
            inter = wc_interaction(state.a, prop, cfg.tau, cfg.alpha, sign)
        else:
            evolved = _evolved_powers(state.a, prop, cfg.tau, n_powers)
            inter = _combine(state.a, poly.coeffs, evolved[..., : poly.degree])
            if trace_energy:
                energies.append(
                    _energy_from_terms(state.a, a0, mu, cfg, prim, evolved)
                )
        new_a = gd_step(state, cfg, inter)
        rel = relative_change(new_a, state.a)
        rel_history.append(rel)
        state = EvolutionState(a=new_a, a0=a0, mu=mu, p=p, last_change=rel)
        if rel < cfg.tol:
            converged = True
            break
    if trace_energy:
        energies.append(lhe_energy(state.a, a0, mu, cfg, prop))

    return RunResult(
        image=project(state.a),
        stack=state.a,
        iterations=state.p,
        converged=converged,
        last_change=state.last_change,
        rel_history=rel_history,
        energies=energies,
    )
