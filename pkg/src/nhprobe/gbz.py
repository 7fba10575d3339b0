"""Closed-form generalized-Brillouin-zone solutions.

These serve as analytic oracles for the numerical spectra: exact open-chain
eigenpairs of the asymmetric-hopping chain, the characteristic beta
polynomials of the two-band and 2D models, the walk localization modulus,
and the point-gap-closing locators.

Branch convention: lambda^(1/2) and (J_R*J_L)^(1/2) use the principal
branch throughout, i.e. r = |lambda|^(1/2) and the half-angle arg(lambda)/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (ContractViolation, DegenerateModelError,
                     NotApplicableError, ParameterError, PoleError)
from .models import Family, ModelSpec

BETA_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class GbzSolution:
    """Roots of a characteristic beta polynomial, with the common modulus
    when the equal-modulus condition applies."""

    betas: tuple[complex, ...]
    modulus: float | None = None
    energy: complex | None = None
    note: str = ""


@dataclass(frozen=True)
class CriticalPoint:
    """One parameter value at which a family's point gap closes."""

    param: str
    value: float
    full_collapse: bool


def hn_obc_energies(L: int, J_L: float, J_R: float) -> np.ndarray:
    """Exact open-chain energies 2*(J_R*J_L)^(1/2) * cos(m*pi/(L+1)),
    m = 1..L, principal square root."""
    if L < 2:
        raise ContractViolation(f"L must be >= 2, got {L}")
    if J_L == 0:
        raise DegenerateModelError("J_L = 0 leaves a one-way chain")
    root = cmath.sqrt(complex(J_R * J_L))
    m = np.arange(1, L + 1)
    return 2.0 * root * np.cos(m * np.pi / (L + 1))


def _hn_weights(L: int, lam: complex, m: int) -> np.ndarray:
    """Unnormalized |amplitude|^2 profile |lambda|^j sin^2(j theta_m),
    rescaled by the largest power so any |lambda| stays in range."""
    x = abs(lam)
    j = np.arange(1, L + 1)
    shift = L if x > 1.0 else 0
    return x ** (j - shift) * np.sin(j * m * np.pi / (L + 1)) ** 2


def hn_norm_factor(L: int, lam: complex, m: int, shift: int = 0) -> float:
    """Normalization of the open-chain eigenstate from the closed-form
    geometric-sum assembly: with r = |lambda|^(1/2) and w = exp(i m pi/(L+1)),

        N^2 = 4 / sum_j [ 2 r^(2j) - (r w)^(2j) - (r/w)^(2j) ],

    the bracket being 4 r^(2j) sin^2(j m pi/(L+1)).  The three sums are
    evaluated as exact finite sums, which stays well-conditioned at r = 1
    where the closed ratio forms cancel.  `shift` rescales every power by
    r^(-2*shift) so |lambda| > 1 cannot overflow."""
    r2 = abs(lam)
    j = np.arange(1, L + 1, dtype=float)
    rj = r2 ** (j - shift)
    # the (r*w)^2j and (r/w)^2j sums are conjugates for real r
    osc = rj * np.exp(2j * m * np.pi / (L + 1) * j)
    denom = 2.0 * rj.sum() - 2.0 * osc.sum().real
    if denom <= 0:
        raise DegenerateModelError("normalization sum vanished")
    return 2.0 / math.sqrt(denom)


def hn_obc_state(L: int, lam: complex, m: int) -> np.ndarray:
    """Exact open-chain eigenstate lambda^(j/2) sin(j m pi/(L+1)), j = 1..L,
    normalized to unit conventional norm by the closed-form factor."""
    if not 1 <= m <= L:
        raise ContractViolation(f"m must lie in 1..{L}, got {m}")
    if lam == 0:
        raise DegenerateModelError("lambda = 0 is fully degenerate")
    lam = complex(lam)
    j = np.arange(1, L + 1)
    half_log = 0.5 * cmath.log(lam)
    shift = L if abs(lam) > 1.0 else 0
    # lambda^(j/2) with the overall |lambda|^(shift/2) magnitude factored out
    amp = np.exp((j - shift) * half_log.real + 1j * j * half_log.imag)
    amp = amp * np.sin(j * m * np.pi / (L + 1))
    return (hn_norm_factor(L, lam, m, shift=shift) * amp).astype(complex)


def hn_obc_state_dlambda(L: int, lam: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """State and its exact derivative along the real estimation parameter.

    For real lambda the amplitude phases are constant, so
    d psi_j = psi_j * (j - <j>) / (2 lambda) with <j> the mean site index
    of the population.
    """
    if lam == 0:
        raise DegenerateModelError("lambda = 0 is fully degenerate")
    psi = hn_obc_state(L, lam, m)
    j = np.arange(1, L + 1)
    p = np.abs(psi) ** 2
    mean_j = float((j * p).sum())
    dpsi = psi * (j - mean_j) / (2.0 * lam)
    return psi, dpsi


def ssh_beta_roots(E: complex, spec: ModelSpec) -> GbzSolution:
    """Roots of the two-band bulk quadratic

        J2*J1L * beta^2 + (J2^2 + J1L*J1R - E^2) * beta + J2*J1R = 0,

    whose product is J1R/J1L.  Applies to the textbook inter-cell
    orientation; the mirrored orientation swaps beta -> 1/beta."""
    if spec.family is not Family.NH_SSH:
        raise NotApplicableError("ssh_beta_roots expects an nh_ssh spec")
    p = spec.params
    j1l, j1r, j2 = p["J1L"], p["J1R"], p["J2"]
    if j2 == 0 or j1l == 0:
        raise DegenerateModelError("J2 and J1L must be nonzero")
    coeffs = np.array([j2 * j1l, j2 ** 2 + j1l * j1r - E ** 2, j2 * j1r], dtype=complex)
    betas = np.roots(coeffs)
    product = betas[0] * betas[1]
    target = j1r / j1l
    if abs(product - target) > 1e-8 * max(1.0, abs(target)):
        raise DegenerateModelError("root product failed the Vieta check")
    return GbzSolution(tuple(betas), modulus=math.sqrt(abs(target)), energy=E)


def _ssh_theta_polynomial(L: int, c: float) -> np.ndarray:
    """Coefficients (descending) of the polynomial in u = e^{i theta} whose
    roots solve the open-chain quantization at J1R = -J1L.

    Even L:  u^(2L+2) + c u^(2L+1) - c u + 1 = 0
    Odd  L:  u^(2L+2) + c u^(2L+1) + c u - 1 = 0

    Both contain the trivial factor u^2 + 1 (the beta_1 = beta_2 point),
    which is divided out exactly.
    """
    deg = 2 * L + 2
    coeffs = np.zeros(deg + 1, dtype=complex)
    coeffs[0] = 1.0
    coeffs[1] = c
    if L % 2 == 0:
        coeffs[deg - 1] = -c
        coeffs[deg] = 1.0
    else:
        coeffs[deg - 1] = c
        coeffs[deg] = -1.0
    quotient, remainder = np.polydiv(coeffs, np.array([1.0, 0.0, 1.0]))
    if np.max(np.abs(remainder)) > 1e-9:
        raise DegenerateModelError("trivial-factor deflation failed")
    return quotient


def ssh_transcendental_solve(L: int, J1L: float, J1R: float, J2: float) -> np.ndarray:
    """Quantized GBZ phases theta of the open two-band chain at J1R = -J1L.

    The quantization condition
        cos((L+1) theta) + i c sin(L theta) = 0   (even L)
        sin((L+1) theta) - i c cos(L theta) = 0   (odd L)
    with c = J2/sqrt(|J1R*J1L|) has no real roots at finite L (the real and
    imaginary parts cannot vanish simultaneously), so the phases are complex.
    Substituting u = e^{i theta} turns each condition into a polynomial whose
    roots come from a companion matrix; roots pair as (u, -1/u), both members
    describing the same eigenstate, and one representative per pair is kept.

    Returns L complex phases sorted by (real, imaginary) part, with
    Re(theta) in (-pi, pi] (principal logarithm of the kept root).
    """
    if L < 2:
        raise ContractViolation(f"L must be >= 2, got {L}")
    if abs(J1R + J1L) > 1e-12 * max(1.0, abs(J1L)):
        raise NotApplicableError("closed-form phases require J1R = -J1L")
    if J1L == 0 or J2 == 0:
        raise DegenerateModelError("J1L and J2 must be nonzero")
    c = J2 / math.sqrt(abs(J1R * J1L))
    u = np.roots(_ssh_theta_polynomial(L, c))
    if u.size != 2 * L:
        raise DegenerateModelError(f"expected {2 * L} roots, found {u.size}")
    # the members of a pair share sin(theta) = (u - 1/u)/(2i) and hence the
    # mode; deduplicate on that invariant and report the member's phase
    s = (u - 1.0 / u) / 2j
    order = np.lexsort((s.imag, s.real))
    kept_s: list[complex] = []
    kept_theta: list[complex] = []
    for ui, si in zip(u[order], s[order]):
        if any(abs(si - sj) < 1e-7 * max(1.0, abs(sj)) for sj in kept_s):
            continue
        kept_s.append(complex(si))
        kept_theta.append(complex(-1j * np.log(ui)))
    if len(kept_theta) != L:
        raise DegenerateModelError(
            f"pairing failed: {len(kept_theta)} distinct phases, expected {L}")
    theta = np.array(kept_theta)
    return theta[np.lexsort((theta.imag, theta.real))]


def ssh_mode_energy(theta: complex, J1L: float, J2: float) -> complex:
    """Squared energy J2^2 - J1L^2 + 2i J1L J2 sin(theta) of the mode with
    GBZ phase theta (J1R = -J1L case); principal square root taken by the
    caller as needed."""
    return J2 ** 2 - J1L ** 2 + 2j * J1L * J2 * cmath.sin(theta)


def ssh_mode_state(theta: complex, L: int, J1L: float, J2: float,
                   sign: int = 1) -> tuple[complex, np.ndarray]:
    """Eigenpair assembled from a GBZ phase for the J1R = -J1L open chain
    (textbook inter-cell orientation).

    With tp = theta - pi/2 the components read
        psi_{j,A} ~ i^j (J1L sin(j tp) - i J2 sin((j-1) tp)) / E
        psi_{j,B} ~ i^j sin(j tp)
    and E = sign * sqrt(ssh_mode_energy).  Returns (E, unit-norm state).
    """
    e2 = ssh_mode_energy(theta, J1L, J2)
    E = sign * cmath.sqrt(e2)
    if E == 0:
        raise DegenerateModelError("zero-energy mode has no A/B ratio")
    tp = theta - np.pi / 2.0
    j = np.arange(1, L + 1)
    phase = 1j ** j
    sin_j = np.sin(j * tp)
    sin_jm1 = np.sin((j - 1) * tp)
    psi = np.zeros(2 * L, dtype=complex)
    psi[0::2] = phase * (J1L * sin_j - 1j * J2 * sin_jm1) / E
    psi[1::2] = phase * sin_j
    n = np.linalg.norm(psi)
    if n == 0:
        raise DegenerateModelError("assembled state vanished")
    return E, psi / n


def qwz_beta_quartic(E: complex, kx: float, spec: ModelSpec) -> GbzSolution:
    """Roots of the quartic characteristic polynomial of the 2D model's
    fixed-k_x chain,

      (t1^2-t2^2) b^4 - 2(gy t1 + M t2) b^3
        + (E^2 + gy^2 + 2(t1^2-t2^2) - M^2 - K^2) b^2
        + 2(gy t1 - M t2) b + (t1^2-t2^2) = 0,

    with M = m_z - 2 t2 cos kx + i gz and K = 2 t1 sin kx + i gx.  When the
    leading coefficient vanishes (t1 = +-t2) the reduced quadratic is solved
    instead and its root product equals (M - gy)/(M + gy)."""
    if spec.family is not Family.NH_QWZ:
        raise NotApplicableError("qwz_beta_quartic expects an nh_qwz spec")
    p = spec.params
    t1, t2 = p["t1"], p["t2"]
    gx, gy, gz = p["gamma_x"], p["gamma_y"], p["gamma_z"]
    M = p["m_z"] - 2.0 * t2 * math.cos(kx) + 1j * gz
    K = 2.0 * t1 * math.sin(kx) + 1j * gx
    a4 = t1 ** 2 - t2 ** 2
    a3 = -2.0 * (gy * t1 + M * t2)
    a2 = E ** 2 + gy ** 2 + 2.0 * (t1 ** 2 - t2 ** 2) - M ** 2 - K ** 2
    a1 = 2.0 * (gy * t1 - M * t2)
    a0 = t1 ** 2 - t2 ** 2
    scale = max(abs(a3), abs(a2), abs(a1), 1e-300)
    note = ""
    if abs(a4) <= 1e-12 * scale:
        coeffs = np.array([a3, a2, a1], dtype=complex)
        note = "degenerate leading coefficient; quadratic branch"
    else:
        coeffs = np.array([a4, a3, a2, a1, a0], dtype=complex)
    betas = np.roots(coeffs)
    res = np.abs(np.polyval(coeffs, betas))
    if np.max(res) > BETA_RESIDUAL_TOL * max(1.0, float(np.max(np.abs(coeffs)))):
        raise DegenerateModelError("beta roots failed the residual check")
    mods = np.abs(betas)
    modulus = float(mods[0]) if np.allclose(mods, mods[0], rtol=1e-6) else None
    return GbzSolution(tuple(betas), modulus=modulus, energy=E, note=note)


def qw_beta_modulus(theta2: float, gamma: float) -> float:
    """Localization modulus of the non-unitary walk:
    sqrt(|(cosh g cos t2 - sinh g)/(cosh g cos t2 + sinh g)|)."""
    num = math.cosh(gamma) * math.cos(theta2) - math.sinh(gamma)
    den = math.cosh(gamma) * math.cos(theta2) + math.sinh(gamma)
    if abs(den) < 1e-14:
        raise PoleError("cosh(gamma) cos(theta2) + sinh(gamma) vanishes")
    return math.sqrt(abs(num / den))


def point_gap_closing(spec: ModelSpec) -> tuple[CriticalPoint, ...]:
    """Parameter values at which the family's point gap closes.

    full_collapse marks the closings where the whole spectrum contracts to
    an arc (so the skin effect vanishes for any open geometry); the 2D model
    has two further closings that only empty the fixed-k_x loops.
    """
    f = spec.family
    p = spec.params
    if f in (Family.HATANO_NELSON, Family.NH_SSH):
        name = "J_R/J_L" if f is Family.HATANO_NELSON else "J1R/J1L"
        return (CriticalPoint(name, 1.0, True), CriticalPoint(name, -1.0, True))
    if f is Family.NH_AAH:
        ratio = 2.0 * p["J"] / p["V"]
        if ratio <= 0:
            raise ParameterError("h_c requires 2J/V > 0")
        return (CriticalPoint("h", math.log(ratio), True),)
    if f is Family.NH_QWZ:
        return (CriticalPoint("t1/m_z", 0.0, True),
                CriticalPoint("t2/m_z", 0.0, False),
                CriticalPoint("gamma_y/m_z", 0.0, False))
    if f is Family.QUANTUM_WALK:
        return (CriticalPoint("theta2", math.pi / 2.0, True),
                CriticalPoint("theta2", 3.0 * math.pi / 2.0, True))
    raise NotApplicableError(f"{f.value} carries a line gap only")
