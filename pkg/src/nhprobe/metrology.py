"""Quantum and classical Fisher information of parameterized eigenstates.

The probe state is a unit-norm right eigenstate tracked along the estimation
parameter.  Derivatives are central differences with (i) eigenstate matching
across the step by maximal overlap and (ii) gauge fixing that makes each
neighbor's overlap with the center state real and positive; a half-step
stability check guards every accepted step.  For the asymmetric-hopping
chain an exact analytic state path replaces the eigensolver, which is
meaningless at large size away from criticality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gbz, spectral
from .errors import (ContractViolation, DegenerateOverlapError,
                     EdgeStateAbsentError, NotApplicableError, TrackingError,
                     TrustError)
from .models import BC, Family, Kind, ModelSpec, build_operator, with_lambda

OVERLAP_MIN = 0.9
STEP_REL_TOL = 1e-3
DEFAULT_STEP_SCALE = 1e-5
# analytic HN path is the default; the eigensolver path needs an explicit ask
HN_NUMERIC_OVERRIDE = "numeric"
# edge selection tolerances
PT_EDGE_TOL = 0.1          # |E - i*delta| < 0.1*delta
CHIRAL_MIDGAP_FRACTION = 0.25   # min|E| below this fraction of median |E|


@dataclass(frozen=True)
class FisherRecord:
    model: str
    lam: float
    L: int
    selector: str
    F_Q: float
    F_C: float
    fd_step: float
    gauge_overlap: float
    residual_flag: bool = False
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScalingFit:
    a: float
    b: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SweepEntry:
    lam: float
    fit: ScalingFit | None
    error: str | None = None


@dataclass(frozen=True)
class DerivativeResult:
    psi: np.ndarray
    dpsi: np.ndarray
    gauge_overlap: float
    residual_flag: bool
    selector_label: str


def qfi_pure(psi: np.ndarray, dpsi: np.ndarray) -> float:
    """Pure-state quantum Fisher information
    4*(<dpsi|dpsi> - |<dpsi|psi>|^2); psi must be unit norm."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ContractViolation(f"state norm {norm} is not 1")
    val = 4.0 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
    if val < 0 and val > -1e-12 * max(1.0, np.vdot(dpsi, dpsi).real):
        val = 0.0
    return float(val)


def cfi_position(psi: np.ndarray, dpsi: np.ndarray,
                 return_dropped_bound: bool = False):
    """Classical Fisher information of the position-basis distribution
    p_n = |psi_n|^2: sum_n (dp_n)^2 / p_n with dp_n = 2 Re(psi_n* dpsi_n).

    Components with p_n < 1e-14 are dropped; their contribution is bounded
    by 4*sum |dpsi_n|^2 over the dropped set, returned on request."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ContractViolation(f"state norm {norm} is not 1")
    p = np.abs(psi) ** 2
    dp = 2.0 * (psi.conj() * dpsi).real
    keep = p >= 1e-14
    val = float(np.sum(dp[keep] ** 2 / p[keep]))
    if return_dropped_bound:
        bound = float(4.0 * np.sum(np.abs(dpsi[~keep]) ** 2))
        return val, bound
    return val


def qfi_hn_analytic(lam: float, L: int, m: int) -> float:
    """Exact Fisher information of the asymmetric-chain eigenstate m.

    With the population p_j proportional to |lambda|^j sin^2(j m pi/(L+1)),
    the closed-form state differentiates to d psi_j = psi_j (j - <j>)/(2 lam)
    along the real parameter axis (the half-angle phases are locally
    constant), so F_Q = Var_p(j) / lam^2.  The moment sums are evaluated as
    exact finite sums, valid at and away from the critical point."""
    if lam == 0:
        raise ContractViolation("lambda = 0 is degenerate")
    if not 1 <= m <= L:
        raise ContractViolation(f"m must lie in 1..{L}")
    w = gbz._hn_weights(L, lam, m)
    j = np.arange(1, L + 1, dtype=float)
    s0 = w.sum()
    mean = (j * w).sum() / s0
    var = ((j - mean) ** 2 * w).sum() / s0
    return float(var / lam ** 2)


# ---------------------------------------------------------------------------
# state selection and derivatives

def _selector_label(selector) -> str:
    if selector == "steady":
        return "steady-state"
    if selector == "edge":
        return "edge-state"
    return f"m={int(selector)}"


def _hn_analytic_mode(spec: ModelSpec, lam: float, selector) -> int:
    """Closed-form mode index the selector refers to."""
    if isinstance(selector, int):
        return selector
    if selector == "steady":
        en = gbz.hn_obc_energies(spec.size, spec.params["J_L"],
                                 lam * spec.params["J_L"])
        top = en.imag.max()
        ties = np.flatnonzero(en.imag >= top - spectral.STEADY_TIE_TOL)
        return int(ties[np.argmin(en.real[ties])]) + 1
    raise NotApplicableError(f"selector {selector!r} not defined on the analytic path")


def _select_index(spec: ModelSpec, spectrum: spectral.Spectrum, selector) -> int:
    if selector == "steady":
        return spectral.steady_state(spectrum).index
    if selector == "edge":
        return _select_edge_index(spec, spectrum)
    if isinstance(selector, int):
        if spec.family is Family.HATANO_NELSON:
            target = gbz.hn_obc_energies(
                spec.size, spec.params["J_L"], spec.params["J_R"])[selector - 1]
            return int(np.argmin(np.abs(spectrum.energies - target)))
        if not 0 <= selector < len(spectrum):
            raise ContractViolation(f"state index {selector} out of range")
        return selector
    raise ContractViolation(f"unknown selector {selector!r}")


def _select_edge_index(spec: ModelSpec, spectrum: spectral.Spectrum) -> int:
    en = spectrum.energies
    if spec.family is Family.SSH_PT:
        delta = spec.params["delta"]
        dist = np.abs(en - 1j * delta)
        idx = int(np.argmin(dist))
        if dist[idx] >= PT_EDGE_TOL * abs(delta):
            raise EdgeStateAbsentError(
                f"nearest state misses i*delta by {dist[idx]:.3e} "
                f"(tolerance {PT_EDGE_TOL * abs(delta):.3e})")
        return idx
    if spec.family is Family.SSH_CHIRAL_INV:
        mags = np.abs(en)
        idx = int(np.argmin(mags))
        median = float(np.median(mags))
        if median == 0.0 or mags[idx] >= CHIRAL_MIDGAP_FRACTION * median:
            raise EdgeStateAbsentError(
                f"no midgap state: min|E| = {mags[idx]:.3e} vs median {median:.3e}")
        return idx
    raise NotApplicableError("edge selection applies to the line-gap chains")


def _tracked_state(spec: ModelSpec, psi0: np.ndarray, residual_ok: bool = True):
    """Diagonalize the spec and return the (gauge-fixed) eigenstate closest
    to psi0 together with the overlap achieved."""
    spectrum = spectral.eig(build_operator(spec))
    overlaps = np.abs(psi0.conj() @ spectrum.right_vectors)
    order = np.argsort(overlaps)[::-1]
    best = int(order[0])
    if overlaps[best] < OVERLAP_MIN:
        raise TrackingError(
            f"best overlap {overlaps[best]:.3f} < {OVERLAP_MIN}; "
            "parameter step too coarse or level crossing")
    # right eigenvectors are not orthogonal, so a sizeable runner-up overlap
    # is only ambiguous when the best match itself is materially below 1
    if (len(order) > 1 and overlaps[best] < 0.98
            and overlaps[order[1]] > 0.9 * overlaps[best]):
        raise DegenerateOverlapError(
            f"ambiguous tracking: states {best} and {int(order[1])} overlap "
            f"{overlaps[best]:.3f} vs {overlaps[order[1]]:.3f}",
            indices=(best, int(order[1])))
    if residual_ok and not spectrum.trusted[best]:
        raise TrustError(
            f"pair untrusted: residual {spectrum.residuals[best]:.2e}, "
            f"forward error {spectrum.forward_errors[best]:.2e}")
    v = spectrum.right_vectors[:, best]
    ov = np.vdot(psi0, v)
    return v * np.exp(-1j * np.angle(ov)), float(abs(ov))


def state_derivative(spec: ModelSpec, lam: float, selector="steady",
                     step: float | None = None, path: str = "auto") -> DerivativeResult:
    """Probe state and its central-difference derivative at lam.

    path: "auto" (analytic states for the asymmetric chain, eigensolver
    otherwise), "analytic", or "numeric"."""
    if step is None:
        step = DEFAULT_STEP_SCALE * max(1.0, abs(lam))
    if path == "auto":
        path = "analytic" if spec.family is Family.HATANO_NELSON else "numeric"
    if path == "analytic":
        if spec.family is not Family.HATANO_NELSON:
            raise NotApplicableError("analytic path exists for the asymmetric chain only")
        m = _hn_analytic_mode(spec, lam, selector)
        L = spec.size
        psi0 = gbz.hn_obc_state(L, lam, m)
        psip = gbz.hn_obc_state(L, lam + step, m)
        psim = gbz.hn_obc_state(L, lam - step, m)
        op, om = np.vdot(psi0, psip), np.vdot(psi0, psim)
        psip = psip * np.exp(-1j * np.angle(op))
        psim = psim * np.exp(-1j * np.angle(om))
        dpsi = (psip - psim) / (2.0 * step)
        return DerivativeResult(psi0, dpsi, float(min(abs(op), abs(om))),
                                False, _selector_label(selector))
    if path != "numeric":
        raise ContractViolation(f"unknown path {path!r}")
    center = with_lambda(spec, lam)
    spectrum = spectral.eig(build_operator(center))
    idx = _select_index(center, spectrum, selector)
    if not spectrum.trusted[idx]:
        raise TrustError(
            f"selected state untrusted (residual {spectrum.residuals[idx]:.2e}, "
            f"forward error {spectrum.forward_errors[idx]:.2e}); "
            "use an analytic path where available")
    psi0 = spectrum.right_vectors[:, idx]
    psip, op = _tracked_state(with_lambda(spec, lam + step), psi0)
    psim, om = _tracked_state(with_lambda(spec, lam - step), psi0)
    dpsi = (psip - psim) / (2.0 * step)
    residual_flag = bool(np.any(~spectrum.trusted))
    return DerivativeResult(psi0, dpsi, float(min(op, om)), residual_flag,
                            _selector_label(selector))


def fisher_record(spec: ModelSpec, lam: float, selector="steady",
                  fd_step: float | None = None, path: str = "auto",
                  max_halvings: int = 3) -> FisherRecord:
    """Quantum and classical Fisher information at one parameter point.

    The finite-difference step must pass the half-step stability check
    |F_Q(step) - F_Q(step/2)| / F_Q < 1e-3; on failure the step halves, up
    to max_halvings times.  The accepted record carries the half-step values.
    """
    step = fd_step if fd_step is not None else DEFAULT_STEP_SCALE * max(1.0, abs(lam))
    d_full = state_derivative(spec, lam, selector, step, path)
    fq_full = qfi_pure(d_full.psi, d_full.dpsi)
    flags: list[str] = []
    for _ in range(max_halvings + 1):
        d_half = state_derivative(spec, lam, selector, step / 2.0, path)
        fq_half = qfi_pure(d_half.psi, d_half.dpsi)
        scale = max(abs(fq_full), abs(fq_half))
        if scale < 1e-12 or abs(fq_full - fq_half) <= STEP_REL_TOL * scale:
            fc = cfi_position(d_half.psi, d_half.dpsi)
            if path == "auto" and spec.family is Family.HATANO_NELSON:
                flags.append("analytic-path")
            if d_half.residual_flag:
                flags.append("untrusted-pairs-elsewhere")
            return FisherRecord(
                model=spec.family.value, lam=float(lam), L=int(spec.size),
                selector=d_half.selector_label, F_Q=fq_half, F_C=fc,
                fd_step=step / 2.0, gauge_overlap=d_half.gauge_overlap,
                residual_flag=d_half.residual_flag, flags=tuple(flags))
        step /= 2.0
        d_full, fq_full = d_half, fq_half
    raise TrackingError(
        f"finite-difference step failed to stabilize after {max_halvings} halvings "
        f"(last relative change {abs(fq_full - fq_half) / max(scale, 1e-300):.2e})")


def edge_state_qfi(spec: ModelSpec, lam: float,
                   fd_step: float | None = None) -> FisherRecord:
    """Fisher record of the midgap edge state of the line-gap chains."""
    if spec.family not in (Family.SSH_CHIRAL_INV, Family.SSH_PT):
        raise NotApplicableError("edge-state records exist for the line-gap chains")
    if any(b is not BC.OBC for b in spec.bc):
        raise ContractViolation("edge states need open boundaries")
    return fisher_record(spec, lam, selector="edge", fd_step=fd_step, path="numeric")


def scaling_fit(points) -> ScalingFit:
    """Least-squares power law F = a * L^b on (log L, log F)."""
    pts = [(float(L), float(F)) for L, F in points]
    if len(pts) < 5:
        raise ContractViolation(f"fit needs >= 5 sizes, got {len(pts)}")
    Ls = np.array([p[0] for p in pts])
    Fs = np.array([p[1] for p in pts])
    if np.any(np.diff(Ls) <= 0):
        raise ContractViolation("sizes must be strictly increasing")
    if np.any(Fs <= 0):
        raise ContractViolation("Fisher values must be positive")
    x, y = np.log(Ls), np.log(Fs)
    b, loga = np.polyfit(x, y, 1)
    resid = y - (b * x + loga)
    sstot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sstot if sstot > 0 else 1.0
    return ScalingFit(float(np.exp(loga)), float(b), r2, tuple(pts))


def exponent_sweep(spec: ModelSpec, lambdas, sizes, selector="steady",
                   fd_step: float | None = None, path: str = "auto",
                   record_sink: list | None = None) -> list[SweepEntry]:
    """Per-lambda power-law fit of F_Q over the size grid.

    Cell failures become explanatory gaps (entry.error), never silent."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < 5:
        raise ContractViolation("sweep needs >= 5 sizes per lambda")
    entries: list[SweepEntry] = []
    for lam in lambdas:
        pts = []
        cell = sizes[0]
        try:
            for L in sizes:
                cell = L
                rec = fisher_record(spec.with_size(L), float(lam), selector,
                                    fd_step=fd_step, path=path)
                if record_sink is not None:
                    record_sink.append(rec)
                pts.append((L, rec.F_Q))
            entries.append(SweepEntry(float(lam), scaling_fit(pts)))
        except Exception as exc:  # propagate per-cell identity, keep sweeping
            entries.append(SweepEntry(
                float(lam), None,
                f"{type(exc).__name__} at (lambda={lam}, L={cell}): {exc}"))
    return entries
