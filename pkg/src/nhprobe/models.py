"""Lattice-model constructors.

Every model family is built as a dense complex matrix in real space
(Hamiltonian or one-step evolution operator) and, where translational
invariance allows, as a small Bloch matrix.  Site ordering is cell-major,
internal-minor everywhere: component index = cell * levels + level, and for
2D lattices cell = x * Ly + y.

Fourier convention: a hopping block T(d) = <r+d|H|r> contributes
T(d) * exp(-i k d) to the Bloch matrix, so the asymmetric chain with
leftward amplitude J_L and rightward amplitude J_R disperses as
E(k) = J_L e^{ik} + J_R e^{-ik}.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import NotApplicableError, ParameterError, SizeError


class BC(str, enum.Enum):
    PBC = "pbc"
    OBC = "obc"


class Kind(str, enum.Enum):
    HAMILTONIAN = "hamiltonian"
    EVOLUTION = "evolution"


class Family(str, enum.Enum):
    HATANO_NELSON = "hatano_nelson"
    NH_SSH = "nh_ssh"
    NH_AAH = "nh_aah"
    NH_QWZ = "nh_qwz"
    QUANTUM_WALK = "quantum_walk"
    SSH_CHIRAL_INV = "ssh_chiral_inv"
    SSH_PT = "ssh_pt"


# Parameters each family accepts (exact set; extras rejected).
FAMILY_PARAMS: dict[Family, frozenset[str]] = {
    Family.HATANO_NELSON: frozenset({"J_L", "J_R"}),
    Family.NH_SSH: frozenset({"J1L", "J1R", "J2"}),
    Family.NH_AAH: frozenset({"J", "V", "theta", "h", "alpha"}),
    Family.NH_QWZ: frozenset({"t1", "t2", "m_z", "gamma_x", "gamma_y", "gamma_z"}),
    Family.QUANTUM_WALK: frozenset({"theta1", "theta2", "gamma"}),
    Family.SSH_CHIRAL_INV: frozenset({"lam"}),
    Family.SSH_PT: frozenset({"J1", "J2", "delta"}),
}

# Families whose sites carry a two-level internal space.
TWO_LEVEL = {Family.NH_SSH, Family.NH_QWZ, Family.QUANTUM_WALK,
             Family.SSH_CHIRAL_INV, Family.SSH_PT}

# Inter-cell geometry switch for the two-band chains.  "a_to_next_b" couples
# sublattice A of cell j to B of cell j+1 (the default transcription);
# "b_to_next_a" is the textbook dimerization B of cell j to A of cell j+1.
SSH_VARIANTS = ("a_to_next_b", "b_to_next_a")

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def fibonacci_numbers(limit: int = 10**9) -> list[int]:
    """Fibonacci numbers 1, 2, 3, 5, ... up to `limit` (deduplicated)."""
    fibs = [1, 2]
    while fibs[-1] <= limit:
        fibs.append(fibs[-1] + fibs[-2])
    return [f for f in fibs if f <= limit]


def fibonacci_ratio(L: int) -> float | None:
    """F_{n+1}/F_n when L equals the Fibonacci number F_n, else None."""
    prev, cur = 1, 1
    while cur < L:
        prev, cur = cur, prev + cur
    if cur == L:
        return (cur + prev) / cur
    return None


@dataclass(frozen=True)
class ModelSpec:
    """Tagged description of one model instance.

    size counts sites (single-band chains), unit cells (two-band chains) or
    sites per direction (2D).  bc holds one entry per direction.
    """

    family: Family
    size: int
    params: Mapping[str, float]
    bc: tuple[BC, ...] = (BC.OBC,)
    variant: str | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        bc = tuple(BC(b) for b in (self.bc if isinstance(self.bc, (tuple, list)) else (self.bc,)))
        object.__setattr__(self, "bc", bc)
        if self.size < 2:
            raise SizeError(f"size must be >= 2, got {self.size}")
        ndim = 2 if family is Family.NH_QWZ else 1
        if len(bc) != ndim:
            raise ParameterError(
                f"{family.value} expects {ndim} boundary condition(s), got {len(bc)}")
        params = dict(self.params)
        allowed = FAMILY_PARAMS[family]
        if family is Family.NH_AAH:
            params.setdefault("alpha", _aah_alpha(self.size))
        missing = sorted(allowed - params.keys())
        extra = sorted(params.keys() - allowed)
        if missing:
            raise ParameterError(f"{family.value} missing parameter(s) {missing}")
        if extra:
            raise ParameterError(f"{family.value} got unknown parameter(s) {extra}")
        if family is Family.NH_AAH and params["V"] <= 0:
            raise ParameterError("V must be positive")
        if self.variant is not None:
            if family is not Family.NH_SSH:
                raise ParameterError("variant switch applies to nh_ssh only")
            if self.variant not in SSH_VARIANTS:
                raise ParameterError(f"variant must be one of {SSH_VARIANTS}")
        object.__setattr__(self, "params", params)

    @property
    def internal_levels(self) -> int:
        return 2 if self.family in TWO_LEVEL else 1

    @property
    def sites(self) -> int:
        return self.size ** (2 if self.family is Family.NH_QWZ else 1)

    @property
    def dim(self) -> int:
        return self.sites * self.internal_levels

    def with_size(self, size: int) -> "ModelSpec":
        return replace(self, size=size)


def _aah_alpha(L: int) -> float:
    ratio = fibonacci_ratio(L)
    if ratio is None:
        warnings.warn(
            f"size {L} is not a Fibonacci number; using the golden ratio for alpha "
            "(finite-size boundary mismatch expected)", stacklevel=3)
        return GOLDEN_RATIO
    return ratio


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator with its lattice metadata."""

    entries: np.ndarray
    internal_levels: int
    geometry: tuple[int, ...]
    kind: Kind = Kind.HAMILTONIAN

    def __post_init__(self):
        n = self.entries.shape[0]
        if self.entries.shape != (n, n):
            raise ParameterError("operator must be square")
        sites = int(np.prod(self.geometry))
        if n != sites * self.internal_levels:
            raise ParameterError("dim must equal sites * internal_levels")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def sites(self) -> int:
        return int(np.prod(self.geometry))


def _check_size(L: int, minimum: int = 2) -> None:
    if L < minimum:
        raise SizeError(f"need at least {minimum} sites/cells, got {L}")


def build_hatano_nelson(L: int, J_L: float, J_R: float, bc: BC = BC.OBC) -> OperatorMatrix:
    """Asymmetric-hopping chain: amplitude J_L toward lower site index,
    J_R toward higher, zero diagonal.  PBC closes the ring with one wrap
    bond of the same amplitudes."""
    _check_size(L)
    h = np.zeros((L, L), dtype=complex)
    for j in range(L - 1):
        h[j, j + 1] = J_L
        h[j + 1, j] = J_R
    if BC(bc) is BC.PBC:
        h[L - 1, 0] = J_L
        h[0, L - 1] = J_R
    return OperatorMatrix(h, 1, (L,))


def build_nh_ssh(Lcells: int, J1L: float, J1R: float, J2: float,
                 bc: BC = BC.OBC, variant: str = "a_to_next_b") -> OperatorMatrix:
    """Two-band chain with asymmetric intra-cell hoppings J1L (B->A) and
    J1R (A->B) and a symmetric inter-cell bond J2.

    variant selects the inter-cell orientation, see SSH_VARIANTS.
    """
    _check_size(Lcells)
    if variant not in SSH_VARIANTS:
        raise ParameterError(f"variant must be one of {SSH_VARIANTS}")
    n = 2 * Lcells
    h = np.zeros((n, n), dtype=complex)
    for j in range(Lcells):
        a, b = 2 * j, 2 * j + 1
        h[a, b] = J1L
        h[b, a] = J1R
    wrap = BC(bc) is BC.PBC
    for j in range(Lcells):
        nxt = j + 1
        if nxt == Lcells:
            if not wrap:
                continue
            nxt = 0
        if variant == "a_to_next_b":
            i, k = 2 * j, 2 * nxt + 1          # A_j <-> B_{j+1}
        else:
            i, k = 2 * j + 1, 2 * nxt          # B_j <-> A_{j+1}
        h[i, k] = J2
        h[k, i] = J2
    return OperatorMatrix(h, 2, (Lcells,))


def build_aah(L: int, J: float, V: float, theta: float, h: float,
              bc: BC = BC.OBC, alpha: float | None = None) -> OperatorMatrix:
    """Quasiperiodic chain: symmetric hopping J and complex on-site
    potential V*cos(2*pi*alpha*j + theta + i*h), sites j = 1..L.

    alpha defaults to the rational approximant F_{n+1}/F_n when L = F_n,
    otherwise to the golden ratio (with a warning).
    """
    _check_size(L)
    if V <= 0:
        raise ParameterError("V must be positive")
    if alpha is None:
        alpha = _aah_alpha(L)
    m = np.zeros((L, L), dtype=complex)
    j = np.arange(1, L + 1)
    m[np.diag_indices(L)] = V * np.cos(2.0 * np.pi * alpha * j + theta + 1j * h)
    for i in range(L - 1):
        m[i, i + 1] = J
        m[i + 1, i] = J
    if BC(bc) is BC.PBC:
        m[L - 1, 0] = J
        m[0, L - 1] = J
    return OperatorMatrix(m, 1, (L,))


def build_qwz_bloch(kx: float, ky: float, spec: ModelSpec) -> np.ndarray:
    """2x2 Bloch matrix of the two-dimensional Chern-insulator model."""
    if spec.family is not Family.NH_QWZ:
        raise NotApplicableError("build_qwz_bloch expects an nh_qwz spec")
    p = spec.params
    dx = 2.0 * p["t1"] * math.sin(kx) + 1j * p["gamma_x"]
    dy = 2.0 * p["t1"] * math.sin(ky) + 1j * p["gamma_y"]
    dz = p["m_z"] - 2.0 * p["t2"] * (math.cos(kx) + math.cos(ky)) + 1j * p["gamma_z"]
    return dx * _SIGMA_X + dy * _SIGMA_Y + dz * _SIGMA_Z


def build_qwz_real_space(Lx: int, Ly: int, spec: ModelSpec,
                         bc_x: BC = BC.OBC, bc_y: BC = BC.OBC) -> OperatorMatrix:
    """Real-space Chern-insulator lattice, 2*Lx*Ly dimensional.

    Hoppings follow from substituting sin k -> (e^{ik}-e^{-ik})/2i and
    cos k -> (e^{ik}+e^{-ik})/2 in each direction; the on-site block is
    (m_z + i*gamma_z) sigma_z + i*gamma_x sigma_x + i*gamma_y sigma_y.
    Mixed boundary conditions give the stripe geometry.
    """
    _check_size(Lx)
    _check_size(Ly)
    if spec.family is not Family.NH_QWZ:
        raise NotApplicableError("build_qwz_real_space expects an nh_qwz spec")
    p = spec.params
    t1, t2 = p["t1"], p["t2"]
    onsite = ((p["m_z"] + 1j * p["gamma_z"]) * _SIGMA_Z
              + 1j * p["gamma_x"] * _SIGMA_X + 1j * p["gamma_y"] * _SIGMA_Y)
    # <r|H|r+x> and <r+x|H|r> blocks, likewise along y.
    hop_minus_x = -1j * t1 * _SIGMA_X - t2 * _SIGMA_Z
    hop_plus_x = +1j * t1 * _SIGMA_X - t2 * _SIGMA_Z
    hop_minus_y = -1j * t1 * _SIGMA_Y - t2 * _SIGMA_Z
    hop_plus_y = +1j * t1 * _SIGMA_Y - t2 * _SIGMA_Z

    n = 2 * Lx * Ly
    h = np.zeros((n, n), dtype=complex)

    def block(ix, iy):
        c = 2 * (ix * Ly + iy)
        return slice(c, c + 2)

    for x in range(Lx):
        for y in range(Ly):
            h[block(x, y), block(x, y)] += onsite
            xn = x + 1
            if xn == Lx and BC(bc_x) is BC.PBC:
                xn = 0
            if xn < Lx:
                h[block(x, y), block(xn, y)] += hop_minus_x
                h[block(xn, y), block(x, y)] += hop_plus_x
            yn = y + 1
            if yn == Ly and BC(bc_y) is BC.PBC:
                yn = 0
            if yn < Ly:
                h[block(x, y), block(x, yn)] += hop_minus_y
                h[block(x, yn), block(x, y)] += hop_plus_y
    return OperatorMatrix(h, 2, (Lx, Ly))


def _coin_rotation(angle: float) -> np.ndarray:
    # exp(-i*angle*sigma_y), a real rotation of the internal space
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def build_quantum_walk(L: int, theta1: float, theta2: float, gamma: float,
                       bc: BC = BC.OBC) -> OperatorMatrix:
    """One-step operator of the non-unitary split-step walk:
    R(theta1/2) S_up R(theta2/2) M R(theta2/2) S_down R(theta1/2).

    S_up moves the up-polarized component one site toward lower index,
    S_down moves the down component toward higher index; under OBC the
    amplitude shifted past an end is annihilated (lossy wall).  M applies
    the on-site gain/loss exp(gamma * sigma_z).
    """
    _check_size(L)
    eye = np.eye(L)
    shift_up = np.eye(L, k=1)      # |j-1><j|
    shift_down = np.eye(L, k=-1)   # |j+1><j|
    if BC(bc) is BC.PBC:
        shift_up[L - 1, 0] = 1.0
        shift_down[0, L - 1] = 1.0
    p_up = np.array([[1.0, 0.0], [0.0, 0.0]])
    p_down = np.array([[0.0, 0.0], [0.0, 1.0]])
    s_up = np.kron(shift_up, p_up) + np.kron(eye, p_down)
    s_down = np.kron(shift_down, p_down) + np.kron(eye, p_up)
    r1 = np.kron(eye, _coin_rotation(theta1 / 2.0))
    r2 = np.kron(eye, _coin_rotation(theta2 / 2.0))
    m = np.kron(eye, np.diag([math.exp(gamma), math.exp(-gamma)]).astype(complex))
    u = r1 @ s_up @ r2 @ m @ r2 @ s_down @ r1
    return OperatorMatrix(u, 2, (L,), kind=Kind.EVOLUTION)


def ssh_chiral_couplings(lam: float) -> tuple[complex, float]:
    """Couplings of the chiral/inversion-symmetric chain as functions of
    the control angle: intra-cell e^{i*pi/5} sin(lam), inter-cell cos(lam)."""
    return cmath.exp(1j * math.pi / 5.0) * math.sin(lam), math.cos(lam)


def build_ssh_chiral_inv(Lcells: int, lam: float, bc: BC = BC.OBC) -> OperatorMatrix:
    """Two-band chain with symmetric complex couplings parameterized by one
    angle; the line gap closes where the two coupling magnitudes meet."""
    _check_size(Lcells)
    j1, j2 = ssh_chiral_couplings(lam)
    n = 2 * Lcells
    h = np.zeros((n, n), dtype=complex)
    for j in range(Lcells):
        a, b = 2 * j, 2 * j + 1
        h[a, b] = j1
        h[b, a] = j1
    wrap = BC(bc) is BC.PBC
    for j in range(Lcells):
        nxt = j + 1
        if nxt == Lcells:
            if not wrap:
                continue
            nxt = 0
        a, b = 2 * j, 2 * nxt + 1              # A_j <-> B_{j+1}
        h[a, b] = j2
        h[b, a] = j2
    return OperatorMatrix(h, 2, (Lcells,))


def build_ssh_pt(Lcells: int, J1: float, J2: float, delta: float,
                 bc: BC = BC.OBC) -> OperatorMatrix:
    """PT-symmetric two-band chain: real symmetric hoppings J1 (intra) and
    J2 (inter), staggered imaginary potential +i*delta on A, -i*delta on B."""
    _check_size(Lcells)
    n = 2 * Lcells
    h = np.zeros((n, n), dtype=complex)
    for j in range(Lcells):
        a, b = 2 * j, 2 * j + 1
        h[a, b] = J1
        h[b, a] = J1
        h[a, a] = 1j * delta
        h[b, b] = -1j * delta
    wrap = BC(bc) is BC.PBC
    for j in range(Lcells):
        nxt = j + 1
        if nxt == Lcells:
            if not wrap:
                continue
            nxt = 0
        a, b = 2 * j, 2 * nxt + 1              # A_j <-> B_{j+1}
        h[a, b] = J2
        h[b, a] = J2
    return OperatorMatrix(h, 2, (Lcells,))


def build_operator(spec: ModelSpec) -> OperatorMatrix:
    """Real-space operator for any family, dispatching on the spec."""
    p = spec.params
    f = spec.family
    if f is Family.HATANO_NELSON:
        return build_hatano_nelson(spec.size, p["J_L"], p["J_R"], spec.bc[0])
    if f is Family.NH_SSH:
        return build_nh_ssh(spec.size, p["J1L"], p["J1R"], p["J2"], spec.bc[0],
                            variant=spec.variant or "a_to_next_b")
    if f is Family.NH_AAH:
        return build_aah(spec.size, p["J"], p["V"], p["theta"], p["h"],
                         spec.bc[0], alpha=p["alpha"])
    if f is Family.NH_QWZ:
        return build_qwz_real_space(spec.size, spec.size, spec, spec.bc[0], spec.bc[1])
    if f is Family.QUANTUM_WALK:
        return build_quantum_walk(spec.size, p["theta1"], p["theta2"], p["gamma"], spec.bc[0])
    if f is Family.SSH_CHIRAL_INV:
        return build_ssh_chiral_inv(spec.size, p["lam"], spec.bc[0])
    if f is Family.SSH_PT:
        return build_ssh_pt(spec.size, p["J1"], p["J2"], p["delta"], spec.bc[0])
    raise NotApplicableError(f"no builder for family {f}")


def bloch_matrix(spec: ModelSpec, k: float) -> np.ndarray:
    """Bloch matrix of a translation-invariant 1D family at momentum k."""
    p = spec.params
    f = spec.family
    eik, emk = cmath.exp(1j * k), cmath.exp(-1j * k)
    if f is Family.HATANO_NELSON:
        return np.array([[p["J_L"] * eik + p["J_R"] * emk]], dtype=complex)
    if f is Family.NH_SSH:
        if (spec.variant or "a_to_next_b") == "a_to_next_b":
            return np.array([[0.0, p["J1L"] + p["J2"] * eik],
                             [p["J1R"] + p["J2"] * emk, 0.0]], dtype=complex)
        return np.array([[0.0, p["J1L"] + p["J2"] * emk],
                         [p["J1R"] + p["J2"] * eik, 0.0]], dtype=complex)
    if f is Family.SSH_CHIRAL_INV:
        j1, j2 = ssh_chiral_couplings(p["lam"])
        return np.array([[0.0, j1 + j2 * eik],
                         [j1 + j2 * emk, 0.0]], dtype=complex)
    if f is Family.SSH_PT:
        return np.array([[1j * p["delta"], p["J1"] + p["J2"] * eik],
                         [p["J1"] + p["J2"] * emk, -1j * p["delta"]]], dtype=complex)
    if f is Family.QUANTUM_WALK:
        r1 = _coin_rotation(p["theta1"] / 2.0)
        r2 = _coin_rotation(p["theta2"] / 2.0)
        m = np.diag([math.exp(p["gamma"]), math.exp(-p["gamma"])]).astype(complex)
        s_up = np.diag([eik, 1.0])
        s_down = np.diag([1.0, emk])
        return r1 @ s_up @ r2 @ m @ r2 @ s_down @ r1
    raise NotApplicableError(f"{f.value} has no 1D Bloch form")


# Estimation parameter of each family: the knob the Fisher information is
# taken with respect to, expressed through the fixed reference couplings.
def with_lambda(spec: ModelSpec, lam: float) -> ModelSpec:
    """Spec with its estimation parameter set to `lam`."""
    p = dict(spec.params)
    f = spec.family
    if f is Family.HATANO_NELSON:
        p["J_R"] = lam * p["J_L"]
    elif f is Family.NH_SSH:
        p["J1R"] = lam * p["J1L"]
    elif f is Family.NH_AAH:
        p["h"] = lam
    elif f is Family.NH_QWZ:
        p["t1"] = lam * p["m_z"]
    elif f is Family.QUANTUM_WALK:
        p["theta2"] = lam
    elif f is Family.SSH_CHIRAL_INV:
        p["lam"] = lam
    elif f is Family.SSH_PT:
        p["J1"] = lam * p["J2"]
    else:
        raise NotApplicableError(f"no estimation parameter for {f}")
    return replace(spec, params=p)


def lambda_of(spec: ModelSpec) -> float:
    """Current value of the family's estimation parameter."""
    p = spec.params
    f = spec.family
    if f is Family.HATANO_NELSON:
        return p["J_R"] / p["J_L"]
    if f is Family.NH_SSH:
        return p["J1R"] / p["J1L"]
    if f is Family.NH_AAH:
        return p["h"]
    if f is Family.NH_QWZ:
        return p["t1"] / p["m_z"]
    if f is Family.QUANTUM_WALK:
        return p["theta2"]
    if f is Family.SSH_CHIRAL_INV:
        return p["lam"]
    if f is Family.SSH_PT:
        return p["J1"] / p["J2"]
    raise NotApplicableError(f"no estimation parameter for {f}")
