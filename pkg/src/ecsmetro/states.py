"""Probe states, photon-number bookkeeping and phase-space pictures.

Conventions: quadratures are ``x = (a + a^dagger)/sqrt(2)``, ``p = i(a^dagger - a)/sqrt(2)``,
Wigner functions integrate to one over ``dx dp``. The interferometer arms are
modes 1 and 2; after the output 50:50 beamsplitter the modes are ``a_+`` and
``a_-``. The coherent amplitude ``alpha`` is taken real and nonnegative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gammaln

from .specfun import lambert_w0

__all__ = [
    "Family",
    "StateFamily",
    "InterferometerParams",
    "DephasingParams",
    "DisplacementPair",
    "WignerGrid",
    "TruncationError",
    "UnsupportedFamilyError",
    "ecs_normalization",
    "mean_photons",
    "alpha_sq_from_mean_photons",
    "alpha_from_mean_photons",
    "displacement_pair",
    "coherent_amplitudes",
    "fock_truncated_state",
    "default_cutoff",
    "reduced_wigner_ecs",
    "reduced_wigner_ecs_at",
    "reduced_wigner_marginal",
]


class TruncationError(ValueError):
    """Fock cutoff too small for the requested state."""


class UnsupportedFamilyError(ValueError):
    """Operation not defined for the given state family."""


class Family(str, enum.Enum):
    ECS = "ecs"
    QWP = "qwp"
    NOON = "noon"


@dataclass(frozen=True)
class StateFamily:
    """Which probe state is fed into the interferometer."""

    tag: Family
    noon_N: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))
        if self.tag is Family.NOON:
            if self.noon_N is None or int(self.noon_N) != self.noon_N or self.noon_N < 1:
                raise ValueError("N00N states need an integer noon_N >= 1")
            object.__setattr__(self, "noon_N", int(self.noon_N))
        elif self.noon_N is not None:
            raise ValueError("noon_N is only meaningful for N00N states")

    @classmethod
    def ecs(cls) -> "StateFamily":
        return cls(Family.ECS)

    @classmethod
    def qwp(cls) -> "StateFamily":
        return cls(Family.QWP)

    @classmethod
    def noon(cls, N: int) -> "StateFamily":
        return cls(Family.NOON, N)

    @classmethod
    def parse(cls, name: str, N: int | None = None) -> "StateFamily":
        tag = Family(name.strip().lower())
        return cls(tag, N if tag is Family.NOON else None)

    def __str__(self) -> str:
        return f"noon({self.noon_N})" if self.tag is Family.NOON else self.tag.value


@dataclass(frozen=True)
class InterferometerParams:
    """Coherent amplitude, arm phases and per-photon loss probability."""

    alpha: float
    phi1: float = 0.0
    phi2: float = 0.0
    loss_p: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "phi1", "phi2", "loss_p"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0 (alpha is taken real and nonnegative)")
        if not 0.0 <= self.loss_p <= 1.0:
            raise ValueError("loss_p must lie in [0, 1]")

    @classmethod
    def from_phase(cls, alpha: float, phi: float, phi_bar: float = 0.0, loss_p: float = 0.0):
        """Build from the differential phase ``phi`` and mean phase ``phi_bar``."""
        return cls(alpha, phi_bar + 0.5 * phi, phi_bar - 0.5 * phi, loss_p)

    @property
    def phi(self) -> float:
        return self.phi1 - self.phi2

    @property
    def phi_bar(self) -> float:
        return 0.5 * (self.phi1 + self.phi2)

    @property
    def visibility(self) -> float:
        """Interference visibility ``exp(-p alpha^2)`` left after photon loss."""
        return math.exp(-self.loss_p * self.alpha**2)

    def with_phi(self, phi: float) -> "InterferometerParams":
        """Same ``phi_bar``, amplitude and loss; new differential phase."""
        pb = self.phi_bar
        return replace(self, phi1=pb + 0.5 * phi, phi2=pb - 0.5 * phi)


@dataclass(frozen=True)
class DephasingParams:
    """Qubit coherence decay ``exp(-chi - i vartheta)``; only used for QWP states."""

    chi: float = 0.0
    vartheta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "vartheta", float(self.vartheta))
        if not (self.chi >= 0.0):
            raise ValueError("chi must be >= 0")
        if not math.isfinite(self.vartheta):
            raise ValueError("vartheta must be finite")


NO_DEPHASING = DephasingParams()


@dataclass(frozen=True)
class DisplacementPair:
    """Quadrature means of the measured ``a_+`` and ``a_-`` homodyne outcomes."""

    mu_plus: float
    mu_minus: float


@dataclass(frozen=True)
class WignerGrid:
    """Wigner density sampled on a rectangular grid; ``values[i, j] = W(x_axis[i], p_axis[j])``."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    @property
    def cell_area(self) -> float:
        return float((self.x_axis[1] - self.x_axis[0]) * (self.p_axis[1] - self.p_axis[0]))

    def total(self) -> float:
        """Riemann sum times cell area; ~1 when the grid covers the state."""
        return float(self.values.sum() * self.cell_area)


def ecs_normalization(alpha: float) -> float:
    """``[2 (1 + exp(-alpha^2))]^{-1/2}``."""
    return (2.0 * (1.0 + math.exp(-alpha * alpha))) ** -0.5


def mean_photons(family: StateFamily, alpha: float) -> float:
    """Total mean photon number ``<n_1 + n_2>`` of the input state.

    For N00N states ``alpha`` is ignored and N is returned.
    """
    if family.tag is Family.NOON:
        return float(family.noon_N)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    a2 = alpha * alpha
    if family.tag is Family.QWP:
        return a2
    return a2 / (1.0 + math.exp(-a2))


def alpha_sq_from_mean_photons(family: StateFamily, n_bar: float) -> float:
    """Invert :func:`mean_photons`: ``alpha**2`` giving total mean photon number ``n_bar``."""
    if n_bar < 0:
        raise ValueError("n_bar must be >= 0")
    if family.tag is Family.QWP:
        return float(n_bar)
    if family.tag is Family.ECS:
        return n_bar + lambert_w0(n_bar * math.exp(-n_bar))
    raise UnsupportedFamilyError("N00N photon number is fixed by N, not by an amplitude")


def alpha_from_mean_photons(family: StateFamily, n_bar: float) -> float:
    return math.sqrt(alpha_sq_from_mean_photons(family, n_bar))


def displacement_pair(params: InterferometerParams) -> DisplacementPair:
    s = math.sqrt(1.0 - params.loss_p) * params.alpha
    half = 0.5 * params.phi
    return DisplacementPair(s * math.sin(half), s * math.cos(half))


# --- Fock-space construction (oracle support) --------------------------------


def default_cutoff(alpha: float) -> int:
    """Per-mode Fock cutoff with Poisson tail well below 1e-12."""
    return int(math.ceil(alpha * alpha + 10.0 * alpha + 10.0))


def coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes ``<n|beta>`` for ``n < cutoff`` (not renormalized)."""
    n = np.arange(cutoff)
    r = abs(beta)
    if r == 0.0:
        return (n == 0).astype(complex)
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1.0)
    return np.exp(logmag + 1j * n * np.angle(beta))


def fock_truncated_state(
    family: StateFamily, params: InterferometerParams, cutoff: int | None = None
) -> np.ndarray:
    """Input probe state in a truncated Fock basis, after the arm phases.

    Returns an array indexed ``[n1, n2]`` for ECS and N00N states and
    ``[qubit, n1, n2]`` for QWP states (qubit index 0 is up, 1 is down). The
    arm phases ``exp(-i phi_k n_k)`` are applied; loss is not. The vector is
    renormalized after truncation.

    Raises
    ------
    TruncationError
        If more than 1e-9 of the norm falls outside the cutoff.
    """
    alpha = params.alpha
    if cutoff is None:
        cutoff = default_cutoff(alpha)
        if family.tag is Family.NOON:
            cutoff = max(cutoff, family.noon_N + 1)
    cutoff = int(cutoff)
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    n = np.arange(cutoff)
    ph1 = np.exp(-1j * params.phi1 * n)
    ph2 = np.exp(-1j * params.phi2 * n)
    vac = (n == 0).astype(complex)

    if family.tag is Family.NOON:
        N = family.noon_N
        if N >= cutoff:
            raise TruncationError(f"cutoff {cutoff} cannot hold N = {N}")
        e_N = (n == N).astype(complex)
        psi = (np.outer(e_N * ph1, vac) + np.outer(vac, e_N * ph2)) / math.sqrt(2.0)
        return psi

    coh = coherent_amplitudes(alpha, cutoff)
    kept = float(np.vdot(coh, coh).real)
    if 1.0 - kept > 1e-9:
        raise TruncationError(
            f"cutoff {cutoff} drops {1.0 - kept:.3e} of the coherent-state weight at alpha={alpha}"
        )
    if family.tag is Family.ECS:
        psi = np.outer(coh * ph1, vac) + np.outer(vac, coh * ph2)
    else:
        psi = np.zeros((2, cutoff, cutoff), dtype=complex)
        psi[0] = np.outer(coh * ph1, vac)
        psi[1] = np.outer(vac, coh * ph2)
    return psi / np.linalg.norm(psi)


# --- reduced Wigner distribution of mode a_+ ---------------------------------


def _branch_amplitudes(params: InterferometerParams):
    """Coherent amplitudes of the two ECS branches in modes (a_+, a_-)."""
    a = params.alpha / math.sqrt(2.0)
    b1 = a * complex(math.cos(params.phi1), math.sin(params.phi1))
    b2 = a * complex(math.cos(params.phi2), math.sin(params.phi2))
    # branch 1: (b1, b1); branch 2: (-b2, b2)
    return b1, -b2, b1, b2


def _dyad_wigner(beta: complex, gamma: complex, z: np.ndarray) -> np.ndarray:
    # Wigner function of |beta><gamma| in dx dp measure, z = (x + i p)/sqrt(2).
    expo = (
        -0.5 * abs(beta) ** 2
        - 0.5 * abs(gamma) ** 2
        + np.conj(gamma) * beta
        - 2.0 * (z - beta) * (np.conj(z) - np.conj(gamma))
    )
    return np.exp(expo) / math.pi


def reduced_wigner_ecs_at(params: InterferometerParams, x, p) -> np.ndarray:
    """Reduced Wigner function ``W(x_+, p_+)`` of mode ``a_+`` at arbitrary points."""
    if params.loss_p != 0.0:
        raise ValueError("the reduced Wigner distribution is only provided for loss_p = 0")
    plus1, plus2, minus1, minus2 = _branch_amplitudes(params)
    z = (np.asarray(x, dtype=float) + 1j * np.asarray(p, dtype=float)) / math.sqrt(2.0)
    norm2 = ecs_normalization(params.alpha) ** 2
    # overlap <minus2|minus1> of the traced-out a_- mode
    ov = np.exp(-0.5 * abs(minus1) ** 2 - 0.5 * abs(minus2) ** 2 + np.conj(minus2) * minus1)
    w = (
        _dyad_wigner(plus1, plus1, z).real
        + _dyad_wigner(plus2, plus2, z).real
        + 2.0 * (ov * _dyad_wigner(plus1, plus2, z)).real
    )
    return norm2 * w


def reduced_wigner_ecs(
    params: InterferometerParams,
    x_range: tuple[float, float] | None = None,
    p_range: tuple[float, float] | None = None,
    resolution: int | tuple[int, int] = 400,
) -> WignerGrid:
    """Sample the reduced Wigner distribution of mode ``a_+`` on a grid.

    Default window is ``[-(alpha + 4), alpha + 4]`` in both quadratures.
    """
    if params.loss_p != 0.0:
        raise ValueError("the reduced Wigner distribution is only provided for loss_p = 0")
    half = params.alpha + 4.0
    x_range = x_range or (-half, half)
    p_range = p_range or (-half, half)
    nx, npts = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx < 2 or npts < 2:
        raise ValueError("resolution must be at least 2 per axis")
    xs = np.linspace(x_range[0], x_range[1], int(nx))
    ps = np.linspace(p_range[0], p_range[1], int(npts))
    X, P = np.meshgrid(xs, ps, indexing="ij")
    return WignerGrid(xs, ps, reduced_wigner_ecs_at(params, X, P))


def reduced_wigner_marginal(
    params: InterferometerParams,
    angle: float,
    s,
    half_width: float | None = None,
    points: int = 2001,
) -> np.ndarray:
    """Numerical projection of the reduced Wigner function onto a rotated quadrature.

    Integrates ``W`` along lines perpendicular to the direction
    ``(cos angle, sin angle)``; ``s`` are positions along that direction.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if half_width is None:
        half_width = params.alpha + 8.0
    t = np.linspace(-half_width, half_width, points)
    c, sn = math.cos(angle), math.sin(angle)
    S, T = np.meshgrid(s, t, indexing="ij")
    w = reduced_wigner_ecs_at(params, S * c - T * sn, S * sn + T * c)
    return trapezoid(w, t, axis=1)
