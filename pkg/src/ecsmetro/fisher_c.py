"""Classical Fisher information, Cramer-Rao bounds and maximum likelihood.

The Gaussian envelope of the homodyne outcome density is exactly a Hermite
weight centred on ``(mu_+, mu_-)``, so only the interference factor is sampled
by the quadrature (see :func:`cfi_homodyne`). Photon-counting Fisher
information is a truncated double sum over ``(m, n)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import roots_hermite

from . import measure
from .fisher_q import qfi
from .measure import Scheme
from .specfun import poisson_pmf
from .states import (
    NO_DEPHASING,
    DephasingParams,
    Family,
    InterferometerParams,
    StateFamily,
    UnsupportedFamilyError,
    alpha_from_mean_photons,
    displacement_pair,
    ecs_normalization,
    mean_photons,
)

__all__ = [
    "QuadratureError",
    "FisherReport",
    "MleResult",
    "CampaignSummary",
    "poisson_cutoff",
    "cfi_homodyne",
    "cfi_counting",
    "cfi",
    "crb",
    "sql",
    "precision_sweep",
    "log_likelihood",
    "log_density_moments",
    "mle",
    "mle_campaign",
]

# per-axis Gauss-Hermite node counts for the tensor-product route
NODE_LADDER = (64, 128, 256, 512, 1024, 2048, 4096)
# trapezoid node counts for the rotated one-dimensional route
TRAPEZOID_LADDER = tuple(64 * 2**k for k in range(11))
# half-width of the trapezoid window in units of the unit-halfwidth Gaussian; exp(-42) ~ 6e-19
_TRAPEZOID_HALF_WIDTH = 6.5
# cfi below this fraction of qfi is reported as zero information
ZERO_CFI_RTOL = 1e-12


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to converge."""


@lru_cache(maxsize=None)
def _hermite(n: int):
    t, w = roots_hermite(n)
    return t, w / math.sqrt(math.pi)


def poisson_cutoff(lam: float) -> int:
    """Largest count kept in Poisson sums; neglected mass is below 1e-12."""
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 20.0))


def _fringe_ratio(v: float, cos_t, sin_t):
    # v^2 sin^2 / (1 + v cos), with the removable 0/0 at v == 1 taken care of
    if v == 1.0:
        return 1.0 - cos_t
    return v * v * sin_t * sin_t / (1.0 + v * cos_t)


def _qubit_ratio(v: float, cos_t, sin_t):
    # v^2 sin^2 / (1 - v^2 cos^2), equal to 1 identically when v == 1
    if v == 1.0:
        return np.ones_like(cos_t)
    return v * v * sin_t * sin_t / (1.0 - v * v * cos_t * cos_t)


def _visibilities(family, params, deph):
    v = math.exp(-params.loss_p * params.alpha**2)
    if family.tag is Family.QWP:
        v = math.exp(-params.loss_p * params.alpha**2 - deph.chi)
    return v


def _fisher_density(family, params, deph, theta, dtheta_sq, dtheta_theta):
    """Per-outcome ``(d_phi p)^2 / p`` divided by the Gaussian envelope.

    ``dtheta_sq`` and ``dtheta_theta`` are ``Theta'^2`` and ``Theta' Theta``
    (or their expectations over a direction in which they are polynomial).
    """
    v = _visibilities(family, params, deph)
    if family.tag is Family.ECS:
        c, s = np.cos(theta), np.sin(theta)
        h = _fringe_ratio(v, c, s) * dtheta_sq - v * s * dtheta_theta + (1.0 + v * c) * 0.25 * theta**2
        return 2.0 * ecs_normalization(params.alpha) ** 2 * h
    psi = theta + deph.vartheta
    return _qubit_ratio(v, np.cos(psi), np.sin(psi)) * dtheta_sq + 0.25 * theta**2


def _tensor_estimate(family, params, deph, n: int) -> float:
    t, w = _hermite(n)
    d = displacement_pair(params)
    xm = d.mu_minus + t
    total = 0.0
    # row blocks keep the n x n workspace bounded
    for lo in range(0, n, 256):
        xp = d.mu_plus + t[lo:lo + 256, None]
        theta = 2.0 * xp * d.mu_minus - 2.0 * xm[None, :] * d.mu_plus
        dtheta = -(xp * d.mu_plus + xm[None, :] * d.mu_minus)
        f = _fisher_density(family, params, deph, theta, dtheta**2, dtheta * theta)
        total += float(w[lo:lo + 256] @ f @ w)
    return total


def _rotated_estimate(family, params, deph, n: int) -> float:
    # Rotate (x_+, x_-) to u along (mu_-, -mu_+)/s and r along (mu_+, mu_-)/s,
    # s = sqrt(1 - p) alpha. Then Theta = 2 s u and Theta' = -s r with
    # u ~ N(0, 1/2), r ~ N(s, 1/2) independent; the r integral is done exactly:
    # E[Theta'^2] = s^2 (s^2 + 1/2) and E[Theta' Theta] = -2 s^3 u.
    s = math.sqrt(1.0 - params.loss_p) * params.alpha
    u, h = np.linspace(-_TRAPEZOID_HALF_WIDTH, _TRAPEZOID_HALF_WIDTH, n + 1, retstep=True)
    theta = 2.0 * s * u
    f = _fisher_density(family, params, deph, theta, s * s * (s * s + 0.5), -2.0 * s**3 * u)
    wt = np.exp(-u * u) / math.sqrt(math.pi)
    return float(h * np.sum(wt * f))


def cfi_homodyne(
    family: StateFamily,
    params: InterferometerParams,
    deph: DephasingParams = NO_DEPHASING,
    rtol: float = 1e-8,
    method: str = "rotated",
    nodes: Sequence[int] | None = None,
) -> float:
    """Fisher information of the two-mode homodyne scheme (plus X readout for QWP).

    ``method="rotated"`` (default) turns the outcome plane so that one axis
    carries all of the interference; the other axis is integrated in closed
    form and the remaining one-dimensional integral uses a trapezoid rule,
    which converges exponentially even when the fringe factor has poles close
    to the real axis. ``method="tensor"`` is a plain tensor-product
    Gauss-Hermite rule centred on ``(mu_+, mu_-)``; it is slower and runs out
    of nodes for strongly lossy, high-amplitude fringes, but shares nothing
    with the rotated route beyond the integrand.

    Node counts are doubled until two successive estimates agree to ``rtol``.

    Raises
    ------
    QuadratureError
        If the largest rule is reached without convergence.
    """
    if family.tag is Family.NOON:
        raise UnsupportedFamilyError("no homodyne model for N00N states")
    if method == "rotated":
        estimate, ladder = _rotated_estimate, TRAPEZOID_LADDER
    elif method == "tensor":
        estimate, ladder = _tensor_estimate, NODE_LADDER
    else:
        raise ValueError(f"unknown method {method!r}")
    if nodes is not None:
        ladder = tuple(nodes)
    elif method == "rotated":
        # step must resolve the fringe frequency 2s with margin, else coarse levels alias
        omega = 2.0 * math.sqrt(1.0 - params.loss_p) * params.alpha
        n_min = 2.0 * _TRAPEZOID_HALF_WIDTH * (omega + 14.0) / (2.0 * math.pi)
        ladder = tuple(n for n in ladder if n >= n_min) or ladder[-1:]
    prev = None
    history = []
    for n in ladder:
        val = estimate(family, params, deph, n)
        history.append((n, val))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        prev = val
    raise QuadratureError(
        f"homodyne Fisher information ({method}) did not converge to rtol={rtol}: "
        + ", ".join(f"{n} nodes -> {v!r}" for n, v in history)
        + f" (alpha={params.alpha}, phi={params.phi}, p={params.loss_p})"
    )


def cfi_counting(
    family: StateFamily, params: InterferometerParams, deph: DephasingParams = NO_DEPHASING
) -> float:
    """Fisher information of photon counting on ``a_+`` and ``a_-`` (plus X readout for QWP)."""
    if family.tag is Family.NOON:
        raise UnsupportedFamilyError("no counting model for N00N states")
    lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
    J = poisson_cutoff(lam)
    j = np.arange(J + 1)
    P = poisson_pmf(j, lam)
    m = j[:, None]
    n = j[None, :]
    k = m + n
    weight = P[:, None] * P[None, :] * k**2
    if family.tag is Family.ECS:
        v = math.exp(-params.loss_p * params.alpha**2)
        theta = k * params.phi + m * math.pi
        terms = 2.0 * ecs_normalization(params.alpha) ** 2 * _fringe_ratio(v, np.cos(theta), np.sin(theta))
    else:
        v = math.exp(-params.loss_p * params.alpha**2 - deph.chi)
        psi = k * params.phi - deph.vartheta - m * math.pi
        terms = _qubit_ratio(v, np.cos(psi), np.sin(psi))
    return float(np.sum(weight * terms))


def cfi(scheme, family, params, deph: DephasingParams = NO_DEPHASING) -> float:
    if Scheme(scheme) is Scheme.HOMODYNE:
        return cfi_homodyne(family, params, deph)
    return cfi_counting(family, params, deph)


def crb(info: float, M: int = 1) -> float:
    """``1/sqrt(M info)``; infinite when ``info`` is zero."""
    if info <= 0.0:
        return math.inf
    return 1.0 / math.sqrt(M * info)


def sql(n_bar: float, loss_p: float, M: int = 1) -> float:
    """Standard quantum limit ``[(1 - p) M n]^{-1/2}``."""
    return crb((1.0 - loss_p) * n_bar, M)


@dataclass(frozen=True)
class FisherReport:
    """One point of a precision sweep. ``delta_phi`` is ``inf`` when ``cfi`` is zero."""

    scheme: str
    phi: float
    n_bar: float
    cfi: float
    qfi: float
    delta_phi: float
    delta_phi_min: float
    delta_phi_sql: float
    M: int = 1

    @property
    def ratio_to_sql(self) -> float:
        return self.delta_phi / self.delta_phi_sql

    @property
    def min_ratio_to_sql(self) -> float:
        return self.delta_phi_min / self.delta_phi_sql


def _report(scheme: str, family, params, deph, M) -> FisherReport:
    n_bar = mean_photons(family, params.alpha)
    q = qfi(family, params, deph).value
    if scheme == "quantum":
        c = q
    else:
        c = cfi(scheme, family, params, deph)
    # numerical zeros of the counting information are genuine divergences of delta_phi
    dphi = math.inf if c <= ZERO_CFI_RTOL * q else crb(c, M)
    return FisherReport(
        scheme=scheme,
        phi=params.phi,
        n_bar=n_bar,
        cfi=c,
        qfi=q,
        delta_phi=dphi,
        delta_phi_min=crb(q, M),
        delta_phi_sql=sql(n_bar, params.loss_p, M),
        M=M,
    )


def precision_sweep(
    scheme,
    family: StateFamily,
    sweep_axis: str,
    grid,
    fixed: InterferometerParams,
    M: int = 1,
    deph: DephasingParams = NO_DEPHASING,
    workers: int = 1,
) -> list[FisherReport]:
    """Fisher information and precision along ``phi`` or ``n_bar``.

    ``scheme`` is ``"homodyne"``, ``"counting"`` or ``"quantum"`` (the quantum
    Cramer-Rao bound, reported with ``cfi = qfi``). ``fixed`` supplies the
    parameters not being swept; on the ``n_bar`` axis its ``alpha`` is
    replaced using the family's photon-number relation.
    """
    scheme = scheme if scheme == "quantum" else Scheme(scheme).value
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D sequence")
    diffs = np.diff(grid)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("grid must be strictly monotone")
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    if sweep_axis == "phi":
        points = [fixed.with_phi(float(g)) for g in grid]
    elif sweep_axis == "n_bar":
        points = [
            InterferometerParams(alpha_from_mean_photons(family, float(g)), fixed.phi1, fixed.phi2, fixed.loss_p)
            for g in grid
        ]
    else:
        raise ValueError("sweep_axis must be 'phi' or 'n_bar'")

    def one(pt):
        return _report(scheme, family, pt, deph, int(M))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, points))
    return [one(pt) for pt in points]


# --- log-likelihood moments ------------------------------------------------------


def log_density_moments(
    scheme, family: StateFamily, params: InterferometerParams, deph: DephasingParams = NO_DEPHASING,
    nodes: int = 16384,
) -> tuple[float, float]:
    """Mean and standard deviation of ``ln p(x | phi)`` for one outcome drawn at ``params``.

    The mean is minus the Shannon (differential) entropy of the outcome law.
    Counting laws are summed exactly to the Poisson cutoff; homodyne laws use
    the same rotation as :func:`cfi_homodyne` (the Gaussian direction
    contributes ``-1/2`` to the mean and ``1/2`` to the variance) and a
    trapezoid rule with ``nodes`` intervals in the fringe direction.
    """
    scheme = Scheme(scheme)
    if family.tag is Family.NOON:
        raise UnsupportedFamilyError("no measurement model for N00N states")
    if scheme is Scheme.COUNTING:
        lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
        j = np.arange(poisson_cutoff(lam) + 1)
        m, n = np.meshgrid(j, j, indexing="ij")
        m, n = m.ravel(), n.ravel()
        if family.tag is Family.ECS:
            rec = measure.CountRecord(m, n)
            logp = np.atleast_1d(measure.log_density(scheme, family, rec, params, deph))
        else:
            logp = np.concatenate([
                np.atleast_1d(measure.log_density(scheme, family, measure.CountRecord(m, n, np.full(m.size, x)), params, deph))
                for x in (1, -1)
            ])
        p = np.exp(logp)
        finite = p > 0
        mean = float(np.sum(p[finite] * logp[finite]))
        var = float(np.sum(p[finite] * logp[finite] ** 2)) - mean**2
        return mean, math.sqrt(max(var, 0.0))

    s = math.sqrt(1.0 - params.loss_p) * params.alpha
    u, h = np.linspace(-_TRAPEZOID_HALF_WIDTH, _TRAPEZOID_HALF_WIDTH, nodes + 1, retstep=True)
    gauss = np.exp(-u * u) / math.sqrt(math.pi)
    theta = 2.0 * s * u
    with np.errstate(divide="ignore", invalid="ignore"):
        if family.tag is Family.ECS:
            v = math.exp(-params.loss_p * params.alpha**2)
            fringe = 1.0 + v * np.cos(theta)
            weight = 2.0 * ecs_normalization(params.alpha) ** 2 * fringe * gauss
            f = math.log(2.0 * ecs_normalization(params.alpha) ** 2 / math.pi) + np.log(fringe) - u * u
            branches = [(weight, f)]
        else:
            v = math.exp(-params.loss_p * params.alpha**2 - deph.chi)
            branches = []
            for x in (1.0, -1.0):
                q = 0.5 * (1.0 + x * v * np.cos(theta + deph.vartheta))
                branches.append((q * gauss, np.log(q) - math.log(math.pi) - u * u))
    m1 = m2 = 0.0
    for w, f in branches:
        f = np.where(w > 0, f, 0.0)
        m1 += h * float(np.sum(w * f))
        m2 += h * float(np.sum(w * f * f))
    # independent Gaussian direction r: E[-(r - s)^2] = -1/2, Var = 1/2
    mean = m1 - 0.5
    var = (m2 - m1 * m1) + 0.5
    return mean, math.sqrt(max(var, 0.0))


# --- maximum likelihood ----------------------------------------------------------


def log_likelihood(
    scheme,
    family: StateFamily,
    samples,
    params: InterferometerParams,
    deph: DephasingParams = NO_DEPHASING,
    strict: bool = True,
) -> float:
    """Sum of per-sample log densities of ``samples`` under ``params``.

    With ``strict`` (the default) a per-sample density below 1e-300 raises
    :class:`~ecsmetro.measure.DensityUnderflowError`; otherwise the value is
    returned as computed and may be ``-inf``.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    logp = np.atleast_1d(measure.log_density(scheme, family, samples, params, deph))
    if strict:
        measure._guard(logp)
    return float(np.sum(logp))


@dataclass(frozen=True)
class MleResult:
    phi_hat: float
    log_likelihood: float
    grid_resolution: float
    refined: bool
    multimodal: bool = False
    degenerate: bool = False
    at_boundary: bool = False
    misfit: bool = False
    observed_information: float = math.nan

    @property
    def flagged(self) -> bool:
        return self.multimodal or self.degenerate or self.at_boundary or self.misfit


_INV_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
# scores and curvature at a regular maximum agree to O(M^-1/2); outside this band the fit is degenerate
_INFO_RATIO_BAND = (0.2, 5.0)
# z-score of the maximised log-likelihood below which the fitted law is rejected
_MISFIT_Z = -5.0
_LOCAL_SCAN_CELLS = 3
_LOCAL_SCAN_REFINE = 32


def _golden_max(f, a: float, b: float, tol: float):
    c = b - _INV_GOLD * (b - a)
    d = a + _INV_GOLD * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLD * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _peak_values(vals: np.ndarray) -> np.ndarray:
    left = np.concatenate([[-np.inf], vals[:-1]])
    right = np.concatenate([vals[1:], [-np.inf]])
    mask = (vals >= left) & (vals > right) & np.isfinite(vals)
    return np.sort(vals[mask])[::-1]


def _two_peaks_within(vals: np.ndarray, nats: float = 1.0) -> bool:
    top = _peak_values(vals)
    return bool(top.size >= 2 and top[0] - top[1] < nats)


def mle(
    scheme,
    family: StateFamily,
    samples,
    params: InterferometerParams,
    deph: DephasingParams = NO_DEPHASING,
    search_window: tuple[float, float] = (-math.pi, math.pi),
    coarse_points: int = 256,
    tol: float = 1e-8,
) -> MleResult:
    """Maximum-likelihood estimate of the differential phase.

    ``params`` supplies the amplitude, loss and the (known) mean phase
    ``phi_bar``; its ``phi`` is ignored. The log-likelihood is scanned on
    ``coarse_points`` equally spaced candidates spanning ``search_window``,
    then refined by golden-section search between the neighbours of the best
    candidate until the bracket is narrower than ``tol``.

    The estimate is always returned. It is flagged

    * ``multimodal`` when two local maxima lie within one nat of each other,
      either on the coarse grid or on a finer scan a few cells around the
      estimate;
    * ``degenerate`` when the observed curvature of the log-likelihood and the
      summed squared scores at the estimate disagree by more than a factor 5
      (they coincide asymptotically at a regular maximum, and the scores
      vanish identically where the Fisher information is zero);
    * ``at_boundary`` when the estimate sits on an edge of the window;
    * ``misfit`` when the maximised log-likelihood lies more than five
      standard deviations below its expectation under the fitted phase, which
      is what happens on a secondary mode (for instance when the window
      excludes the true phase).
    """
    lo, hi = map(float, search_window)
    if not hi > lo or hi - lo > 2.0 * math.pi + 1e-12:
        raise ValueError("search window must satisfy 0 < width <= 2 pi")
    if coarse_points < 32:
        raise ValueError("coarse_points must be >= 32")

    def ll(phi):
        return log_likelihood(scheme, family, samples, params.with_phi(phi), deph, strict=False)

    grid = np.linspace(lo, hi, int(coarse_points))
    step = float(grid[1] - grid[0])
    vals = np.array([ll(g) for g in grid])
    if not np.any(np.isfinite(vals)):
        raise measure.DensityUnderflowError("log-likelihood is -inf across the whole window")
    best = int(np.argmax(np.where(np.isfinite(vals), vals, -np.inf)))
    multimodal = _two_peaks_within(vals)

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]
    phi_hat, ll_hat = _golden_max(ll, a, b, tol)
    refined = not vals[best] > ll_hat
    if not refined:
        phi_hat, ll_hat = float(grid[best]), float(vals[best])

    # fine scan for twin maxima closer together than the coarse spacing
    f_lo = max(lo, phi_hat - _LOCAL_SCAN_CELLS * step)
    f_hi = min(hi, phi_hat + _LOCAL_SCAN_CELLS * step)
    fine = np.linspace(f_lo, f_hi, 2 * _LOCAL_SCAN_CELLS * _LOCAL_SCAN_REFINE + 1)
    multimodal = multimodal or _two_peaks_within(np.array([ll(g) for g in fine]))

    at_phi = params.with_phi(phi_hat)
    with np.errstate(all="ignore"):
        try:
            scores = np.atleast_1d(measure.dlog_density(scheme, family, samples, at_phi, deph))
            score_info = float(np.sum(scores**2))
        except measure.DensityUnderflowError:
            score_info = math.nan
    h = 0.1 / math.sqrt(score_info) if score_info > 0 else 1e-4
    h = min(h, 0.25 * step)
    observed = -(ll(phi_hat + h) - 2.0 * ll_hat + ll(phi_hat - h)) / (h * h)
    ratio = score_info / observed if observed > 0 else math.nan
    degenerate = not (_INFO_RATIO_BAND[0] <= ratio <= _INFO_RATIO_BAND[1])

    at_boundary = bool(min(phi_hat - lo, hi - phi_hat) <= max(tol, 1e-6 * step))
    mean, sd = log_density_moments(scheme, family, at_phi, deph)
    M = len(samples)
    misfit = bool(sd > 0 and (ll_hat - M * mean) / (math.sqrt(M) * sd) < _MISFIT_Z)
    return MleResult(
        phi_hat=float(phi_hat),
        log_likelihood=float(ll_hat),
        grid_resolution=step,
        refined=refined,
        multimodal=bool(multimodal),
        degenerate=bool(degenerate),
        at_boundary=at_boundary,
        misfit=misfit,
        observed_information=float(observed),
    )


@dataclass(frozen=True)
class CampaignSummary:
    empirical_std: float
    mean_bias: float
    crb_ratio: float
    cfi: float
    crb: float
    M: int
    trials: int
    flagged: int
    phi_hats: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "empirical_std": self.empirical_std,
            "mean_bias": self.mean_bias,
            "crb_ratio": self.crb_ratio,
            "cfi": self.cfi,
            "crb": self.crb,
            "M": self.M,
            "trials": self.trials,
            "flagged": self.flagged,
        }


def mle_campaign(
    scheme,
    family: StateFamily,
    true_params: InterferometerParams,
    deph: DephasingParams = NO_DEPHASING,
    M: int = 1000,
    trials: int = 500,
    rng_seed: int = 0,
    search_window: tuple[float, float] = (-math.pi, math.pi),
    coarse_points: int = 256,
    workers: int = 1,
) -> CampaignSummary:
    """Repeat sample-then-estimate ``trials`` times and compare the spread with the CRB.

    Trial ``i`` uses the ``i``-th child of ``SeedSequence(rng_seed)``, so the
    summary does not depend on ``workers``.
    """
    if trials < 100:
        raise ValueError("a campaign needs at least 100 trials")
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    children = np.random.SeedSequence(rng_seed).spawn(int(trials))

    def trial(seq):
        rec = measure.sample(scheme, family, true_params, deph, seq, int(M))
        return mle(scheme, family, rec, true_params, deph, search_window, coarse_points)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(trial, children))
    else:
        results = [trial(c) for c in children]
    phi_hats = np.array([r.phi_hat for r in results])
    info = cfi(scheme, family, true_params, deph)
    bound = crb(info, int(M))
    std = float(np.std(phi_hats, ddof=1))
    return CampaignSummary(
        empirical_std=std,
        mean_bias=float(np.mean(phi_hats) - true_params.phi),
        crb_ratio=std / bound,
        cfi=info,
        crb=bound,
        M=int(M),
        trials=int(trials),
        flagged=sum(r.flagged for r in results),
        phi_hats=phi_hats,
    )
