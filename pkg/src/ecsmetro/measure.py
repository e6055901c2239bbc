"""Outcome distributions for the homodyne and photon-counting schemes.

All distribution functions are vectorized over outcome arrays. Derivatives are
taken with respect to the differential phase ``phi`` at fixed mean phase
``phi_bar`` (the local-oscillator settings depend on ``phi_bar`` only).

Homodyne outcomes use the half-width Gaussian ``pi**-0.5 exp(-(x - mu)**2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .specfun import log_poisson_pmf
from .states import (
    NO_DEPHASING,
    DephasingParams,
    Family,
    InterferometerParams,
    StateFamily,
    UnsupportedFamilyError,
    displacement_pair,
    ecs_normalization,
)

__all__ = [
    "Scheme",
    "DensityUnderflowError",
    "HomodyneSample",
    "CountSample",
    "HomodyneRecord",
    "CountRecord",
    "PhaseInterferenceTerm",
    "homodyne_interference",
    "counting_interference",
    "ecs_homodyne_pdf",
    "ecs_homodyne_logpdf",
    "ecs_homodyne_dlogpdf_dphi",
    "ecs_counting_pmf",
    "ecs_counting_logpmf",
    "ecs_counting_dlogpmf_dphi",
    "qwp_homodyne_joint",
    "qwp_homodyne_logjoint",
    "qwp_homodyne_dlogjoint_dphi",
    "qwp_counting_joint",
    "qwp_counting_logjoint",
    "qwp_counting_dlogjoint_dphi",
    "log_density",
    "dlog_density",
    "sample_ecs_homodyne",
    "sample_ecs_counting",
    "sample_qwp",
    "sample",
]

UNDERFLOW = 1e-300
_LOG_UNDERFLOW = math.log(UNDERFLOW)
_LOG_SQRT_PI = 0.5 * math.log(math.pi)


class Scheme(str, enum.Enum):
    HOMODYNE = "homodyne"
    COUNTING = "counting"


class DensityUnderflowError(FloatingPointError):
    """An outcome density fell below 1e-300 where its logarithm is needed."""


@dataclass(frozen=True)
class HomodyneSample:
    x_plus: float
    x_minus: float
    qubit_x: int | None = None


@dataclass(frozen=True)
class CountSample:
    m: int
    n: int
    qubit_x: int | None = None

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("photon counts must be nonnegative")


@dataclass(frozen=True)
class PhaseInterferenceTerm:
    """Argument and visibility of the cosine interference factor."""

    theta: np.ndarray | float
    visibility: float

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")


def _check_qubit(qx, size):
    if qx is None:
        return None
    qx = np.asarray(qx, dtype=np.int8)
    if qx.shape != (size,) or not np.all(np.abs(qx) == 1):
        raise ValueError("qubit outcomes must be +1 or -1, one per sample")
    return qx


@dataclass(frozen=True)
class HomodyneRecord:
    """A batch of homodyne outcomes stored column-wise.

    ``qubit_x`` is present exactly when the record was drawn for a QWP state.
    """

    x_plus: np.ndarray
    x_minus: np.ndarray
    qubit_x: np.ndarray | None = None

    def __post_init__(self):
        xp = np.atleast_1d(np.asarray(self.x_plus, dtype=float))
        xm = np.atleast_1d(np.asarray(self.x_minus, dtype=float))
        if xp.shape != xm.shape or xp.ndim != 1:
            raise ValueError("x_plus and x_minus must be 1-D arrays of equal length")
        object.__setattr__(self, "x_plus", xp)
        object.__setattr__(self, "x_minus", xm)
        object.__setattr__(self, "qubit_x", _check_qubit(self.qubit_x, xp.size))

    def __len__(self) -> int:
        return self.x_plus.size

    def __getitem__(self, i) -> "HomodyneSample | HomodyneRecord":
        if isinstance(i, slice):
            qx = None if self.qubit_x is None else self.qubit_x[i]
            return HomodyneRecord(self.x_plus[i], self.x_minus[i], qx)
        qx = None if self.qubit_x is None else int(self.qubit_x[i])
        return HomodyneSample(float(self.x_plus[i]), float(self.x_minus[i]), qx)

    def __iter__(self) -> Iterator[HomodyneSample]:
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_samples(cls, samples) -> "HomodyneRecord":
        samples = list(samples)
        qx = [s.qubit_x for s in samples]
        has_q = [q is not None for q in qx]
        if any(has_q) and not all(has_q):
            raise ValueError("mixed records with and without qubit outcomes")
        return cls(
            [s.x_plus for s in samples],
            [s.x_minus for s in samples],
            qx if samples and all(has_q) else None,
        )

    @classmethod
    def concat(cls, records) -> "HomodyneRecord":
        records = list(records)
        with_q = {r.qubit_x is not None for r in records}
        if len(with_q) > 1:
            raise ValueError("cannot mix records with and without qubit outcomes")
        qx = np.concatenate([r.qubit_x for r in records]) if with_q == {True} else None
        return cls(
            np.concatenate([r.x_plus for r in records]),
            np.concatenate([r.x_minus for r in records]),
            qx,
        )


@dataclass(frozen=True)
class CountRecord:
    """A batch of photon-count outcomes ``(m, n)`` for modes ``a_+`` and ``a_-``."""

    m: np.ndarray
    n: np.ndarray
    qubit_x: np.ndarray | None = None

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.m, dtype=np.int64))
        n = np.atleast_1d(np.asarray(self.n, dtype=np.int64))
        if m.shape != n.shape or m.ndim != 1:
            raise ValueError("m and n must be 1-D arrays of equal length")
        if np.any(m < 0) or np.any(n < 0):
            raise ValueError("photon counts must be nonnegative")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "qubit_x", _check_qubit(self.qubit_x, m.size))

    def __len__(self) -> int:
        return self.m.size

    def __getitem__(self, i) -> "CountSample | CountRecord":
        if isinstance(i, slice):
            qx = None if self.qubit_x is None else self.qubit_x[i]
            return CountRecord(self.m[i], self.n[i], qx)
        qx = None if self.qubit_x is None else int(self.qubit_x[i])
        return CountSample(int(self.m[i]), int(self.n[i]), qx)

    def __iter__(self) -> Iterator[CountSample]:
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_samples(cls, samples) -> "CountRecord":
        samples = list(samples)
        qx = [s.qubit_x for s in samples]
        has_q = [q is not None for q in qx]
        if any(has_q) and not all(has_q):
            raise ValueError("mixed records with and without qubit outcomes")
        return cls([s.m for s in samples], [s.n for s in samples],
                   qx if samples and all(has_q) else None)

    @classmethod
    def concat(cls, records) -> "CountRecord":
        records = list(records)
        with_q = {r.qubit_x is not None for r in records}
        if len(with_q) > 1:
            raise ValueError("cannot mix records with and without qubit outcomes")
        qx = np.concatenate([r.qubit_x for r in records]) if with_q == {True} else None
        return cls(np.concatenate([r.m for r in records]),
                   np.concatenate([r.n for r in records]), qx)


# --- interference terms ------------------------------------------------------


def _visibility(params: InterferometerParams, deph: DephasingParams | None = None) -> float:
    expo = params.loss_p * params.alpha**2
    if deph is not None:
        expo += deph.chi
    return math.exp(-expo)


def homodyne_interference(x_plus, x_minus, params: InterferometerParams) -> PhaseInterferenceTerm:
    """``Theta = 2 x_+ mu_- - 2 x_- mu_+`` with visibility ``exp(-p alpha^2)``."""
    d = displacement_pair(params)
    theta = 2.0 * np.asarray(x_plus) * d.mu_minus - 2.0 * np.asarray(x_minus) * d.mu_plus
    return PhaseInterferenceTerm(theta, _visibility(params))


def counting_interference(m, n, params: InterferometerParams) -> PhaseInterferenceTerm:
    """``Theta = (m + n) phi + m pi`` with visibility ``exp(-p alpha^2)``."""
    m = np.asarray(m)
    theta = (m + np.asarray(n)) * params.phi + m * math.pi
    return PhaseInterferenceTerm(theta, _visibility(params))


def _fringe_log(v: float, cos_t):
    # log(1 + v cos) with the v == 1 zero handled as -inf instead of a warning
    with np.errstate(divide="ignore"):
        return np.log1p(v * cos_t)


def _guard(logp) -> None:
    if np.any(np.asarray(logp) < _LOG_UNDERFLOW) or np.any(np.isnan(logp)):
        raise DensityUnderflowError("outcome density below 1e-300; log-derivative undefined")


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


# --- ECS --------------------------------------------------------------------


def ecs_homodyne_logpdf(x_plus, x_minus, params: InterferometerParams):
    x_plus = np.asarray(x_plus, dtype=float)
    x_minus = np.asarray(x_minus, dtype=float)
    d = displacement_pair(params)
    theta = 2.0 * x_plus * d.mu_minus - 2.0 * x_minus * d.mu_plus
    v = _visibility(params)
    log2n2 = math.log(2.0 * ecs_normalization(params.alpha) ** 2)
    out = (
        log2n2
        + _fringe_log(v, np.cos(theta))
        - 2.0 * _LOG_SQRT_PI
        - (x_plus - d.mu_plus) ** 2
        - (x_minus - d.mu_minus) ** 2
    )
    return _scalar(out)


def ecs_homodyne_pdf(x_plus, x_minus, params: InterferometerParams):
    """Joint density of the two homodyne outcomes for a (lossy) ECS."""
    return _scalar(np.exp(ecs_homodyne_logpdf(x_plus, x_minus, params)))


def _homodyne_theta_dtheta(x_plus, x_minus, params):
    d = displacement_pair(params)
    theta = 2.0 * x_plus * d.mu_minus - 2.0 * x_minus * d.mu_plus
    # d mu_+/d phi = mu_-/2, d mu_-/d phi = -mu_+/2
    dtheta = -(x_plus * d.mu_plus + x_minus * d.mu_minus)
    return theta, dtheta


def ecs_homodyne_dlogpdf_dphi(x_plus, x_minus, params: InterferometerParams):
    """Analytic ``d/dphi ln p(x_+, x_- | phi)`` at fixed ``phi_bar``."""
    x_plus = np.asarray(x_plus, dtype=float)
    x_minus = np.asarray(x_minus, dtype=float)
    _guard(ecs_homodyne_logpdf(x_plus, x_minus, params))
    theta, dtheta = _homodyne_theta_dtheta(x_plus, x_minus, params)
    v = _visibility(params)
    # the Gaussian envelope contributes exactly Theta/2
    out = -v * np.sin(theta) * dtheta / (1.0 + v * np.cos(theta)) + 0.5 * theta
    return _scalar(out)


def ecs_counting_logpmf(m, n, params: InterferometerParams):
    m = np.asarray(m)
    n = np.asarray(n)
    lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
    v = _visibility(params)
    theta = (m + n) * params.phi + m * math.pi
    log2n2 = math.log(2.0 * ecs_normalization(params.alpha) ** 2)
    out = log2n2 + _fringe_log(v, np.cos(theta)) + log_poisson_pmf(m, lam) + log_poisson_pmf(n, lam)
    return _scalar(out)


def ecs_counting_pmf(m, n, params: InterferometerParams):
    """Probability of ``m`` photons in ``a_+`` and ``n`` in ``a_-`` for a (lossy) ECS."""
    return _scalar(np.exp(ecs_counting_logpmf(m, n, params)))


def ecs_counting_dlogpmf_dphi(m, n, params: InterferometerParams):
    m = np.asarray(m)
    n = np.asarray(n)
    _guard(ecs_counting_logpmf(m, n, params))
    v = _visibility(params)
    k = m + n
    theta = k * params.phi + m * math.pi
    return _scalar(-v * k * np.sin(theta) / (1.0 + v * np.cos(theta)))


# --- QWP --------------------------------------------------------------------


def _qwp_homodyne_parts(x_plus, x_minus, qubit_x, params, deph):
    x_plus = np.asarray(x_plus, dtype=float)
    x_minus = np.asarray(x_minus, dtype=float)
    X = np.asarray(qubit_x)
    if not np.all(np.abs(X) == 1):
        raise ValueError("qubit outcomes must be +1 or -1")
    theta, dtheta = _homodyne_theta_dtheta(x_plus, x_minus, params)
    return x_plus, x_minus, X, theta, dtheta, _visibility(params, deph)


def qwp_homodyne_logjoint(x_plus, x_minus, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    x_plus, x_minus, X, theta, _, v = _qwp_homodyne_parts(x_plus, x_minus, qubit_x, params, deph)
    d = displacement_pair(params)
    psi = theta + deph.vartheta
    out = (
        math.log(0.5)
        + _fringe_log(v, X * np.cos(psi))
        - 2.0 * _LOG_SQRT_PI
        - (x_plus - d.mu_plus) ** 2
        - (x_minus - d.mu_minus) ** 2
    )
    return _scalar(out)


def qwp_homodyne_joint(x_plus, x_minus, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    """Gaussian quadrature density times the qubit X-basis conditional."""
    return _scalar(np.exp(qwp_homodyne_logjoint(x_plus, x_minus, qubit_x, params, deph)))


def qwp_homodyne_dlogjoint_dphi(x_plus, x_minus, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    _guard(qwp_homodyne_logjoint(x_plus, x_minus, qubit_x, params, deph))
    x_plus, x_minus, X, theta, dtheta, v = _qwp_homodyne_parts(x_plus, x_minus, qubit_x, params, deph)
    psi = theta + deph.vartheta
    out = -X * v * np.sin(psi) * dtheta / (1.0 + X * v * np.cos(psi)) + 0.5 * theta
    return _scalar(out)


def _qwp_count_psi(m, n, params, deph):
    return (m + n) * params.phi - deph.vartheta - m * math.pi


def qwp_counting_logjoint(m, n, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    m = np.asarray(m)
    n = np.asarray(n)
    X = np.asarray(qubit_x)
    if not np.all(np.abs(X) == 1):
        raise ValueError("qubit outcomes must be +1 or -1")
    lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
    v = _visibility(params, deph)
    psi = _qwp_count_psi(m, n, params, deph)
    out = math.log(0.5) + _fringe_log(v, X * np.cos(psi)) + log_poisson_pmf(m, lam) + log_poisson_pmf(n, lam)
    return _scalar(out)


def qwp_counting_joint(m, n, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    """Double Poisson photon counts times the qubit X-basis conditional."""
    return _scalar(np.exp(qwp_counting_logjoint(m, n, qubit_x, params, deph)))


def qwp_counting_dlogjoint_dphi(m, n, qubit_x, params, deph: DephasingParams = NO_DEPHASING):
    _guard(qwp_counting_logjoint(m, n, qubit_x, params, deph))
    m = np.asarray(m)
    n = np.asarray(n)
    X = np.asarray(qubit_x)
    v = _visibility(params, deph)
    psi = _qwp_count_psi(m, n, params, deph)
    return _scalar(-X * v * (m + n) * np.sin(psi) / (1.0 + X * v * np.cos(psi)))


# --- dispatch ---------------------------------------------------------------


def _resolve(scheme, family):
    scheme = Scheme(scheme)
    if family.tag is Family.NOON:
        raise UnsupportedFamilyError("no measurement model for N00N states")
    return scheme, family.tag


def log_density(scheme, family: StateFamily, record, params, deph: DephasingParams = NO_DEPHASING):
    """Per-sample log density/mass of a record under ``params``."""
    scheme, tag = _resolve(scheme, family)
    if scheme is Scheme.HOMODYNE:
        if tag is Family.ECS:
            return ecs_homodyne_logpdf(record.x_plus, record.x_minus, params)
        return qwp_homodyne_logjoint(record.x_plus, record.x_minus, _need_qubit(record), params, deph)
    if tag is Family.ECS:
        return ecs_counting_logpmf(record.m, record.n, params)
    return qwp_counting_logjoint(record.m, record.n, _need_qubit(record), params, deph)


def dlog_density(scheme, family: StateFamily, record, params, deph: DephasingParams = NO_DEPHASING):
    """Per-sample score ``d/dphi ln p`` of a record under ``params``."""
    scheme, tag = _resolve(scheme, family)
    if scheme is Scheme.HOMODYNE:
        if tag is Family.ECS:
            return ecs_homodyne_dlogpdf_dphi(record.x_plus, record.x_minus, params)
        return qwp_homodyne_dlogjoint_dphi(record.x_plus, record.x_minus, _need_qubit(record), params, deph)
    if tag is Family.ECS:
        return ecs_counting_dlogpmf_dphi(record.m, record.n, params)
    return qwp_counting_dlogjoint_dphi(record.m, record.n, _need_qubit(record), params, deph)


def _need_qubit(record):
    if record.qubit_x is None:
        raise ValueError("QWP records need qubit outcomes")
    return record.qubit_x


# --- samplers -----------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _check_count(count: int) -> int:
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    return int(count)


def sample_ecs_homodyne(params: InterferometerParams, rng_seed, count: int) -> HomodyneRecord:
    """Draw i.i.d. homodyne outcomes for an ECS by rejection sampling.

    Proposals come from the Gaussian product and are accepted with probability
    ``(1 + v cos Theta) / (1 + v)``. The stream is fully determined by
    ``rng_seed`` (an int, ``SeedSequence`` or ``Generator``).
    """
    count = _check_count(count)
    rng = _rng(rng_seed)
    d = displacement_pair(params)
    v = _visibility(params)
    sd = math.sqrt(0.5)
    xs_p, xs_m = [], []
    need = count
    while need > 0:
        batch = 2 * need + 16
        xp = rng.normal(d.mu_plus, sd, batch)
        xm = rng.normal(d.mu_minus, sd, batch)
        u = rng.random(batch)
        theta = 2.0 * xp * d.mu_minus - 2.0 * xm * d.mu_plus
        keep = u * (1.0 + v) < 1.0 + v * np.cos(theta)
        xs_p.append(xp[keep][:need])
        xs_m.append(xm[keep][:need])
        need -= xs_p[-1].size
    return HomodyneRecord(np.concatenate(xs_p), np.concatenate(xs_m))


def sample_ecs_counting(params: InterferometerParams, rng_seed, count: int) -> CountRecord:
    """Draw i.i.d. photon counts for an ECS; proposals from the double Poisson."""
    count = _check_count(count)
    rng = _rng(rng_seed)
    lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
    v = _visibility(params)
    ms, ns = [], []
    need = count
    while need > 0:
        batch = 2 * need + 16
        m = rng.poisson(lam, batch)
        n = rng.poisson(lam, batch)
        u = rng.random(batch)
        theta = (m + n) * params.phi + m * math.pi
        keep = u * (1.0 + v) < 1.0 + v * np.cos(theta)
        ms.append(m[keep][:need])
        ns.append(n[keep][:need])
        need -= ms[-1].size
    return CountRecord(np.concatenate(ms), np.concatenate(ns))


def sample_qwp(
    scheme, params: InterferometerParams, deph: DephasingParams, rng_seed, count: int
):
    """Two-stage QWP sampling: photonic outcome from its marginal, then the qubit."""
    scheme = Scheme(scheme)
    count = _check_count(count)
    rng = _rng(rng_seed)
    v = _visibility(params, deph)
    if scheme is Scheme.HOMODYNE:
        d = displacement_pair(params)
        xp = rng.normal(d.mu_plus, math.sqrt(0.5), count)
        xm = rng.normal(d.mu_minus, math.sqrt(0.5), count)
        psi = 2.0 * xp * d.mu_minus - 2.0 * xm * d.mu_plus + deph.vartheta
    else:
        lam = 0.5 * (1.0 - params.loss_p) * params.alpha**2
        m = rng.poisson(lam, count)
        n = rng.poisson(lam, count)
        psi = _qwp_count_psi(m, n, params, deph)
    p_plus = 0.5 * (1.0 + v * np.cos(psi))
    qx = np.where(rng.random(count) < p_plus, 1, -1).astype(np.int8)
    if scheme is Scheme.HOMODYNE:
        return HomodyneRecord(xp, xm, qx)
    return CountRecord(m, n, qx)


def sample(scheme, family: StateFamily, params, deph: DephasingParams, rng_seed, count: int):
    """Dispatch to the sampler for ``(scheme, family)``."""
    scheme, tag = _resolve(scheme, family)
    if tag is Family.QWP:
        return sample_qwp(scheme, params, deph, rng_seed, count)
    if scheme is Scheme.HOMODYNE:
        return sample_ecs_homodyne(params, rng_seed, count)
    return sample_ecs_counting(params, rng_seed, count)
