"""Quantum Fisher information with respect to ``J_3 = (n_1 - n_2)/2``.

Closed forms for ECS, QWP and N00N probes (with photon loss, and qubit
dephasing for QWP), plus a numerical oracle that builds the lossy density
matrix in a truncated Fock space and evaluates the eigenbasis sum directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import lambert_w0
from .states import (
    NO_DEPHASING,
    DephasingParams,
    Family,
    InterferometerParams,
    StateFamily,
    TruncationError,
    UnsupportedFamilyError,
    coherent_amplitudes,
    default_cutoff,
    ecs_normalization,
    mean_photons,
)

__all__ = [
    "QfiResult",
    "qfi_ecs_lossless",
    "qfi_qwp_lossless",
    "qfi_noon",
    "qfi_ecs_lossy",
    "qfi_qwp_lossy",
    "qfi",
    "qfi_numeric_oracle",
]

# eigenvalue pairs with lambda_k + lambda_j below this are dropped from the sum
EIGEN_FLOOR = 1e-14


@dataclass(frozen=True)
class QfiResult:
    value: float
    n_bar: float
    family: StateFamily


def _check_nbar(n_bar: float) -> None:
    if not n_bar >= 0.0:
        raise ValueError("n_bar must be >= 0")


def _check_loss(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError("loss probability must lie in [0, 1]")


def qfi_ecs_lossless(n_bar: float) -> float:
    """ECS: ``n^2 + [1 + w(n e^{-n})] n``."""
    _check_nbar(n_bar)
    w = lambert_w0(n_bar * math.exp(-n_bar))
    return n_bar * n_bar + (1.0 + w) * n_bar


def qfi_qwp_lossless(n_bar: float) -> float:
    """QWP: ``n^2 + n``."""
    _check_nbar(n_bar)
    return n_bar * n_bar + n_bar


def qfi_noon(N: int) -> float:
    if N < 1 or int(N) != N:
        raise ValueError("N must be a positive integer")
    return float(N) ** 2


def qfi_ecs_lossy(n_bar: float, p: float) -> float:
    """ECS after per-photon loss ``p``; reduces to :func:`qfi_ecs_lossless` at ``p = 0``."""
    _check_nbar(n_bar)
    _check_loss(p)
    w = lambert_w0(n_bar * math.exp(-n_bar))
    q = 1.0 - p
    return q * q * n_bar * n_bar * math.exp(-2.0 * p * (n_bar + w)) + q * n_bar * (1.0 + q * w)


def qfi_qwp_lossy(n_bar: float, p: float, deph: DephasingParams = NO_DEPHASING) -> float:
    """QWP with loss and qubit dephasing. Independent of ``vartheta``."""
    _check_nbar(n_bar)
    _check_loss(p)
    q = 1.0 - p
    return math.exp(-2.0 * p * n_bar - 2.0 * deph.chi) * q * q * n_bar * n_bar + q * n_bar


def qfi(
    family: StateFamily, params: InterferometerParams, deph: DephasingParams = NO_DEPHASING
) -> QfiResult:
    """Dispatch to the closed form for ``family`` at the configured amplitude and loss."""
    n_bar = mean_photons(family, params.alpha)
    if family.tag is Family.ECS:
        val = qfi_ecs_lossy(n_bar, params.loss_p)
    elif family.tag is Family.QWP:
        val = qfi_qwp_lossy(n_bar, params.loss_p, deph)
    else:
        if params.loss_p != 0.0:
            raise UnsupportedFamilyError("lossy N00N states are not modelled")
        val = qfi_noon(family.noon_N)
    return QfiResult(val, n_bar, family)


# --- numerical oracle ---------------------------------------------------------


def _branches(family: StateFamily, params: InterferometerParams, deph: DephasingParams, K: int):
    """Branch vectors and 2x2 coefficient matrix with rho = V C V^dagger."""
    alpha = params.alpha
    s = math.sqrt(1.0 - params.loss_p) * alpha
    n = np.arange(K)
    vac = (n == 0).astype(complex)
    if family.tag is Family.NOON:
        if params.loss_p != 0.0:
            raise UnsupportedFamilyError("lossy N00N states are not modelled")
        N = family.noon_N
        if N >= K:
            raise TruncationError(f"cutoff {K} cannot hold N = {N}")
        eN = (n == N).astype(complex)
        a = np.kron(eN * np.exp(-1j * params.phi1 * n), vac)
        b = np.kron(vac, eN * np.exp(-1j * params.phi2 * n))
        return np.stack([a, b], axis=1), np.full((2, 2), 0.5, dtype=complex)

    coh = coherent_amplitudes(s, K)
    if 1.0 - np.vdot(coh, coh).real > 1e-9:
        raise TruncationError(f"cutoff {K} too small for amplitude {s:.3g}")
    # U_phi = exp(-i phi_k n_k)
    c1 = coh * np.exp(-1j * params.phi1 * n)
    c2 = coh * np.exp(-1j * params.phi2 * n)
    a = np.kron(c1, vac)
    b = np.kron(vac, c2)
    if family.tag is Family.ECS:
        # loss-mode overlap e^{-p alpha^2} on the cross terms
        v = math.exp(-params.loss_p * alpha * alpha)
        n2 = ecs_normalization(alpha) ** 2
        return np.stack([a, b], axis=1), n2 * np.array([[1.0, v], [v, 1.0]], dtype=complex)
    # QWP: qubit (up, down) tensor photons; orthogonal branches
    dim = K * K
    up = np.concatenate([a, np.zeros(dim, dtype=complex)])
    down = np.concatenate([np.zeros(dim, dtype=complex), b])
    coh_off = math.exp(-params.loss_p * alpha * alpha - deph.chi)
    off = 0.5 * coh_off * complex(math.cos(deph.vartheta), -math.sin(deph.vartheta))
    C = np.array([[0.5, off], [np.conj(off), 0.5]], dtype=complex)
    return np.stack([up, down], axis=1), C


def _j3_diagonal(family: StateFamily, K: int) -> np.ndarray:
    n = np.arange(K, dtype=float)
    j3 = 0.5 * (n[:, None] - n[None, :]).ravel()
    if family.tag is Family.QWP:
        j3 = np.concatenate([j3, j3])
    return j3


def _sld_sum(lam: np.ndarray, J: np.ndarray) -> float:
    total = 0.0
    for k in range(len(lam)):
        for j in range(len(lam)):
            den = lam[k] + lam[j]
            if den > EIGEN_FLOOR:
                total += 2.0 * (lam[k] - lam[j]) ** 2 / den * abs(J[k, j]) ** 2
    return total


def qfi_numeric_oracle(
    family: StateFamily,
    params: InterferometerParams,
    deph: DephasingParams = NO_DEPHASING,
    cutoff: int | None = None,
    method: str = "subspace",
) -> float:
    """Quantum Fisher information from a numerical eigendecomposition.

    The lossy state is assembled in a per-mode Fock basis of size ``cutoff``
    from its two branch vectors (loss modes already traced out). ``J_3`` is
    diagonal in that basis.

    ``method="subspace"`` diagonalizes rho inside the span of its two branches
    and accounts for the null space through ``1 - sum_k |k><k|``; this scales
    to cutoffs of ~60. ``method="dense"`` builds the full density matrix and
    runs ``eigh`` on it, so it is only practical for small cutoffs.
    """
    if cutoff is None:
        cutoff = default_cutoff(params.alpha)
        if family.tag is Family.NOON:
            cutoff = max(cutoff, family.noon_N + 1)
    V, C = _branches(family, params, deph, int(cutoff))
    j3 = _j3_diagonal(family, int(cutoff))

    if method == "dense":
        rho = V @ C @ V.conj().T
        rho /= np.trace(rho).real
        lam, E = np.linalg.eigh(rho)
        lam = np.clip(lam, 0.0, None)
        J = E.conj().T @ (j3[:, None] * E)
        return _sld_sum(lam, J)
    if method != "subspace":
        raise ValueError(f"unknown method {method!r}")

    Q, R = np.linalg.qr(V)
    small = R @ C @ R.conj().T
    lam, U = np.linalg.eigh(0.5 * (small + small.conj().T))
    lam = np.clip(lam, 0.0, None)
    lam /= lam.sum()
    E = Q @ U
    JE = j3[:, None] * E
    J = E.conj().T @ JE
    J2 = np.einsum("ik,ik->k", JE.conj(), JE).real
    total = _sld_sum(lam, J)
    # support-to-null-space terms via completeness
    for k in range(len(lam)):
        outside = J2[k] - float(np.sum(np.abs(J[:, k]) ** 2))
        total += 4.0 * lam[k] * max(outside, 0.0)
    return total
