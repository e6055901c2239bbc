"""Reference computations used by the tests, written independently of the package."""

import math

import numpy as np
from scipy.linalg import expm


def coherent_vector(beta, K):
    """Fock amplitudes of |beta> by the recurrence c_n = c_{n-1} beta / sqrt(n)."""
    c = np.zeros(K, dtype=complex)
    c[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, K):
        c[n] = c[n - 1] * beta / math.sqrt(n)
    return c


def ecs_reduced_rho_plus(alpha, phi1, phi2, K=60):
    """Reduced density matrix of mode a_+ for the lossless ECS after the output beamsplitter.

    Branch k has arm amplitude alpha e^{i phi_k}; the beamsplitter maps the arm-1
    branch to (b1, b1) and the arm-2 branch to (-b2, b2) in (a_+, a_-).
    """
    b1 = alpha * np.exp(1j * phi1) / math.sqrt(2.0)
    b2 = alpha * np.exp(1j * phi2) / math.sqrt(2.0)
    u1, u2 = coherent_vector(b1, K), coherent_vector(-b2, K)
    v1, v2 = coherent_vector(b1, K), coherent_vector(b2, K)
    ov = np.vdot(v2, v1)
    rho = np.outer(u1, u1.conj()) + np.outer(u2, u2.conj()) + ov * np.outer(u1, u2.conj())
    rho += np.conj(ov) * np.outer(u2, u1.conj())
    return rho / np.trace(rho).real


def parity_wigner(rho, x, p, K_big=90):
    """W(x, p) = (1/pi) Tr[D(z)^dag rho D(z) Parity], z = (x + i p)/sqrt(2)."""
    K = rho.shape[0]
    big = np.zeros((K_big, K_big), dtype=complex)
    big[:K, :K] = rho
    a = np.diag(np.sqrt(np.arange(1, K_big)), 1)
    z = (x + 1j * p) / math.sqrt(2.0)
    D = expm(z * a.conj().T - np.conj(z) * a)
    sigma = D.conj().T @ big @ D
    parity = (-1.0) ** np.arange(K_big)
    # only the well-represented low block of the displaced operator is trusted
    n = K_big - 30
    return float((np.diag(sigma)[:n] * parity[:n]).sum().real / math.pi)


def ecs_norm_sq(alpha):
    return 1.0 / (2.0 * (1.0 + math.exp(-alpha * alpha)))


def ecs_counting_pmf_ref(m, n, alpha, phi, p):
    lam = 0.5 * (1.0 - p) * alpha * alpha
    v = math.exp(-p * alpha * alpha)
    pois = math.exp(-2 * lam) * lam ** (m + n) / (math.factorial(m) * math.factorial(n))
    return 2 * ecs_norm_sq(alpha) * (1 + v * math.cos((m + n) * phi + m * math.pi)) * pois


def ecs_counting_cfi_ref(alpha, phi, p, J=None):
    """Sum of (dp/dphi)^2 / p with the derivative taken by hand from the pmf formula."""
    lam = 0.5 * (1.0 - p) * alpha * alpha
    v = math.exp(-p * alpha * alpha)
    J = J or int(lam + 15 * math.sqrt(lam) + 30)
    total = 0.0
    for m in range(J):
        for n in range(J):
            pois = math.exp(-2 * lam) * lam ** (m + n) / (math.factorial(m) * math.factorial(n))
            th = (m + n) * phi + m * math.pi
            pr = 2 * ecs_norm_sq(alpha) * (1 + v * math.cos(th)) * pois
            dp = -2 * ecs_norm_sq(alpha) * v * (m + n) * math.sin(th) * pois
            if pr > 0:
                total += dp * dp / pr
    return total


def ecs_homodyne_pdf_ref(xp, xm, alpha, phi, p, phi_bar=0.0):
    """Joint homodyne density written out from the displacement geometry."""
    s = math.sqrt(1 - p) * alpha
    mp, mm = s * math.sin(phi / 2), s * math.cos(phi / 2)
    v = math.exp(-p * alpha * alpha)
    theta = 2 * xp * mm - 2 * xm * mp
    g = np.exp(-((xp - mp) ** 2) - (xm - mm) ** 2) / math.pi
    return 2 * ecs_norm_sq(alpha) * (1 + v * np.cos(theta)) * g


def ecs_x_plus_marginal_ref(x, alpha, phi):
    """Lossless x_+ marginal of the joint homodyne density, integrated by hand."""
    mp, mm = alpha * math.sin(phi / 2), alpha * math.cos(phi / 2)
    g = np.exp(-((x - mp) ** 2)) / math.sqrt(math.pi)
    return 2 * ecs_norm_sq(alpha) * g * (1 + math.exp(-mp * mp) * np.cos(2 * x * mm - 2 * mp * mm))
