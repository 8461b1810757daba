"""Shared test oracles: dense constraint matrices built from the selection
matrices Phi_m, independently of the package's structured evaluation paths."""

import numpy as np


def phi_matrix(m, M, N):
    """Selection matrix picking user block m out of the stacked vector."""
    Z = np.zeros((N, M * N))
    Z[:, m * N : (m + 1) * N] = np.eye(N)
    return Z


def dense_response_matrix(a, M, N):
    """sum_m Phi_m^H a a^H Phi_m."""
    outer = np.outer(a, np.conj(a))
    F = np.zeros((M * N, M * N), dtype=complex)
    for m in range(M):
        P = phi_matrix(m, M, N)
        F += P.T.conj() @ outer @ P
    return F


def dense_selector_matrix(n, M, N):
    """sum_m Phi_m^H E_n Phi_m with E_n the single-antenna selector."""
    E = np.zeros((N, N))
    E[n, n] = 1.0
    F = np.zeros((M * N, M * N), dtype=complex)
    for m in range(M):
        P = phi_matrix(m, M, N)
        F += P.T.conj() @ E @ P
    return F


def dense_user_matrix(h, m, M, N):
    """Phi_m^H h h^H Phi_m."""
    P = phi_matrix(m, M, N)
    return P.T.conj() @ np.outer(h, np.conj(h)) @ P


def dense_interference_matrix(h, m, M, N):
    """sum_{j != m} Phi_j^H h h^H Phi_j."""
    F = np.zeros((M * N, M * N), dtype=complex)
    for j in range(M):
        if j != m:
            F += dense_user_matrix(h, j, M, N)
    return F


def dense_sinr_matrix(h, gamma, m, M, N):
    """The served-minus-weighted-interference matrix for user m."""
    return dense_user_matrix(h, m, M, N) - gamma * dense_interference_matrix(h, m, M, N)


def quad_form(F, w):
    return float((np.conj(w) @ F @ w).real)


def random_stack(rng, M, N, scale=1.0):
    return scale * (rng.standard_normal(M * N) + 1j * rng.standard_normal(M * N))
