"""Independent reference computations shared by the unit and acceptance tests."""

import numpy as np
from scipy import integrate


def gamma_quadrature(wm, sigma, sigma_gp, width=12.0):
    """Adaptive cubature of exp(-|w - wm|^2 / (2 g^2)) against N(0, sigma^-2 I)."""
    wm = np.atleast_1d(np.asarray(wm, dtype=float))
    d = wm.size
    s = 1.0 / sigma

    def integrand(w):
        # w has shape (npoints, d)
        dens = np.exp(-np.sum(w * w, axis=-1) / (2 * s * s)) / (2 * np.pi * s * s) ** (d / 2)
        return np.exp(-np.sum((w - wm) ** 2, axis=-1) / (2 * sigma_gp**2)) * dens

    res = integrate.cubature(integrand, np.full(d, -width * s), np.full(d, width * s),
                             atol=1e-11, rtol=1e-10)
    return float(res.estimate)


def lstsq_ridge(Z, t, lam):
    """min ||t - Z b||^2 + lam ||b||^2 via least squares on the augmented system."""
    M = Z.shape[1]
    A = np.vstack((Z, np.sqrt(lam) * np.eye(M)))
    rhs = np.concatenate((t, np.zeros(M)))
    return np.linalg.lstsq(A, rhs, rcond=None)[0]


def lstsq_ridge_with_bias(Z, y, lam):
    """Ridge with an unpenalised intercept, same augmented-system trick."""
    n, M = Z.shape
    A = np.vstack((np.column_stack((Z, np.ones(n))),
                   np.column_stack((np.sqrt(lam) * np.eye(M), np.zeros(M)))))
    rhs = np.concatenate((y, np.zeros(M)))
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return sol[:M], sol[M]
