"""Closed-form reference values, written as plain scalar formulas."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class OracleDomainError(ValueError):
    pass


def _check_lambda(lam: float) -> None:
    if not abs(lam) < 1:
        raise OracleDomainError(f"|lambda| must be < 1, got {lam}")


def _check_tau(*taus: float) -> None:
    for t in taus:
        if not 0 <= t <= 1:
            raise OracleDomainError(f"transmittance must lie in [0, 1], got {t}")


def _check_z(z: float) -> None:
    if not 0 <= z <= 1:
        raise OracleDomainError(f"z must lie in [0, 1], got {z}")


# ---------------------------------------------------------------------------
# Gaussian family


def oracle_d124_tmsv(lam: float) -> float:
    _check_lambda(lam)
    return -(lam**2) / (1 - lam**2)


def oracle_d24_no_loss(lam1: float, lam2: float) -> float:
    _check_lambda(lam1)
    _check_lambda(lam2)
    return lam1 * lam2 * (lam1 * lam2 - 1) / ((1 - lam1**2) * (1 - lam2**2))


def oracle_d24_lossy(lam1, lam2, tau_a1=1.0, tau_a2=1.0, tau_b1=1.0, tau_b2=1.0) -> float:
    """Two imperfect TMSV copies with independent pure losses on all four modes."""
    _check_lambda(lam1)
    _check_lambda(lam2)
    _check_tau(tau_a1, tau_a2, tau_b1, tau_b2)
    num = lam1**2 * lam2**2 * (tau_a1 * tau_b2 + tau_a2 * tau_b1) - 2 * lam1 * lam2 * math.sqrt(
        tau_a1 * tau_a2 * tau_b1 * tau_b2
    )
    return num / (2 * (1 - lam1**2) * (1 - lam2**2))


def oracle_d24_bounds(lam1, lam2, tau_a1=1.0, tau_a2=1.0, tau_b1=1.0, tau_b2=1.0) -> tuple[float, float]:
    """(lower, upper) bounds on the lossy two-copy value; needs lam1 * lam2 > 0."""
    if not lam1 * lam2 > 0:
        raise OracleDomainError("bounds require lambda1 and lambda2 of the same, nonzero sign")
    _check_tau(tau_a1, tau_a2, tau_b1, tau_b2)
    base = oracle_d24_no_loss(lam1, lam2)
    upper = (tau_a1 * tau_b2 + tau_a2 * tau_b1) / 2 * base
    lower = math.sqrt(tau_a1 * tau_a2 * tau_b1 * tau_b2) * base
    return lower, upper


def oracle_d24_squeezed_products(r_a1, r_a2, r_b1, r_b2, tau_a1=1.0, tau_a2=1.0, tau_b1=1.0, tau_b2=1.0) -> float:
    """Two copies, each a product of single-mode squeezed states on A and B."""
    _check_tau(tau_a1, tau_a2, tau_b1, tau_b2)
    sh = {k: math.sinh(r) ** 2 for k, r in dict(a1=r_a1, a2=r_a2, b1=r_b1, b2=r_b2).items()}
    return 0.5 * (tau_a1 * tau_b2 * sh["a1"] * sh["b2"] + tau_b1 * tau_a2 * sh["a2"] * sh["b1"])


# ---------------------------------------------------------------------------
# mixed cat family


def cat_normalization(alpha: complex, beta: complex, z: float) -> float:
    """N(alpha, beta, z) = 1 / (2 (1 - (1 - z) exp(-2(|alpha|^2 + |beta|^2))))."""
    _check_z(z)
    return 0.5 / (1 - (1 - z) * math.exp(-2 * (abs(alpha) ** 2 + abs(beta) ** 2)))


def _cat_factor(alpha, beta, z) -> float:
    return 1 + (1 - z) * math.exp(-2 * abs(alpha) ** 2 - 2 * abs(beta) ** 2)


def oracle_d149_cat(alpha: complex, beta: complex, z: float) -> float:
    _check_z(z)
    if z == 1:
        return 0.0
    theta = abs(alpha) ** 2 + abs(beta) ** 2 - 0.5 * math.log(1 - z)
    if theta == 0:
        raise OracleDomainError("cat state with alpha = beta = 0 and z = 0 is ill-defined")
    return -(abs(alpha) ** 2) * abs(beta) ** 4 * (1 / math.tanh(theta)) / math.sinh(theta) ** 2


def oracle_d149_lossy_imperfect(
    alphas: Sequence[complex],
    betas: Sequence[complex],
    zs: Sequence[float],
    tau_a: Sequence[float] = (1.0, 1.0, 1.0),
    tau_b: Sequence[float] = (1.0, 1.0, 1.0),
) -> float:
    """Three distinct lossy mixed-cat copies, summed over cyclic copy assignments."""
    if not (len(alphas) == len(betas) == len(zs) == len(tau_a) == len(tau_b) == 3):
        raise OracleDomainError("need three copies")
    _check_tau(*tau_a, *tau_b)
    for z in zs:
        _check_z(z)
    al, be = [complex(x) for x in alphas], [complex(x) for x in betas]
    nn = [cat_normalization(al[k], be[k], zs[k]) for k in range(3)]
    ff = [_cat_factor(al[k], be[k], zs[k]) for k in range(3)]
    total = 0.0
    for s1, s2, s3 in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        lead = tau_b[s1] * abs(be[s1]) ** 2 * nn[s1] * ff[s1]
        cross = (
            al[s2] * be[s2].conjugate() * al[s3].conjugate() * be[s3]
            + al[s2].conjugate() * be[s2] * al[s3] * be[s3].conjugate()
        )
        bracket = (
            tau_a[s2] * tau_b[s2] * abs(al[s2]) ** 2 * abs(be[s2]) ** 2
            + tau_a[s3] * tau_b[s3] * abs(al[s3]) ** 2 * abs(be[s3]) ** 2
            - 4 * math.sqrt(tau_a[s2] * tau_b[s2] * tau_a[s3] * tau_b[s3])
            * nn[s2] * nn[s3] * ff[s2] * ff[s3] * cross.real
        )
        total += lead * bracket
    return total / 3


def oracle_cat_agarwal_moments(alpha: complex, beta: complex, z: float) -> dict[str, complex]:
    """Moments of the mixed cat entering d'; the same normalization factor sets <a+a>, <b+b> and <a+b>."""
    _check_z(z)
    alpha, beta = complex(alpha), complex(beta)
    k = 2 * cat_normalization(alpha, beta, z) * _cat_factor(alpha, beta, z)
    return {
        "ada": abs(alpha) ** 2 * k,
        "bdb": abs(beta) ** 2 * k,
        "adb": alpha.conjugate() * beta * k,
        "a2bd2": alpha**2 * beta.conjugate() ** 2,
        "ad2b2": alpha.conjugate() ** 2 * beta**2,
        "adabdb": abs(alpha) ** 2 * abs(beta) ** 2,
    }


def oracle_agarwal_cat(alpha: complex, beta: complex, z: float) -> float:
    """d' on the mixed cat from the moment set above."""
    m = oracle_cat_agarwal_moments(alpha, beta, z)
    m1 = m["adabdb"]
    m2 = m1 + m["ada"] + m["bdb"] + 1
    u = 2 * m["adb"].real
    v = 2j * m["adb"].imag
    w = m["ada"] + m["bdb"] + 1
    val = (m1 + m2 + m["ad2b2"] + m["a2bd2"] - u**2) * (m1 + m2 - m["ad2b2"] - m["a2bd2"] + v**2) - w**2
    return float(np.real(val))


# ---------------------------------------------------------------------------
# NOON family


def _noon_check(n: int, alpha: complex, beta: complex) -> None:
    if int(n) != n or n < 1:
        raise OracleDomainError(f"n must be a positive integer, got {n}")
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-9:
        raise OracleDomainError("NOON amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")


def oracle_d1913_noon(n: int, alpha: complex, beta: complex) -> float:
    _noon_check(n, alpha, beta)
    return -2 * abs(alpha) ** 2 * abs(beta) ** 2 * ((n == 1) + 2 * (n == 2))


def oracle_agarwal_noon_lossy(n: int, alpha: complex, beta: complex, tau_a: float = 1.0, tau_b: float = 1.0) -> float:
    _noon_check(n, alpha, beta)
    _check_tau(tau_a, tau_b)
    c = complex(alpha).conjugate() * complex(beta)
    re, im = c.real, c.imag
    one = 16 * re**2 * im**2 * tau_a**2 * tau_b**2 - 4 * (
        abs(alpha) ** 2 * tau_a + abs(beta) ** 2 * tau_b + 1
    ) * tau_a * tau_b * abs(c) ** 2
    two = -16 * re**2 * tau_a**2 * tau_b**2
    return one * (n == 1) + two * (n == 2)


def oracle_agarwal_noon(n: int, alpha: complex, beta: complex) -> float:
    return oracle_agarwal_noon_lossy(n, alpha, beta, 1.0, 1.0)


ORACLES = {
    "oracle_d124_tmsv": oracle_d124_tmsv,
    "oracle_d24_lossy": oracle_d24_lossy,
    "oracle_d24_bounds": oracle_d24_bounds,
    "oracle_d149_cat": oracle_d149_cat,
    "oracle_d149_lossy_imperfect": oracle_d149_lossy_imperfect,
    "oracle_d1913_noon": oracle_d1913_noon,
    "oracle_agarwal_noon": oracle_agarwal_noon,
    "oracle_agarwal_noon_lossy": oracle_agarwal_noon_lossy,
    "oracle_cat_agarwal_moments": oracle_cat_agarwal_moments,
}
