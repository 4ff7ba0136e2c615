"""Shared random-instance generators for the test suite.

Every generator takes an explicit ``numpy.random.Generator`` so each
suite freezes its own seeds and stays reproducible in isolation.
"""

import numpy as np

from rdregion import duality, matching, sumrate, waterfill
from rdregion.problems import MultiterminalProblem, RemoteProblem, SumCrit


def random_spd(rng, n, jitter=0.25):
    """Well-conditioned random symmetric positive definite matrix."""
    w = rng.normal(size=(n, n))
    return w @ w.T + n * jitter * np.eye(n)


def random_remote(rng, k_max=3, l_max=4, weighted=False):
    """Random remote problem with dimensions up to ``(k_max, l_max)``."""
    k = int(rng.integers(1, k_max + 1))
    l = int(rng.integers(1, l_max + 1))
    gamma = np.eye(k)
    if weighted and rng.uniform() < 0.5:
        gamma = rng.normal(size=(k, k)) + 2.0 * np.eye(k)
    return RemoteProblem(
        sigma_x=random_spd(rng, k),
        a_mat=rng.normal(size=(l, k)),
        noise_vars=rng.uniform(0.3, 1.5, l),
        gamma=gamma,
    )


def random_mt(rng, l_max=3, weighted=False):
    """Random multiterminal problem with a valid diagonal split."""
    l = int(rng.integers(1, l_max + 1))
    sigma_y = random_spd(rng, l, jitter=0.4)
    low = float(np.linalg.eigvalsh(sigma_y)[0])
    split = rng.uniform(0.15, 0.85, l) * low
    gamma = np.eye(l)
    if weighted and rng.uniform() < 0.5:
        gamma = np.diag(rng.uniform(1.0, 1.5, l))
    return MultiterminalProblem(sigma_y=sigma_y, split_sigma_n=split, gamma=gamma)


def tight_split_pair(rng):
    """Two-source instance with a near-maximal split plus caps inside the
    set where the closed-form sum rate is exact.

    Returns ``(problem, d_vec, (sigma1, sigma2, rho))``. Normalized caps
    ``u_l = d_l / sigma_l^2`` satisfy ``max(u) <= min(1, rho^2 min(u) +
    1 - rho^2)`` by construction, and the split keeps the implied source
    covariance positive definite for every correlation in [0.05, 0.90].
    """
    rho = float(rng.uniform(0.05, 0.90))
    s1, s2 = (float(v) for v in rng.uniform(0.6, 2.0, 2))
    u1 = float(rng.uniform(0.15, 1.0))
    cap = min(1.0, rho * rho * u1 + 1.0 - rho * rho)
    u2 = float(rng.uniform(u1, cap))
    if rng.uniform() < 0.5:
        u1, u2 = u2, u1
    d_vec = np.array([u1 * s1**2, u2 * s2**2])
    off = rho * s1 * s2
    sigma_y = np.array([[s1**2, off], [off, s2**2]])
    split = 0.95 * (1.0 - rho) * np.array([s1**2, s2**2])
    mp = MultiterminalProblem(sigma_y=sigma_y, split_sigma_n=split, gamma=np.eye(2))
    return mp, d_vec, (s1, s2, rho)


def matched_remote(rng, grid_r=6.4, max_tries=200):
    """Remote instance plus a total distortion at 90% of its matching
    threshold, filtered so the upper block of the scan grid is feasible."""
    for _ in range(max_tries):
        p = random_remote(rng, k_max=3, l_max=3)
        d = 0.9 * max(matching.threshold_simplified(p), matching.threshold_noise(p))
        if not np.isfinite(d) or d <= 0.0:
            continue
        probe = waterfill.feasible_at_rates(p, SumCrit(d), np.full(p.l, grid_r))
        if probe.feasible and probe.margin > 1e-6:
            return p, d
    raise RuntimeError("no feasible matched remote instance found")


def split_certified_mt(rng, grid_r=6.4, max_tries=2000):
    """Near-isotropic multiterminal instance with a positive split
    threshold, plus a total distortion at 90% of that threshold."""
    for _ in range(max_tries):
        l = int(rng.integers(2, 4))
        scale = float(rng.uniform(0.8, 1.6))
        w = rng.normal(size=(l, l))
        sigma_y = scale * np.eye(l) + 0.04 * scale * (w + w.T)
        eigs = np.linalg.eigvalsh(sigma_y)
        if eigs[0] <= 0.0:
            continue
        split = float(rng.uniform(0.2, 0.5)) * eigs[0] * rng.uniform(0.95, 1.05, l)
        mp = MultiterminalProblem(sigma_y=sigma_y, split_sigma_n=split, gamma=np.eye(l))
        threshold = sumrate.threshold_split(mp)
        if threshold <= 1e-6:
            continue
        d = 0.9 * threshold
        dual = duality.dual_remote(mp)
        crit = duality.dual_criterion(mp, SumCrit(d))
        probe = waterfill.feasible_at_rates(dual, crit, np.full(l, grid_r))
        if probe.feasible and probe.margin > 1e-6:
            return mp, d
    raise RuntimeError("no positive-split multiterminal instance found")
