"""Synthetic benchmark families: discretized Gaussians, uniform random, logit-normal.

Random generators use numpy's PCG64 with ``SeedSequence.spawn`` so that
each component (measures, cost) has its own independent sub-stream.
"""

from __future__ import annotations

import numpy as np
from scipy.special import softmax

from .costs import grid_cost, random_uniform_cost
from .errors import InputError
from .measures import make_measure


def _sub_seeds(seed, count):
    return np.random.SeedSequence(seed).spawn(count)


def gaussian_pair(k=100, m1=20.0, s1=5.0, m2=50.0, s2=20.0, p=2.0):
    """N(m1, s1) vs N(m2, s2) densities on the grid 0..k-1, cost |i-j|**p."""
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if not (s1 > 0 and s2 > 0):
        raise InputError("standard deviations must be > 0")
    x = np.arange(k, dtype=float)
    # unnormalized densities; the constant cancels in the renormalization
    mu = np.exp(-0.5 * ((x - m1) / s1) ** 2)
    nu = np.exp(-0.5 * ((x - m2) / s2) ** 2)
    return make_measure(mu), make_measure(nu), grid_cost(k, k, p)


def uniform_pair(k=200, scale=1.0, seed=0):
    """Normalized Uniform[0,1) measures with a Uniform[0, scale] cost matrix."""
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    measure_seed, cost_seed = _sub_seeds(seed, 2)
    rng = np.random.Generator(np.random.PCG64(measure_seed))
    mu = rng.uniform(size=k)
    nu = rng.uniform(size=k)
    M = random_uniform_cost(k, k, scale, cost_seed)
    return make_measure(mu), make_measure(nu), M


def logit_normal_pair(k=100, sigma=1.0, seed=0, p=2.0):
    """softmax of N(0, sigma^2 I) draws for each side; grid cost |i-j|**p."""
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if not sigma > 0:
        raise InputError(f"sigma must be > 0, got {sigma}")
    a, b = _sub_seeds(seed, 2)
    za = np.random.Generator(np.random.PCG64(a)).normal(0.0, sigma, size=k)
    zb = np.random.Generator(np.random.PCG64(b)).normal(0.0, sigma, size=k)
    return make_measure(softmax(za)), make_measure(softmax(zb)), grid_cost(k, k, p)


GENERATORS = {
    "gaussian": gaussian_pair,
    "uniform": uniform_pair,
    "logitnormal": logit_normal_pair,
}


def make_dataset(name: str, **params):
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise InputError(f"unknown dataset {name!r}; choose from {sorted(GENERATORS)}") from None
    return gen(**params)
