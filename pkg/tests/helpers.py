"""Shared random-object constructors used across the test modules."""

import numpy as np

from qcollide import PauliWeights


def random_unitary(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    # fix the QR phase ambiguity so draws are deterministic functions of g
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return m / np.trace(m)


def random_weights(rng):
    v = rng.random(3) + 1e-3
    v = v / v.sum()
    return PauliWeights(float(v[0]), float(v[1]), float(1.0 - v[0] - v[1]))
