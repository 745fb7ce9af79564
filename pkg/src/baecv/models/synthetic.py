"""Small closed-form PtO maps used as estimator and derivative oracles."""

import numpy as np

from ..errors import ArgumentError
from .base import AssembledLinearization, SolveCounters


class AffineMap:
    """G(x) = c + J x; zero curvature."""

    def __init__(self, J, c=None):
        self.J = np.atleast_2d(np.asarray(J, dtype=np.float64))
        self.c = np.zeros(self.J.shape[0]) if c is None else np.asarray(c, float)
        self.counters = SolveCounters()

    @property
    def dim(self):
        return self.J.shape[1]

    @property
    def out_dim(self):
        return self.J.shape[0]

    def evaluate(self, x):
        self.counters.forward += 1
        return self.c + self.J @ np.asarray(x)

    def linearize(self, x0):
        return AssembledLinearization(x0, self.c + self.J @ np.asarray(x0), self.J)


class QuadraticMap:
    """G(x) = c + J x + 1/2 T:(x (x) x) with symmetric slices T[i]."""

    def __init__(self, J, T, c=None):
        self.J = np.atleast_2d(np.asarray(J, dtype=np.float64))
        self.T = np.asarray(T, dtype=np.float64)
        p, d = self.J.shape
        if self.T.shape != (p, d, d):
            raise ArgumentError("T must have shape (p, d, d)")
        if not np.allclose(self.T, np.transpose(self.T, (0, 2, 1))):
            raise ArgumentError("T slices must be symmetric")
        self.c = np.zeros(p) if c is None else np.asarray(c, float)
        self.counters = SolveCounters()

    @property
    def dim(self):
        return self.J.shape[1]

    @property
    def out_dim(self):
        return self.J.shape[0]

    def evaluate(self, x):
        x = np.asarray(x)
        self.counters.forward += 1
        return self.c + self.J @ x + 0.5 * np.einsum("pij,i,j->p", self.T, x, x)

    def linearize(self, x0):
        x0 = np.asarray(x0, dtype=np.float64)
        value = self.c + self.J @ x0 + 0.5 * np.einsum("pij,i,j->p", self.T, x0, x0)
        jac = self.J + np.einsum("pij,j->pi", self.T, x0)
        hess = lambda a, b: np.einsum("pij,i,j->p", self.T, a, b)
        return AssembledLinearization(x0, value, jac, hess_bilinear=hess)
