"""Scalar complex-valued normal distribution N_C(mean, variance, relation).

A complex normal ``z = x + iy`` is fully described by its mean, its
variance ``E|z - mu|^2`` and its relation ``E(z - mu)^2``.  Equivalently
``(x, y)`` is bivariate real Gaussian with covariance

    [[(var + Re c) / 2, Im c / 2],
     [Im c / 2,         (var - Re c) / 2]]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SingularCovarianceError

# (var^2 - |c|^2) <= SINGULAR_RTOL * var^2 is treated as rank deficient
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class ComplexNormal:
    """Complex normal distribution with improper (noncircular) support.

    Parameters
    ----------
    mean : complex
        Location of the distribution.
    variance : float
        ``E|z - mean|^2``, strictly positive.
    relation : complex
        ``E(z - mean)^2``; must satisfy ``|relation| <= variance``.
    """

    mean: complex = 0j
    variance: float = 1.0
    relation: complex = 0j

    def __post_init__(self):
        if not np.isfinite(self.variance) or self.variance <= 0:
            raise InvalidParameterError(f"variance must be positive, got {self.variance}")
        if abs(self.relation) > self.variance * (1 + 1e-12):
            raise InvalidParameterError(
                f"|relation| = {abs(self.relation)} exceeds variance = {self.variance}"
            )

    @property
    def determinant(self) -> float:
        """Determinant of the augmented covariance [[var, c], [c*, var]]."""
        return self.variance**2 - abs(self.relation) ** 2

    @property
    def is_singular(self) -> bool:
        return self.determinant <= SINGULAR_RTOL * self.variance**2

    def real_covariance(self) -> np.ndarray:
        """Covariance of ``(Re z, Im z)``."""
        c = complex(self.relation)
        return 0.5 * np.array(
            [[self.variance + c.real, c.imag], [c.imag, self.variance - c.real]]
        )

    def logpdf(self, z):
        """Log density evaluated elementwise at ``z``."""
        if self.is_singular:
            raise SingularCovarianceError("singular complex-normal")
        return _logpdf(np.asarray(z) - self.mean, self.variance, self.relation)

    def pdf(self, z):
        return np.exp(self.logpdf(z))

    def sample(self, rng=None, size=None):
        """Draw from the distribution, consuming two standard normals per draw."""
        rng = np.random.default_rng(rng)
        shape = () if size is None else np.atleast_1d(size).tolist()
        u = rng.standard_normal((*shape, 2))
        out = self.mean + transform_normals(u, self.variance, self.relation)
        return complex(out) if size is None else out


def _logpdf(d, variance, relation):
    det = variance**2 - abs(relation) ** 2
    quad = (variance * (d.real**2 + d.imag**2) - np.real(np.conj(relation) * d * d)) / det
    return -np.log(np.pi) - 0.5 * np.log(det) - quad


def cholesky_factor(variance: float, relation: complex) -> np.ndarray:
    """Lower-triangular square root of the equivalent real 2x2 covariance.

    Tolerates the rank-1 boundary ``|relation| == variance``.
    """
    relation = complex(relation)
    vx = 0.5 * (variance + relation.real)
    vy = 0.5 * (variance - relation.real)
    cxy = 0.5 * relation.imag
    if vx <= 0:
        return np.array([[0.0, 0.0], [0.0, np.sqrt(max(vy, 0.0))]])
    lx = np.sqrt(vx)
    off = cxy / lx
    return np.array([[lx, 0.0], [off, np.sqrt(max(vy - off * off, 0.0))]])


def transform_normals(u: np.ndarray, variance: float, relation: complex) -> np.ndarray:
    """Map standard normal pairs ``u[..., :2]`` to zero-mean complex normals."""
    L = cholesky_factor(variance, relation)
    x = L[0, 0] * u[..., 0]
    y = L[1, 0] * u[..., 0] + L[1, 1] * u[..., 1]
    return x + 1j * y


def density(dist: ComplexNormal, z):
    """Probability density of ``dist`` at ``z``."""
    return dist.pdf(z)


def sample(dist: ComplexNormal, rng=None, size=None):
    """Draw samples from ``dist``; reproducible for a fixed seed."""
    return dist.sample(rng, size)
