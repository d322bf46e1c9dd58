"""Linear symplectic primitives on R^{2n} with coordinates (q_1..q_n, p_1..p_n).

A frame (n, k) fixes the coisotropic subspace

    R^{n,k} = {(q_1..q_n, p_1..p_k, 0..0)},

its characteristic directions V0 = span(q_{k+1}..q_n), the symplectic part
V1 = span(q_1..q_k, p_1..p_k) and the complement J V0 = span(p_{k+1}..p_n).
All subspaces are coordinate subspaces, so projections are masks.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SchemaError

SUBSPACES = ("Rnk", "V0", "V1", "JV0")
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Frame:
    """Half dimension ``n`` and coisotropic index ``k`` with ``0 <= k <= n``."""

    n: int
    k: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise SchemaError(f"n must be a positive integer, got {self.n!r}")
        if int(self.k) != self.k or not 0 <= self.k <= self.n:
            raise SchemaError(f"k must satisfy 0 <= k <= n, got k={self.k!r}, n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))

    @property
    def dim(self):
        return 2 * self.n

    @property
    def periodic(self):
        """True for k = n, where chords are closed characteristics."""
        return self.k == self.n

    def mask(self, subspace):
        """Boolean coordinate mask of a coordinate subspace.

        Parameters
        ----------
        subspace : {'Rnk', 'V0', 'V1', 'JV0'}

        Returns
        -------
        ndarray of bool, shape (2n,)
        """
        n, k = self.n, self.k
        q = np.zeros(n, bool)
        p = np.zeros(n, bool)
        if subspace == "Rnk":
            q[:] = True
            p[:k] = True
        elif subspace == "V0":
            q[k:] = True
        elif subspace == "V1":
            q[:k] = True
            p[:k] = True
        elif subspace == "JV0":
            p[k:] = True
        else:
            raise SchemaError(f"unknown subspace {subspace!r}; expected one of {SUBSPACES}")
        return np.concatenate([q, p])

    def subspace_dim(self, subspace):
        return int(self.mask(subspace).sum())


def _check_last(v, dim):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] % 2 or (dim is not None and v.shape[-1] != dim):
        raise SchemaError(f"expected vectors of length {dim if dim else 'even'}, got shape {v.shape}")
    return v


def apply_J(v):
    """Standard complex structure J(q, p) = (-p, q) along the last axis.

    Parameters
    ----------
    v : array_like, shape (..., 2n)

    Returns
    -------
    ndarray, shape (..., 2n)
    """
    v = _check_last(v, None)
    n = v.shape[-1] // 2
    return np.concatenate([-v[..., n:], v[..., :n]], axis=-1)


def omega(u, v):
    """Standard symplectic form omega(u, v) = <J u, v>."""
    return np.sum(apply_J(u) * np.asarray(v, float), axis=-1)


def project(frame, subspace, v):
    """Orthogonal projection onto one of the frame's coordinate subspaces.

    Parameters
    ----------
    frame : Frame
    subspace : {'Rnk', 'V0', 'V1', 'JV0'}
    v : array_like, shape (..., 2n)

    Returns
    -------
    ndarray, shape (..., 2n)
    """
    v = _check_last(v, frame.dim)
    return np.where(frame.mask(subspace), v, 0.0)


def leaf_equivalent(frame, x, y, tol=DEFAULT_TOL):
    """Whether ``y`` lies on the leaf ``x + V0`` of R^{n,k}.

    Parameters
    ----------
    frame : Frame
    x, y : array_like, shape (2n,)
        Points of R^{n,k}.
    tol : float
        Relative tolerance, scaled by ``max(1, |x|, |y|)``.

    Returns
    -------
    bool

    Raises
    ------
    DomainError
        If ``x`` or ``y`` is off R^{n,k} beyond tolerance.
    """
    x = _check_last(x, frame.dim)
    y = _check_last(y, frame.dim)
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(y)))
    off = frame.mask("JV0")
    for name, z in (("x", x), ("y", y)):
        if np.linalg.norm(z[off]) > tol * scale:
            raise DomainError(f"{name} is not in R^{{n,k}} within tolerance")
    d = np.where(frame.mask("V0"), 0.0, y - x)
    return bool(np.linalg.norm(d) <= tol * scale)


@dataclass(frozen=True)
class DiscretePath:
    """Samples x_0..x_N of a path on [0, 1] at t_j = j / N.

    The velocity of segment ``j`` is ``N (x_{j+1} - x_j)``.
    """

    samples: np.ndarray
    frame: Frame

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] != self.frame.dim:
            raise SchemaError(f"samples must have shape (N+1, {self.frame.dim}) with N >= 1, got {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def N(self):
        return self.samples.shape[0] - 1

    def velocities(self):
        return self.N * np.diff(self.samples, axis=0)

    def midpoints(self):
        return 0.5 * (self.samples[1:] + self.samples[:-1])

    def trapezoid_mean(self):
        return self.midpoints().mean(axis=0)

    def scaled(self, lam):
        return DiscretePath(lam * self.samples, self.frame)

    def translated(self, b):
        return DiscretePath(self.samples + np.asarray(b, float), self.frame)


def action_samples(x):
    """Action of the polyline through the rows of ``x``.

    Computes 1/2 sum_j <-J (x_{j+1} - x_j), (x_j + x_{j+1}) / 2>, which is
    exact for piecewise linear paths.
    """
    x = _check_last(x, None)
    if x.shape[0] < 2:
        raise SchemaError("a path needs at least two samples")
    dx = np.diff(x, axis=0)
    m = 0.5 * (x[1:] + x[:-1])
    return 0.5 * float(np.sum(-apply_J(dx) * m))


def action(path):
    """Action of a discrete path, see :func:`action_samples`."""
    return action_samples(path.samples)


@dataclass(frozen=True)
class Chord:
    """A leafwise chord sampled as a discrete path.

    ``action`` and ``return_time`` are equal for chords parameterized by the
    squared gauge. ``residuals`` maps names to certificate residuals.
    """

    path: DiscretePath
    action: float
    return_time: float
    frame: Frame
    residuals: dict

    def endpoint_residuals(self):
        """Distance of both endpoints from R^{n,k} and of their offset from V0."""
        x0, x1 = self.path.samples[0], self.path.samples[-1]
        off = self.frame.mask("JV0")
        v0 = self.frame.mask("V0")
        return {
            "endpoint_rnk": float(max(np.linalg.norm(x0[off]), np.linalg.norm(x1[off]))),
            "leaf_offset": float(np.linalg.norm(np.where(v0, 0.0, x1 - x0))),
        }
