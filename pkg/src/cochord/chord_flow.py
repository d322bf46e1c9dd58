"""Leafwise chords of quadratic energy surfaces from the explicit linear flow.

For the ellipsoid E(r) the Hamiltonian H(z) = sum (q_j^2 + p_j^2) / r_j^2 is the
squared gauge, and its flow rotates each (q_j, p_j) plane with angular speed
2 / r_j^2. Chords of R^{n,k} are either full turns in a plane j <= k or
half turns in a plane j > k, which gives the whole action spectrum.
"""
import csv
from dataclasses import dataclass
from math import pi

import numpy as np
from scipy.linalg import expm

from .closed_forms import ellipsoid_capacity
from .errors import DomainError, SchemaError
from .symplectic_core import Chord, DiscretePath, action_samples, apply_J


@dataclass(frozen=True)
class QuadraticSurface:
    """Energy H(z) = 1/2 <S (z - c), z - c> with S symmetric positive definite."""

    S: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        c = np.array(self.center, dtype=float).ravel()
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2 or c.size != S.shape[0]:
            raise SchemaError("S must be a square matrix of even size matching the center")
        if not np.allclose(S, S.T) or np.linalg.eigvalsh(S).min() <= 0:
            raise DomainError("S must be symmetric positive definite")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "center", c)

    @classmethod
    def ellipsoid(cls, radii, center=None):
        """Surface of the ellipsoid E(r), whose energy is its squared gauge."""
        r = np.asarray(radii, dtype=float).ravel()
        if np.any(r <= 0):
            raise DomainError("radii must be positive")
        d = np.concatenate([2 / r ** 2, 2 / r ** 2])
        return cls(np.diag(d), np.zeros(2 * r.size) if center is None else center)

    def energy(self, z):
        y = np.asarray(z, float) - self.center
        return 0.5 * np.einsum("...i,ij,...j->...", y, self.S, y)

    def _plane_rates(self):
        """Per-plane angular speeds if S is diagonal with equal (q_j, p_j) entries."""
        n = self.S.shape[0] // 2
        d = np.diag(self.S)
        if np.allclose(self.S, np.diag(d)) and np.allclose(d[:n], d[n:]):
            return d[:n]
        return None


def flow(surface, z, tau):
    """Hamiltonian flow exp(tau J S)(z - c) + c.

    Parameters
    ----------
    surface : QuadraticSurface
    z : array_like, shape (2n,)
    tau : float or array_like
        Time or array of times.

    Returns
    -------
    ndarray, shape (2n,) or (len(tau), 2n)
    """
    z = np.asarray(z, float)
    y = z - surface.center
    taus = np.atleast_1d(np.asarray(tau, float))
    rates = surface._plane_rates()
    if rates is not None:
        n = rates.size
        ang = taus[:, None] * rates[None, :]
        c, s = np.cos(ang), np.sin(ang)
        q, p = y[:n], y[n:]
        out = np.concatenate([c * q - s * p, s * q + c * p], axis=1)
    else:
        n2 = y.size
        Jm = apply_J(np.eye(n2)).T
        out = np.stack([expm(t * Jm @ surface.S) @ y for t in taus])
    out = out + surface.center
    return out[0] if np.ndim(tau) == 0 else out


@dataclass(frozen=True)
class SpectrumEntry:
    """One action value with every (class, j, m) generating it.

    ``cls`` is ``'V1'`` for full turns in a plane j <= k and ``'V0'`` for half
    turns in a plane j > k; ``j`` is 1-based.
    """

    action: float
    generators: tuple

    @property
    def cls(self):
        return self.generators[0][0]

    @property
    def j(self):
        return self.generators[0][1]

    @property
    def m(self):
        return self.generators[0][2]


def return_spectrum(frame, radii, action_cutoff, rtol=1e-12):
    """All chord actions of E(r) up to ``action_cutoff``, ascending, ties merged.

    Parameters
    ----------
    frame : Frame
    radii : array_like, shape (n,)
    action_cutoff : float
        Positive cutoff, mandatory.

    Returns
    -------
    list of SpectrumEntry
    """
    r = np.asarray(radii, dtype=float).ravel()
    if r.size != frame.n or np.any(r <= 0):
        raise DomainError("need n positive radii")
    if not action_cutoff > 0:
        raise DomainError("action cutoff must be positive")
    raw = []
    for j in range(frame.n):
        cls, unit = ("V1", pi * r[j] ** 2) if j < frame.k else ("V0", 0.5 * pi * r[j] ** 2)
        m = 1
        while m * unit <= action_cutoff * (1 + rtol):
            raw.append((m * unit, (cls, j + 1, m)))
            m += 1
    raw.sort(key=lambda t: (t[0], t[1]))
    out = []
    for a, g in raw:
        if out and abs(a - out[-1].action) <= rtol * max(1.0, a):
            out[-1] = SpectrumEntry(out[-1].action, out[-1].generators + (g,))
        else:
            out.append(SpectrumEntry(a, (g,)))
    return out


def spectrum_initial_condition(frame, radii, generator):
    """Starting point and return time realizing one spectrum generator.

    Parameters
    ----------
    frame : Frame
    radii : array_like
    generator : tuple (cls, j, m)

    Returns
    -------
    z0 : ndarray, shape (2n,)
        Point of R^{n,k} on the ellipsoid boundary.
    T : float
        Return time, equal to the action.
    """
    cls, j, m = generator
    r = np.asarray(radii, float)
    z0 = np.zeros(2 * frame.n)
    z0[j - 1] = r[j - 1]
    T = m * pi * r[j - 1] ** 2 * (1.0 if cls == "V1" else 0.5)
    return z0, T


def write_spectrum_csv(entries, path):
    """Write one row (action, class, j, m) per generator."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["action", "class", "j", "m"])
        for e in entries:
            for cls, j, m in e.generators:
                w.writerow([repr(float(e.action)), cls, j, m])


def ball_chord(frame, a, R=1.0, N=4096):
    """Minimal chord on the ball of radius R centered at (0, .., 0, a), k < n.

    The chord is the shorter arc of the circle |z - c| = R in the (q_n, p_n)
    plane between the two points with p_n = 0, run counterclockwise. It starts
    at q_n = +sqrt(R^2 - a^2) when a <= 0 and at q_n = -sqrt(R^2 - a^2) when a > 0.

    Returns
    -------
    Chord
        Sampled uniformly in angle; ``action`` is the exact segment area.
    """
    if frame.periodic:
        raise DomainError("ball chords need k < n")
    if not R > 0 or not abs(a) < R:
        raise DomainError("need R > 0 and |a| < R")
    n = frame.n
    rr = np.sqrt(R * R - a * a)
    s = 1.0 if a <= 0 else -1.0
    phi0 = np.arctan2(-a, s * rr)
    phi1 = np.arctan2(-a, -s * rr)
    sweep = (phi1 - phi0) % (2 * pi)
    t = np.linspace(0.0, 1.0, N + 1)
    ang = phi0 + t * sweep
    x = np.zeros((N + 1, 2 * n))
    x[:, n - 1] = R * np.cos(ang)
    x[:, 2 * n - 1] = a + R * np.sin(ang)
    x[0, 2 * n - 1] = 0.0
    x[-1, 2 * n - 1] = 0.0
    x[0, n - 1], x[-1, n - 1] = s * rr, -s * rr
    A = 0.5 * R * R * (sweep - np.sin(sweep))
    c = np.zeros(2 * n)
    c[-1] = a
    path = DiscretePath(x, frame)
    chord = Chord(path, float(A), float(A), frame, {})
    res = chord.endpoint_residuals()
    res["on_boundary"] = float(np.max(np.abs(np.linalg.norm(x - c, axis=1) - R)))
    res["sampled_action_gap"] = abs(action_samples(x) - A)
    return Chord(path, float(A), float(A), frame, res)


def capacity_family(frame, radii, e):
    """Capacity of the sublevel {H <= e} of the ellipsoid energy, equal to e C(1)."""
    if not e > 0:
        raise DomainError("energy level must be positive")
    return e * ellipsoid_capacity(frame, radii).value


def neduv_return_time(frame, radii, e):
    """Return time of the minimal chord on {H = e} for the quadratic energy of E(r).

    On the level set <grad H, x> = 2e, so the return time is A / e with A the
    minimal action at level e.
    """
    if not e > 0:
        raise DomainError("energy level must be positive")
    A = capacity_family(frame, radii, e)
    return A / e
