"""Numerical kernels: matrix exponential, SVD rank, RK4, finite differences
and composite Simpson quadrature.

All routines are pure functions of their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import NumericalError

DEFAULT_RANK_TOL = 1e-8
DEFAULT_STEPS_PER_ORBIT = 10_000
DEFAULT_GRAMIAN_NODES = 4001

# Degree-13 diagonal Pade coefficients and the norm bound below which the
# approximant is accurate to double precision (Higham 2005; scaling choice
# from Al-Mohy and Higham 2009).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152
# leading coefficient of the [13/13] truncation error, and unit roundoff
_C27 = math.factorial(13) ** 2 / (math.factorial(26) * math.factorial(27))
_UNIT_ROUNDOFF = 2.0**-53


def _norm1(a: np.ndarray) -> float:
    return float(np.abs(a).sum(axis=0).max())


def _squarings(a: np.ndarray, dts: np.ndarray) -> np.ndarray:
    """Number of squarings for ``exp(a * dt)`` at each step in ``dts``.

    Uses ``||a^k||^(1/k)`` instead of ``||a||``, which matters for operators
    with a large nilpotent-like part, plus a correction that guards against
    overscaled non-normal cases.
    """
    n1 = _norm1(a)
    if n1 == 0.0:
        return np.zeros(dts.shape, dtype=int)
    u = a / n1  # unit 1-norm keeps the powers below in range
    u2 = u @ u
    u4 = u2 @ u2
    u6 = u4 @ u2
    u8 = u4 @ u4
    u10 = u8 @ u2
    d6, d8, d10 = (_norm1(p) ** (1 / k) for p, k in ((u6, 6), (u8, 8), (u10, 10)))
    eta = n1 * min(max(d6, d8), max(d8, d10))
    mag = np.abs(dts)
    with np.errstate(divide="ignore"):
        s = np.ceil(np.log2(mag * eta / _THETA13))
    s = np.where(np.isfinite(s) & (s > 0), s, 0.0)

    n27 = _norm1(np.linalg.matrix_power(np.abs(u), 27))
    x = mag * n1 / np.exp2(s)
    with np.errstate(divide="ignore", over="ignore"):
        ell = np.ceil(np.log2(_C27 * x**26 * n27 / _UNIT_ROUNDOFF) / 26.0)
    ell = np.where(np.isfinite(ell) & (ell > 0), ell, 0.0)
    return (s + ell).astype(int)


def _pade13(a: np.ndarray) -> np.ndarray:
    b = _PADE13
    ident = np.broadcast_to(np.eye(a.shape[-1]), a.shape)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return np.linalg.solve(v - u, v + u)


def expm(a, dt=1.0) -> np.ndarray:
    """Matrix exponential ``exp(a * dt)`` by scaling and squaring.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Square matrix.
    dt : float or array_like of shape (k,)
        Time step. A 1-D array of steps returns a stack of exponentials of
        shape (k, n, n), each computed with its own scaling.

    Raises
    ------
    NumericalError
        If ``a * dt`` has non-finite entries or is too large to exponentiate.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    dts = np.asarray(dt, dtype=float)
    scaled = a * dts[..., None, None]
    if not np.all(np.isfinite(scaled)):
        raise NumericalError("expm received non-finite entries")

    s = _squarings(a, dts)
    if np.any(s > 1000):
        raise NumericalError("expm argument norm too large")

    r = _pade13(scaled / np.exp2(s)[..., None, None])
    if r.ndim == 2:
        for _ in range(int(s)):
            r = r @ r
    else:
        for step in range(int(s.max(initial=0))):
            sel = s > step
            r[sel] = r[sel] @ r[sel]
    if not np.all(np.isfinite(r)):
        raise NumericalError("expm overflowed")
    return r


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: tuple[float, ...]
    tolerance_used: float

    @property
    def ratio(self) -> float:
        """Smallest over largest singular value (0 for a zero matrix)."""
        sv = self.singular_values
        if not sv or sv[0] == 0.0:
            return 0.0
        return sv[-1] / sv[0]


def svd_rank(m, rel_tol: float = DEFAULT_RANK_TOL) -> RankResult:
    """Numerical rank: singular values above ``rel_tol * sigma_1``.

    A zero matrix is thresholded against an absolute 1e-300 instead.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NumericalError("svd_rank received non-finite entries")
    sv = np.linalg.svd(m, compute_uv=False) if m.size else np.zeros(0)
    top = float(sv[0]) if sv.size else 0.0
    tol = rel_tol * top if top > 0.0 else 1e-300
    return RankResult(
        rank=int(np.count_nonzero(sv > tol)),
        singular_values=tuple(float(v) for v in sv),
        tolerance_used=tol,
    )


class Trajectory(NamedTuple):
    times: np.ndarray  # (steps + 1,)
    states: np.ndarray  # (steps + 1, n)


def rk4(rhs: Callable[[float, np.ndarray], np.ndarray], x0, t0: float, tf: float,
        steps: int) -> Trajectory:
    """Classical fixed-step Runge-Kutta on ``x' = rhs(t, x)``."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not tf > t0:
        raise ValueError(f"need tf > t0, got t0={t0}, tf={tf}")
    h = (tf - t0) / steps
    x = np.array(x0, dtype=float)
    times = t0 + h * np.arange(steps + 1)
    times[-1] = tf
    out = np.empty((steps + 1, x.size))
    out[0] = x
    for k in range(steps):
        t = times[k]
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"state became non-finite at t={times[k + 1]}")
        out[k + 1] = x
    return Trajectory(times, out)


def propagate_ltv(a, input_fn, control_fn, x0, t0: float, tf: float,
                  steps: int) -> Trajectory:
    """Integrate ``x' = a x + input_fn(t) @ control_fn(t)`` with RK4.

    ``x0`` may be a :class:`~magctrb.model.StateVector` or any array-like.
    Returns ``steps + 1`` samples including both endpoints.
    """
    a = np.asarray(a, dtype=float)
    if hasattr(x0, "as_array"):
        x0 = x0.as_array()

    def rhs(t, x):
        return a @ x + input_fn(t) @ control_fn(t)

    return rk4(rhs, x0, t0, tf, steps)


def finite_diff(f: Callable[[float], np.ndarray], t: float, h: float,
                order: int = 1) -> np.ndarray:
    """Fourth-order central difference of ``f`` at ``t`` (order 1 or 2)."""
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    fm2, fm1 = np.asarray(f(t - 2 * h)), np.asarray(f(t - h))
    fp1, fp2 = np.asarray(f(t + h)), np.asarray(f(t + 2 * h))
    if order == 1:
        return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    if order == 2:
        f0 = np.asarray(f(t))
        return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
    raise ValueError(f"order must be 1 or 2, got {order}")


def default_fd_step(omega0: float) -> float:
    """Step with ``omega0 * h = 1e-3`` rad for trigonometric time signals."""
    return 1e-3 / omega0


def simpson_weights(t0: float, tf: float, nodes: int) -> np.ndarray:
    """Composite Simpson weights on ``nodes`` equispaced points (odd, >= 3)."""
    if nodes < 3 or nodes % 2 == 0:
        raise ValueError(f"Simpson needs an odd node count >= 3, got {nodes}")
    h = (tf - t0) / (nodes - 1)
    w = np.ones(nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def simpson(samples: np.ndarray, t0: float, tf: float) -> np.ndarray:
    """Integrate stacked samples (first axis = node) with Simpson's rule."""
    samples = np.asarray(samples, dtype=float)
    w = simpson_weights(t0, tf, samples.shape[0])
    return np.tensordot(w, samples, axes=1)


def gramian_quadrature(integrand: Callable[[float], np.ndarray], t0: float,
                       tf: float, nodes: int = DEFAULT_GRAMIAN_NODES) -> np.ndarray:
    """Simpson integral of a symmetric-matrix-valued integrand, symmetrized."""
    ts = np.linspace(t0, tf, nodes)
    simpson_weights(t0, tf, nodes)  # validates nodes before sampling
    w = simpson(np.array([integrand(t) for t in ts]), t0, tf)
    return 0.5 * (w + w.T)


def symmetric_eigs(w: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, descending."""
    return np.linalg.eigvalsh(0.5 * (w + w.T))[::-1]


def eig_ratio(eigs) -> float:
    """lambda_min / lambda_max of descending eigenvalues (0 if lambda_max <= 0)."""
    eigs = np.asarray(eigs)
    if eigs[0] <= 0.0:
        return 0.0
    return float(eigs[-1] / eigs[0])


__all__ = [
    "DEFAULT_GRAMIAN_NODES", "DEFAULT_RANK_TOL", "DEFAULT_STEPS_PER_ORBIT",
    "RankResult", "Trajectory", "default_fd_step", "eig_ratio", "expm",
    "finite_diff", "gramian_quadrature", "propagate_ltv", "rk4", "simpson",
    "simpson_weights", "svd_rank", "symmetric_eigs",
]
