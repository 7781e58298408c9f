"""Minimum-energy open-loop steering of the linearized model to the origin.

The control ``m(tau) = -B(tau)^T Phi(t0, tau)^T W^{-1} x0`` drives ``x0``
to zero at ``tf``, where ``W`` is the controllability Gramian over
``[t0, tf]``. It is sampled on the Gramian quadrature nodes and
interpolated with a cubic spline for propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import model
from .controllability import GRAMIAN_CUTOFF, GramianResult, gramian
from .errors import ModelError, SingularGramianError
from .model import InertiaTensor, OrbitConfig
from .numerics import (
    DEFAULT_GRAMIAN_NODES,
    DEFAULT_STEPS_PER_ORBIT,
    Trajectory,
    propagate_ltv,
    rk4,
    simpson,
)

# small-state envelope for comparing against the nonlinear kinematics
MAX_Q_NORM = 0.1
MAX_RATE_RATIO = 0.1


def _as_state(x0) -> np.ndarray:
    if isinstance(x0, model.StateVector):
        return x0.as_array()
    x = np.asarray(x0, dtype=float)
    if x.shape != (6,):
        raise ModelError(f"initial state must have 6 entries, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class MinEnergyControl:
    """Sampled minimum-energy control and the Gramian it came from."""

    times: np.ndarray
    samples: np.ndarray  # (nodes, 3), A*m^2
    gramian: GramianResult = field(repr=False)
    costate: np.ndarray  # W^{-1} x0

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.times, self.samples, axis=0))

    def __call__(self, t: float) -> np.ndarray:
        return self._spline(t)

    @property
    def energy(self) -> float:
        """Simpson estimate of ``int |m|^2 dt`` on the control nodes."""
        return float(simpson(np.einsum("ki,ki->k", self.samples, self.samples),
                             self.times[0], self.times[-1]))


def _gramian_inverse(gram: GramianResult) -> np.ndarray:
    lam, vec = np.linalg.eigh(gram.matrix)
    top = lam[-1]
    ratio = lam[0] / top if top > 0.0 else 0.0
    if ratio <= GRAMIAN_CUTOFF:
        raise SingularGramianError(ratio, GRAMIAN_CUTOFF)
    return (vec / lam) @ vec.T


def min_energy_control(j: InertiaTensor, orbit: OrbitConfig, x0, t0: float = 0.0,
                       tf: float | None = None,
                       nodes: int = DEFAULT_GRAMIAN_NODES) -> MinEnergyControl:
    """Minimum-energy control steering ``x0`` at ``t0`` to the origin at ``tf``.

    Raises
    ------
    SingularGramianError
        If ``lambda_min / lambda_max`` of the Gramian is at or below 1e-10.
    """
    x0 = _as_state(x0)
    gram = gramian(j, orbit, t0, tf, nodes)
    costate = _gramian_inverse(gram) @ x0
    # m_k = -(Phi(t0, tau_k) B(tau_k))^T W^{-1} x0
    samples = -np.einsum("kis,i->ks", gram.weighted_inputs, costate)
    return MinEnergyControl(gram.times, samples, gram, costate)


def project_admissible(control: MinEnergyControl, perturbation: np.ndarray) -> np.ndarray:
    """Remove from a sampled perturbation the part that moves the endpoint.

    Returns ``dm - P^T W^{-1} int P dm`` on the control nodes, where
    ``P = Phi(t0, tau) B(tau)``, so the perturbed control still reaches
    the origin under the same quadrature.
    """
    gram = control.gramian
    dm = np.asarray(perturbation, dtype=float)
    drift = simpson(np.einsum("kis,ks->ki", gram.weighted_inputs, dm),
                    gram.times[0], gram.times[-1])
    correction = _gramian_inverse(gram) @ drift
    return dm - np.einsum("kis,i->ks", gram.weighted_inputs, correction)


@dataclass(frozen=True)
class ManeuverResult:
    times: np.ndarray  # (n,)
    states: np.ndarray  # (n, 6)
    controls: np.ndarray  # (n, 3)
    final_norm_ratio: float
    energy: float

    def state(self, k: int) -> model.StateVector:
        return model.StateVector.from_array(self.states[k])


def _path_energy(times: np.ndarray, controls: np.ndarray) -> float:
    power = np.einsum("ki,ki->k", controls, controls)
    if times.size % 2 == 1 and times.size >= 3:
        return float(simpson(power, times[0], times[-1]))
    return float(np.trapezoid(power, times))


def default_steps(orbit: OrbitConfig, t0: float, tf: float,
                  steps_per_orbit: int = DEFAULT_STEPS_PER_ORBIT) -> int:
    return max(1, round(steps_per_orbit * (tf - t0) / orbit.period))


def simulate_maneuver(j: InertiaTensor, orbit: OrbitConfig, x0, t0: float = 0.0,
                      tf: float | None = None, steps: int | None = None, *,
                      nodes: int = DEFAULT_GRAMIAN_NODES,
                      control: Callable[[float], np.ndarray] | None = None,
                      ) -> ManeuverResult:
    """Propagate the linear model under the minimum-energy control.

    ``tf`` defaults to one orbit after ``t0`` and ``steps`` to 10,000 RK4
    steps per orbit. Passing ``control`` overrides the steering law (the
    Gramian is then not computed).
    """
    x0 = _as_state(x0)
    if tf is None:
        tf = t0 + orbit.period
    if steps is None:
        steps = default_steps(orbit, t0, tf)
    if control is None:
        control = min_energy_control(j, orbit, x0, t0, tf, nodes)

    a = model.system_matrix(j, orbit.omega0).a_matrix
    traj = propagate_ltv(a, lambda t: model.input_matrix(j, orbit, t), control,
                         x0, t0, tf, steps)
    controls = np.array([np.asarray(control(t), dtype=float) for t in traj.times])
    n0 = float(np.linalg.norm(x0))
    ratio = float(np.linalg.norm(traj.states[-1])) / n0 if n0 > 0.0 else 0.0
    return ManeuverResult(traj.times, traj.states, controls, ratio,
                          _path_energy(traj.times, controls))


def nonlinear_attitude(result: ManeuverResult) -> Trajectory:
    """Propagate the reduced nonlinear kinematics along the recorded rates."""
    rates = CubicSpline(result.times, result.states[:, 3:], axis=0)

    def rhs(t, q):
        return 0.5 * model.kinematics_matrix(q) @ rates(t)

    return rk4(rhs, result.states[0, :3], result.times[0], result.times[-1],
               result.times.size - 1)


def nonlinear_consistency(j: InertiaTensor, orbit: OrbitConfig,
                          result: ManeuverResult) -> float:
    """Largest gap between linear and nonlinear-kinematics attitude histories.

    Only meaningful for small motions; states outside ``|q| <= 0.1`` and
    ``|omega| / omega0 <= 0.1`` are rejected.
    """
    q_norm = float(np.linalg.norm(result.states[:, :3], axis=1).max())
    w_ratio = float(np.linalg.norm(result.states[:, 3:], axis=1).max()) / orbit.omega0
    if q_norm > MAX_Q_NORM or w_ratio > MAX_RATE_RATIO:
        raise ModelError(
            f"trajectory leaves the small-motion envelope: max|q|={q_norm:.3g} "
            f"(limit {MAX_Q_NORM}), max|omega|/omega0={w_ratio:.3g} "
            f"(limit {MAX_RATE_RATIO})"
        )
    nl = nonlinear_attitude(result)
    gap = np.linalg.norm(nl.states - result.states[:, :3], axis=1)
    return float(gap.max())
