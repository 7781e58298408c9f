"""Linearized nadir-pointing attitude model with magnetic-coil actuation.

State ordering is ``x = [q1, q2, q3, w1, w2, w3]``: the vector part of the
body-to-LVLH quaternion followed by the body rate relative to LVLH. The
scalar quaternion part is never stored; it is rebuilt as sqrt(1 - |q|^2).

Everything here is in SI units. The dipole strength ``mu_f`` is in Wb*m so
``mu_f / a**3`` is a field magnitude in tesla.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError

MU_EARTH = 3.986004418e14  # m^3/s^2
DIPOLE_STRENGTH = 7.9e15  # Wb*m

# tolerance on |q|^2 > 1 before the reduced kinematics refuses a state
_NORM_SLACK = 1e-12


def _finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ModelError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class InertiaTensor:
    """Principal moments of inertia (kg*m^2) of a diagonal inertia matrix."""

    j11: float
    j22: float
    j33: float

    def __post_init__(self):
        _finite("inertia", self.j11, self.j22, self.j33)
        if min(self.j11, self.j22, self.j33) <= 0.0:
            raise ModelError(
                f"inertia entries must be positive, got "
                f"({self.j11}, {self.j22}, {self.j33})"
            )

    @classmethod
    def of(cls, values) -> "InertiaTensor":
        j11, j22, j33 = (float(v) for v in values)
        return cls(j11, j22, j33)

    def as_array(self) -> np.ndarray:
        return np.array([self.j11, self.j22, self.j33])

    @property
    def scale(self) -> float:
        return max(self.j11, self.j22, self.j33)


@dataclass(frozen=True)
class OrbitConfig:
    """Circular-orbit and dipole-field parameters.

    ``omega0`` is the orbit (LVLH) rate in rad/s, ``a`` the semi-major axis
    in m, ``i_m`` the inclination to the magnetic equator in rad and
    ``mu_f`` the dipole strength in Wb*m. Time ``t = 0`` is the ascending
    node crossing of the magnetic equator.
    """

    omega0: float
    a: float
    i_m: float
    mu_f: float = DIPOLE_STRENGTH

    def __post_init__(self):
        _finite("orbit parameter", self.omega0, self.a, self.i_m, self.mu_f)
        if self.omega0 <= 0.0:
            raise ModelError(f"omega0 must be positive, got {self.omega0}")
        if self.a <= 0.0:
            raise ModelError(f"semi-major axis must be positive, got {self.a}")
        if self.mu_f < 0.0:
            raise ModelError(f"dipole strength must be non-negative, got {self.mu_f}")
        if not 0.0 <= self.i_m <= math.pi:
            raise ModelError(f"i_m must lie in [0, pi], got {self.i_m}")

    @classmethod
    def circular(cls, a: float, i_m: float, mu_f: float = DIPOLE_STRENGTH,
                 omega0: float | None = None) -> "OrbitConfig":
        """Build a config, deriving ``omega0 = sqrt(mu_earth / a^3)`` if omitted."""
        if omega0 is None:
            if not a > 0.0:
                raise ModelError(f"semi-major axis must be positive, got {a}")
            omega0 = math.sqrt(MU_EARTH / a**3)
        return cls(omega0=omega0, a=a, i_m=i_m, mu_f=mu_f)

    @property
    def field_scale(self) -> float:
        """Dipole field magnitude mu_f / a^3, in tesla."""
        return self.mu_f / self.a**3

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega0

    @property
    def t_c(self) -> float:
        """The time with omega0 * t = pi/2 used by the determinant argument."""
        return 0.5 * math.pi / self.omega0


@dataclass(frozen=True)
class GravityGradientCoefficients:
    f41: float
    f46: float
    f64: float
    f52: float
    f63: float


@dataclass(frozen=True)
class SystemMatrices:
    a_matrix: np.ndarray
    lambda1: np.ndarray
    sigma1: np.ndarray


@dataclass(frozen=True)
class FieldSample:
    b1: float
    b2: float
    b3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3])


@dataclass(frozen=True)
class InfluenceMatrices:
    """B2(t) and its first two time derivatives (3x3, zero diagonal)."""

    b2_matrix: np.ndarray
    b2_dot: np.ndarray
    b2_ddot: np.ndarray


@dataclass(frozen=True)
class StateVector:
    q1: float
    q2: float
    q3: float
    w1: float
    w2: float
    w3: float

    @classmethod
    def from_array(cls, x) -> "StateVector":
        x = np.asarray(x, dtype=float)
        if x.shape != (6,):
            raise ModelError(f"state must have 6 entries, got shape {x.shape}")
        return cls(*(float(v) for v in x))

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3, self.w1, self.w2, self.w3])

    @property
    def q(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3])

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3])


def gravity_coefficients(j: InertiaTensor, omega0: float) -> GravityGradientCoefficients:
    """Gravity-gradient coefficients of the linearized rate equations."""
    if not omega0 > 0.0:
        raise ModelError(f"omega0 must be positive, got {omega0}")
    j11, j22, j33 = j.j11, j.j22, j.j33
    w2 = omega0 * omega0
    return GravityGradientCoefficients(
        f41=8.0 * (j33 - j22) * w2 / j11,
        f46=(-j11 + j22 - j33) * omega0 / j11,
        f64=(j11 - j22 + j33) * omega0 / j33,
        f52=6.0 * (j33 - j11) * w2 / j22,
        f63=2.0 * (j11 - j22) * w2 / j33,
    )


def system_matrix(j: InertiaTensor, omega0: float) -> SystemMatrices:
    """Constant 6x6 state matrix ``[[0, I/2], [Lambda1, Sigma1]]``."""
    f = gravity_coefficients(j, omega0)
    lam = np.diag([f.f41, f.f52, f.f63])
    sig = np.zeros((3, 3))
    sig[0, 2] = f.f46
    sig[2, 0] = f.f64
    a = np.zeros((6, 6))
    a[:3, 3:] = 0.5 * np.eye(3)
    a[3:, :3] = lam
    a[3:, 3:] = sig
    return SystemMatrices(a_matrix=a, lambda1=lam, sigma1=sig)


def magnetic_field(orbit: OrbitConfig, t: float) -> FieldSample:
    """Tilted-dipole field along a circular orbit, in orbit coordinates."""
    c = orbit.field_scale
    s_i = math.sin(orbit.i_m)
    th = orbit.omega0 * t
    return FieldSample(
        b1=c * math.cos(th) * s_i,
        b2=-c * math.cos(orbit.i_m),
        b3=2.0 * c * math.sin(th) * s_i,
    )


def _field_derivatives(orbit: OrbitConfig, t: float):
    """Field and its first two time derivatives as three 3-vectors."""
    c = orbit.field_scale
    w = orbit.omega0
    s_i = math.sin(orbit.i_m)
    s, co = math.sin(w * t), math.cos(w * t)
    b = np.array([c * co * s_i, -c * math.cos(orbit.i_m), 2.0 * c * s * s_i])
    db = np.array([-c * w * s * s_i, 0.0, 2.0 * c * w * co * s_i])
    ddb = np.array([-c * w * w * co * s_i, 0.0, -2.0 * c * w * w * s * s_i])
    return b, db, ddb


def _influence_from_field(j: InertiaTensor, b: np.ndarray) -> np.ndarray:
    # rows of -[b x] / J: torque m x b = -[b x] m, then divided by inertia
    b1, b2, b3 = b
    return np.array([
        [0.0, b3 / j.j11, -b2 / j.j11],
        [-b3 / j.j22, 0.0, b1 / j.j22],
        [b2 / j.j33, -b1 / j.j33, 0.0],
    ])


def influence_matrix(j: InertiaTensor, orbit: OrbitConfig, t: float) -> InfluenceMatrices:
    """B2(t), dB2/dt and d2B2/dt2 from hand-differentiated field expressions.

    Differentiation is linear in the field, so each derivative matrix is the
    same skew-over-inertia map applied to the differentiated field. This
    keeps ``b62' = -b53' * J22/J33`` (the derivative of ``b53``).
    """
    b, db, ddb = _field_derivatives(orbit, t)
    return InfluenceMatrices(
        b2_matrix=_influence_from_field(j, b),
        b2_dot=_influence_from_field(j, db),
        b2_ddot=_influence_from_field(j, ddb),
    )


def full_input_matrix(infl: InfluenceMatrices | np.ndarray) -> np.ndarray:
    """Stack ``[0_3; B2]`` into the 6x3 input matrix.

    Accepts either an :class:`InfluenceMatrices` (uses ``b2_matrix``) or a
    bare 3x3 block, so derivative blocks can be lifted the same way.
    """
    block = infl.b2_matrix if isinstance(infl, InfluenceMatrices) else np.asarray(infl)
    out = np.zeros((6, 3))
    out[3:, :] = block
    return out


def input_matrix(j: InertiaTensor, orbit: OrbitConfig, t: float) -> np.ndarray:
    """Shortcut for the 6x3 ``B(t)``."""
    b, _, _ = _field_derivatives(orbit, t)
    return full_input_matrix(_influence_from_field(j, b))


def equatorial_input_matrix(j: InertiaTensor, orbit: OrbitConfig) -> np.ndarray:
    """Constant input matrix of the time-invariant ``i_m = 0`` model.

    Only the ``b2`` component of the field survives, giving nonzeros at
    (4,3) = -b2/J11 and (6,1) = b2/J33 (1-based), with
    ``b2 = -mu_f cos(i_m) / a^3`` (``-mu_f / a^3`` at ``i_m = 0``).
    """
    b2 = -orbit.field_scale * math.cos(orbit.i_m)
    out = np.zeros((6, 3))
    out[3, 2] = -b2 / j.j11
    out[5, 0] = b2 / j.j33
    return out


def magnetic_torque(m, b) -> np.ndarray:
    """Torque ``m x b`` (N*m) from coil moment ``m`` (A*m^2) and field ``b`` (T)."""
    if isinstance(b, FieldSample):
        b = b.as_array()
    m = np.asarray(m, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(b))):
        raise ModelError("magnetic_torque needs finite inputs")
    return np.cross(m, b)


def scalar_part(q) -> float:
    """Rebuild q0 = sqrt(1 - |q|^2) for a vector part ``q``."""
    q = np.asarray(q, dtype=float)
    n2 = float(q @ q)
    if n2 > 1.0 + _NORM_SLACK:
        raise ModelError(f"|q|^2 = {n2} exceeds 1; not a unit quaternion")
    return math.sqrt(max(0.0, 1.0 - n2))


def kinematics_matrix(q) -> np.ndarray:
    q1, q2, q3 = (float(v) for v in q)
    q0 = scalar_part((q1, q2, q3))
    return np.array([
        [q0, -q3, q2],
        [q3, q0, -q1],
        [-q2, q1, q0],
    ])


def reduced_kinematics(x) -> np.ndarray:
    """Vector-quaternion rate ``0.5 * M(q) * omega`` of the reduced model.

    ``x`` may be a :class:`StateVector` or any 6-sequence.
    """
    if isinstance(x, StateVector):
        x = x.as_array()
    x = np.asarray(x, dtype=float)
    return 0.5 * kinematics_matrix(x[:3]) @ x[3:]
