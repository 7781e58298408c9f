"""Controllability analysis of the magnetically actuated LTV attitude model.

Two independent routes are provided:

* the derivative rank criterion, built from ``K_j(t) = d^j/dtau^j
  [Phi(t, tau) B(tau)]`` at ``tau = t`` together with the closed-form
  determinant argument at ``omega0 * t_c = pi/2``;
* the finite-horizon controllability Gramian, integrated numerically.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import model
from .errors import ModelError, NumericalError
from .model import InertiaTensor, OrbitConfig
from .numerics import (
    DEFAULT_GRAMIAN_NODES,
    DEFAULT_RANK_TOL,
    RankResult,
    eig_ratio,
    expm,
    simpson_weights,
    svd_rank,
    symmetric_eigs,
)

# columns (0-based) of the row-reduced 6x9 matrix used in the determinant chain
DETERMINANT_COLUMNS = (0, 1, 3, 4, 6, 7)
# i_m closer than this to 0 or pi counts as an equatorial orbit
EQUATORIAL_TOL = 1e-12
# lambda_min / lambda_max at or below this marks a singular Gramian
GRAMIAN_CUTOFF = 1e-10
_CONDITION_ZERO = 1e-12
_BLOCK_RTOL = 1e-12


class Verdict(str, enum.Enum):
    CONTROLLABLE = "Controllable"
    NOT_CONTROLLABLE_EQUATORIAL = "NotControllableEquatorial"
    CONDITIONS_VIOLATED = "ConditionsViolated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class KMatrices:
    k0: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    t: float

    @property
    def stacked(self) -> np.ndarray:
        """The 6x9 matrix ``[K0 | K1 | K2]``."""
        return np.hstack([self.k0, self.k1, self.k2])


def _rel_close(x, y, rtol) -> bool:
    x, y = np.asarray(x), np.asarray(y)
    scale = max(np.abs(x).max(initial=0.0), np.abs(y).max(initial=0.0))
    return bool(np.abs(x - y).max(initial=0.0) <= rtol * scale)


def k_matrices_from_blocks(system: model.SystemMatrices,
                           infl: model.InfluenceMatrices, t: float) -> KMatrices:
    """K0, K1, K2 assembled from the 3x3 block expressions."""
    sig, lam = system.sigma1, system.lambda1
    b2, db2, ddb2 = infl.b2_matrix, infl.b2_dot, infl.b2_ddot
    k0 = model.full_input_matrix(b2)
    k1 = np.vstack([-0.5 * b2, -sig @ b2 + db2])
    k2 = np.vstack([
        0.5 * sig @ b2 - db2,
        0.5 * lam @ b2 + sig @ sig @ b2 - 2.0 * sig @ db2 + ddb2,
    ])
    return KMatrices(k0, k1, k2, t)


def k_matrices(j: InertiaTensor, orbit: OrbitConfig, t: float) -> KMatrices:
    """``K0 = B``, ``K1 = -A B + B'``, ``K2 = A^2 B - 2 A B' + B''`` at ``t``.

    The matrix-product forms are cross-checked against the block forms.
    """
    system = model.system_matrix(j, orbit.omega0)
    infl = model.influence_matrix(j, orbit, t)
    a = system.a_matrix
    b = model.full_input_matrix(infl.b2_matrix)
    db = model.full_input_matrix(infl.b2_dot)
    ddb = model.full_input_matrix(infl.b2_ddot)
    k = KMatrices(b, -a @ b + db, a @ a @ b - 2.0 * a @ db + ddb, t)

    blocks = k_matrices_from_blocks(system, infl, t)
    for name in ("k1", "k2"):
        if not _rel_close(getattr(k, name), getattr(blocks, name), _BLOCK_RTOL):
            raise NumericalError(f"{name}: block form disagrees with product form")
    return k


def rank_test(k: KMatrices, rel_tol: float = DEFAULT_RANK_TOL) -> RankResult:
    return svd_rank(k.stacked, rel_tol)


def row_reduction(sigma1: np.ndarray) -> np.ndarray:
    """Unit lower-triangular ``[[I, 0], [-2 Sigma1, I]]``."""
    out = np.eye(6)
    out[3:, :3] = -2.0 * np.asarray(sigma1)
    return out


def reduced_matrix(k: KMatrices, sigma1: np.ndarray) -> np.ndarray:
    """Row-reduced ``[K0|K1|K2]`` with the top three rows doubled.

    Column blocks become ``[0; B2]``, ``[-B2; B2']`` and
    ``[Sigma1 B2 - 2 B2'; Lambda1 B2 / 2 + B2'']``. Rank is unchanged and
    any 6x6 minor is 8 times the matching minor of ``[K0|K1|K2]``.
    """
    return np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0]) @ row_reduction(sigma1) @ k.stacked


def row_reduction_identity(k: KMatrices, sigma1: np.ndarray, *,
                           lambda1: np.ndarray | None = None,
                           infl: model.InfluenceMatrices | None = None,
                           rel_tol: float = DEFAULT_RANK_TOL,
                           block_rtol: float = 1e-10) -> bool:
    """Check the rank-preserving reduction of ``[K0|K1|K2]``.

    Always checks that the rank is unchanged and that the reduced
    ``K1`` bottom block equals the ``K0`` bottom block's derivative
    (the ``Sigma1 B2`` terms cancel). With ``lambda1`` and ``infl``
    supplied, the reduced bottom blocks are also compared with
    ``B2'`` and ``Lambda1 B2 / 2 + B2''`` directly.
    """
    reduced = row_reduction(sigma1) @ k.stacked
    if rank_test(k, rel_tol).rank != svd_rank(reduced, rel_tol).rank:
        return False
    if infl is None or lambda1 is None:
        # B2' = K1 bottom + Sigma1 B2, with B2 read off K0
        expected = k.k1[3:] + np.asarray(sigma1) @ k.k0[3:]
        return _rel_close(reduced[3:, 3:6], expected, block_rtol)
    ok_mid = _rel_close(reduced[3:, 3:6], infl.b2_dot, block_rtol)
    ok_right = _rel_close(reduced[3:, 6:9],
                          0.5 * np.asarray(lambda1) @ infl.b2_matrix + infl.b2_ddot,
                          block_rtol)
    return ok_mid and ok_right


def controllability_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``[B, AB, ..., A^{n-1} B]``."""
    blocks = [np.asarray(b, dtype=float)]
    for _ in range(a.shape[0] - 1):
        blocks.append(a @ blocks[-1])
    return np.hstack(blocks)


def is_equatorial(orbit: OrbitConfig) -> bool:
    return abs(math.sin(orbit.i_m)) <= EQUATORIAL_TOL


def equatorial_degeneracy(j: InertiaTensor, orbit: OrbitConfig,
                          rel_tol: float = DEFAULT_RANK_TOL) -> bool:
    """True iff the time-invariant equatorial model loses pitch controllability.

    Forms ``[B, AB, ..., A^5 B]`` for the constant equatorial input matrix
    and checks that its second row (the q2 row) vanishes and its rank is
    at most 5.
    """
    if not is_equatorial(orbit):
        raise ModelError(f"equatorial check needs i_m = 0, got {orbit.i_m}")
    a = model.system_matrix(j, orbit.omega0).a_matrix
    ctrb = controllability_matrix(a, model.equatorial_input_matrix(j, orbit))
    top = np.abs(ctrb).max()
    row_zero = bool(np.all(np.abs(ctrb[1]) <= 1e-14 * top))
    return row_zero and svd_rank(ctrb, rel_tol).rank <= 5


# -- sparsity classes used by the equatorial argument ------------------------

SIGMA_PATTERNS = (
    np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=bool),
    np.array([[1, 0, 0], [0, 0, 0], [0, 0, 1]], dtype=bool),
)
LAMBDA_PATTERN = np.eye(3, dtype=bool)


def in_sigma_set(m: np.ndarray) -> bool:
    """Nonzeros confined to one of the two Sigma patterns."""
    nz = np.asarray(m) != 0.0
    return any(not np.any(nz & ~p) for p in SIGMA_PATTERNS)


def zero_middle(m: np.ndarray) -> bool:
    """Second row and second column identically zero."""
    m = np.asarray(m)
    return not (np.any(m[1] != 0.0) or np.any(m[:, 1] != 0.0))


def closure_table(rng: np.random.Generator | None = None, trials: int = 20) -> dict:
    """Brute-force the closure claims over all Sigma/Lambda pattern pairs.

    Returns ``{(operation, i, k): (in_sigma, zero_middle)}`` where ``i`` and
    ``k`` index :data:`SIGMA_PATTERNS` (``k`` is ``None`` for the
    ``Lambda @ Sigma`` product). A flag is True only if it held for every
    random draw.
    """
    rng = np.random.default_rng(0) if rng is None else rng

    def draw(pattern):
        return np.where(pattern, rng.uniform(0.5, 2.0, (3, 3)), 0.0)

    table = {}
    for i, k in itertools.product(range(2), repeat=2):
        for op in ("product", "sum"):
            flags = [True, True]
            for _ in range(trials):
                x, y = draw(SIGMA_PATTERNS[i]), draw(SIGMA_PATTERNS[k])
                z = x @ y if op == "product" else x + y
                flags[0] &= in_sigma_set(z)
                flags[1] &= zero_middle(z)
            table[(op, i, k)] = tuple(flags)
    for i in range(2):
        flags = [True, True]
        for _ in range(trials):
            z = draw(LAMBDA_PATTERN) @ draw(SIGMA_PATTERNS[i])
            flags[0] &= in_sigma_set(z)
            flags[1] &= zero_middle(z)
        table[("lambda_product", i, None)] = tuple(flags)
    return table


# -- analytic conditions and the determinant chain ---------------------------

class ConditionResiduals(NamedTuple):
    cond1: float  # J33 - J22
    cond2: float  # J22 (J11 - J22 + J33) - 6 J33 (J33 - J11)


def analytic_conditions(j: InertiaTensor) -> ConditionResiduals:
    j11, j22, j33 = j.j11, j.j22, j.j33
    return ConditionResiduals(
        cond1=j33 - j22,
        cond2=j22 * (j11 - j22 + j33) - 6.0 * j33 * (j33 - j11),
    )


def conditions_hold(j: InertiaTensor) -> tuple[bool, bool]:
    """Each residual is nonzero beyond 1e-12 of its natural J scale."""
    res = analytic_conditions(j)
    s = j.scale
    return abs(res.cond1) > _CONDITION_ZERO * s, abs(res.cond2) > _CONDITION_ZERO * s * s


@dataclass(frozen=True)
class _Entries:
    b42: float
    b43: float
    b51: float
    b53: float
    b61: float
    b62: float
    d42: float
    d51: float
    d53: float
    d62: float
    dd42: float
    dd51: float
    dd53: float
    dd62: float


def _entries(infl: model.InfluenceMatrices) -> _Entries:
    b, d, dd = infl.b2_matrix, infl.b2_dot, infl.b2_ddot
    return _Entries(
        b42=b[0, 1], b43=b[0, 2], b51=b[1, 0], b53=b[1, 2], b61=b[2, 0], b62=b[2, 1],
        d42=d[0, 1], d51=d[1, 0], d53=d[1, 2], d62=d[2, 1],
        dd42=dd[0, 1], dd51=dd[1, 0], dd53=dd[1, 2], dd62=dd[2, 1],
    )


def _check_inclination(orbit: OrbitConfig) -> None:
    if abs(math.sin(orbit.i_m) * math.cos(orbit.i_m)) <= EQUATORIAL_TOL:
        raise ModelError(
            f"determinant argument needs sin(i_m) cos(i_m) != 0, got i_m={orbit.i_m}"
        )


def bracket_term(j: InertiaTensor, orbit: OrbitConfig) -> float:
    """Second-factor bracket at t_c assembled from raw B2 entries."""
    t1, t2, t3 = _bracket_terms(j, orbit)
    return t1 + t2 + t3


def condition1_raw(j: InertiaTensor, orbit: OrbitConfig) -> float:
    """``f64 b42(t_c) - 2 b62'(t_c)`` from raw entries."""
    f = model.gravity_coefficients(j, orbit.omega0)
    e = _entries(model.influence_matrix(j, orbit, orbit.t_c))
    return f.f64 * e.b42 - 2.0 * e.d62


def condition1_value(j: InertiaTensor, orbit: OrbitConfig) -> float:
    """Closed form ``2 mu_f w0 sin(i_m) (J33 - J22) / (a^3 J11 J33)``."""
    return (2.0 * orbit.mu_f * orbit.omega0 * math.sin(orbit.i_m) * (j.j33 - j.j22)
            / (orbit.a**3 * j.j11 * j.j33))


def closed_form_combination(j: InertiaTensor, orbit: OrbitConfig) -> float:
    """Closed form of :func:`bracket_term` in terms of J and orbit parameters."""
    a9 = orbit.a**9
    s, c = math.sin(orbit.i_m), math.cos(orbit.i_m)
    return (2.0 * orbit.mu_f**3 * orbit.omega0**2
            / (a9 * j.j11 * j.j22**2 * j.j33**2)
            * s * s * c * analytic_conditions(j).cond2)


class DeterminantPair(NamedTuple):
    numeric: float
    factored: float


def _determinant_pair(j: InertiaTensor, orbit: OrbitConfig) -> DeterminantPair:
    tc = orbit.t_c
    system = model.system_matrix(j, orbit.omega0)
    k = k_matrices(j, orbit, tc)
    sub = reduced_matrix(k, system.sigma1)[:, DETERMINANT_COLUMNS]
    e = _entries(model.influence_matrix(j, orbit, tc))
    factored = (-e.b42 * condition1_raw(j, orbit) * e.b51 * bracket_term(j, orbit))
    return DeterminantPair(float(np.linalg.det(sub)), float(factored))


def submatrix_determinant(j: InertiaTensor, orbit: OrbitConfig) -> DeterminantPair:
    """Determinant of the 6x6 minor at t_c, computed two ways.

    ``numeric`` is the LU determinant of columns 1,2,4,5,7,8 of the
    row-reduced matrix (:func:`reduced_matrix`); ``factored`` is the
    product ``-b42 (f64 b42 - 2 b62') b51 [bracket]`` from raw entries.
    """
    _check_inclination(orbit)
    return _determinant_pair(j, orbit)


def k_submatrix_determinant(k: KMatrices) -> float:
    """Same minor taken directly from ``[K0|K1|K2]`` (one eighth of the reduced one)."""
    return float(np.linalg.det(k.stacked[:, DETERMINANT_COLUMNS]))


def _bracket_terms(j: InertiaTensor, orbit: OrbitConfig) -> tuple[float, float, float]:
    f = model.gravity_coefficients(j, orbit.omega0)
    e = _entries(model.influence_matrix(j, orbit, orbit.t_c))
    return (e.b51 * e.d62 * f.f46 * e.b61,
            -e.b42 * (0.5 * f.f52 * e.b51 + e.dd51) * e.b61,
            0.5 * f.f63 * e.b61 * e.b42 * e.b51)


def determinant_reference(j: InertiaTensor, orbit: OrbitConfig) -> float:
    """Magnitude the minor would have without cancellation inside its factors.

    Each factor that can vanish is replaced by the sum of the absolute
    values of its terms. A determinant that is tiny against this scale is
    zero up to roundoff.
    """
    f = model.gravity_coefficients(j, orbit.omega0)
    e = _entries(model.influence_matrix(j, orbit, orbit.t_c))
    first = abs(f.f64 * e.b42) + abs(2.0 * e.d62)
    return abs(e.b42) * first * abs(e.b51) * sum(abs(v) for v in _bracket_terms(j, orbit))


# -- Gramian oracle -----------------------------------------------------------

@dataclass(frozen=True)
class GramianResult:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending
    times: np.ndarray = field(repr=False)
    # Phi(t0, tau) B(tau) at each node, shape (nodes, 6, 3)
    weighted_inputs: np.ndarray = field(repr=False)

    @property
    def ratio(self) -> float:
        return eig_ratio(self.eigenvalues)


def transported_inputs(j: InertiaTensor, orbit: OrbitConfig, t0: float,
                       times: np.ndarray) -> np.ndarray:
    """Stack of ``Phi(t0, tau) B(tau) = exp(A (t0 - tau)) B(tau)``."""
    a = model.system_matrix(j, orbit.omega0).a_matrix
    phis = expm(a, t0 - np.asarray(times))
    bs = np.array([model.input_matrix(j, orbit, t) for t in times])
    return phis @ bs


def gramian(j: InertiaTensor, orbit: OrbitConfig, t0: float = 0.0,
            tf: float | None = None, nodes: int = DEFAULT_GRAMIAN_NODES) -> GramianResult:
    """Controllability Gramian ``int Phi(t0,tau) B B^T Phi(t0,tau)^T dtau``.

    ``tf`` defaults to one orbital period after ``t0``. Nodes are summed
    in a fixed order so repeated calls are bit-identical.
    """
    if tf is None:
        tf = t0 + orbit.period
    if not tf > t0:
        raise ValueError(f"need tf > t0, got t0={t0}, tf={tf}")
    weights = simpson_weights(t0, tf, nodes)
    times = np.linspace(t0, tf, nodes)
    p = transported_inputs(j, orbit, t0, times)
    w = np.einsum("k,kis,kjs->ij", weights, p, p)
    w = 0.5 * (w + w.T)
    return GramianResult(w, symmetric_eigs(w), times, p)


# -- report -------------------------------------------------------------------

@dataclass(frozen=True)
class ControllabilityReport:
    cond1_residual: float
    cond2_residual: float
    equatorial: bool
    k_rank: RankResult
    submatrix_det: float
    closed_form_det_factor: float
    gramian_eigs: tuple[float, ...]
    verdict: Verdict

    @property
    def gramian_ratio(self) -> float:
        return eig_ratio(self.gramian_eigs)

    def to_dict(self) -> dict:
        return {
            "cond1_residual": self.cond1_residual,
            "cond2_residual": self.cond2_residual,
            "equatorial": self.equatorial,
            "k_rank": {
                "rank": self.k_rank.rank,
                "singular_values": list(self.k_rank.singular_values),
                "tolerance_used": self.k_rank.tolerance_used,
            },
            "submatrix_det": self.submatrix_det,
            "closed_form_det_factor": self.closed_form_det_factor,
            "gramian_eigs": list(self.gramian_eigs),
            "gramian_ratio": self.gramian_ratio,
            "verdict": self.verdict.value,
        }


def analyze(j: InertiaTensor, orbit: OrbitConfig, *, rank_tol: float = DEFAULT_RANK_TOL,
            nodes: int = DEFAULT_GRAMIAN_NODES) -> ControllabilityReport:
    """Run every check and combine them into a verdict.

    The two conditions are sufficient only, so failing them off the equator
    gives ``Inconclusive`` unless the one-orbit Gramian is itself singular.
    """
    res = analytic_conditions(j)
    ok1, ok2 = conditions_hold(j)
    equatorial = is_equatorial(orbit)
    k_rank = rank_test(k_matrices(j, orbit, orbit.t_c), rank_tol)
    dets = _determinant_pair(j, orbit)
    gram = gramian(j, orbit, nodes=nodes)

    if equatorial:
        verdict = Verdict.NOT_CONTROLLABLE_EQUATORIAL
    elif ok1 and ok2 and k_rank.rank == 6:
        verdict = Verdict.CONTROLLABLE
    elif not (ok1 and ok2) and gram.ratio <= GRAMIAN_CUTOFF:
        verdict = Verdict.CONDITIONS_VIOLATED
    else:
        verdict = Verdict.INCONCLUSIVE

    return ControllabilityReport(
        cond1_residual=res.cond1,
        cond2_residual=res.cond2,
        equatorial=equatorial,
        k_rank=k_rank,
        submatrix_det=dets.numeric,
        closed_form_det_factor=closed_form_combination(j, orbit),
        gramian_eigs=tuple(float(v) for v in gram.eigenvalues),
        verdict=verdict,
    )
