"""Critical points of the flow: exact catalog, linearizations, eigenframes.

The flow has seven kinds of critical points inside the Ricci-flat
constraint set:

* three cone points, one per circle bundle (labels ``P0_KplusL``,
  ``P0_L``, ``P0_K``), each the start of the shooting families;
* the ALC sink ``P1`` together with three companions ``ALC_b1..3`` whose
  Z entries involve sqrt(10);
* two points ``AC_1``, ``AC_2`` whose Z entries solve the homogeneous
  Einstein condition R_i = 6/49 (asymptotic-cone limits);
* three sources ``G2_source_1..3`` and three saddles ``G2_saddle_1..3``
  inside the locus where both chirality systems vanish;
* a surface of fixed states with Z = 0 (``CircleFamily``) and a ray on
  the X4 axis (``LineFamily``).

Coordinates are stored exactly (Fraction, with QuadExt for the sqrt(10)
entries).  The linearization is assembled from analytic derivatives, so it
is exact at exact states; ``eigen`` adds a floating-point spectral
decomposition with clustering, and ``reference_frame`` returns closed-form
eigenvector tables for the cone points and the sink, with tangency flags
computed from exact constraint gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .aw_algebra import AWParams
from .errors import InvalidRequestError, SolverIncompleteError
from .exact import QuadExt, exact_sqrt
from .phase_system import (Chirality, PhaseState, cubic_coefficients,
                           flow_rhs, quartic_coefficients, vector_field)

__all__ = [
    "FlowClass",
    "CriticalPoint",
    "CriticalFamily",
    "CatalogNote",
    "Catalog",
    "FrameVector",
    "ReferenceFrame",
    "EigenData",
    "catalog",
    "jacobian",
    "jacobian_fd",
    "eigen",
    "reference_frame",
    "unstable_frame",
    "constraint_gradients",
    "first_order_jacobians",
    "solve_homogeneous_einstein",
]

LABEL_P0_KPLUSL = "P0_KplusL"
LABEL_P0_L = "P0_L"
LABEL_P0_K = "P0_K"
LABEL_P1 = "P1"
LABELS_ALC_B = ("ALC_b1", "ALC_b2", "ALC_b3")
LABELS_AC = ("AC_1", "AC_2")
LABELS_G2_SOURCE = ("G2_source_1", "G2_source_2", "G2_source_3")
LABELS_G2_SADDLE = ("G2_saddle_1", "G2_saddle_2", "G2_saddle_3")
LABEL_CIRCLE = "CircleFamily"
LABEL_LINE = "LineFamily"

THIRD = Fraction(1, 3)
SIXTH = Fraction(1, 6)
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
SEVENTH = Fraction(1, 7)
EINSTEIN_LEVEL = Fraction(6, 49)


class FlowClass(Enum):
    """Which constrained system a request refers to."""

    RICCI_FLAT = "ricci"
    SPIN_PLUS = "spin+"
    SPIN_MINUS = "spin-"


@dataclass(frozen=True)
class CriticalPoint:
    label: str
    state: PhaseState
    exact: bool
    description: str = ""


@dataclass(frozen=True)
class CriticalFamily:
    """A positive-dimensional set of fixed states with a sampler."""

    label: str
    description: str
    sample: object  # callable producing PhaseState from rational parameters


@dataclass(frozen=True)
class CatalogNote:
    label: str
    reason: str


@dataclass(frozen=True)
class Catalog:
    params: AWParams
    points: tuple
    families: tuple
    notes: tuple

    def get(self, label):
        for pt in self.points:
            if pt.label == label:
                return pt
        raise InvalidRequestError(f"no isolated critical point labeled {label!r}")

    def labels(self):
        return tuple(pt.label for pt in self.points)


def _cone_states(params):
    d = params.delta
    out = {
        LABEL_P0_KPLUSL: PhaseState(
            (THIRD, 0, 0, THIRD),
            (0, THIRD, THIRD, Fraction(6 * d, params.k + params.l))),
        LABEL_P0_K: PhaseState(
            (0, 0, THIRD, THIRD),
            (THIRD, THIRD, 0, Fraction(6 * d, params.k))),
    }
    if params.l > 0:
        out[LABEL_P0_L] = PhaseState(
            (0, THIRD, 0, THIRD),
            (THIRD, 0, THIRD, Fraction(6 * d, params.l)))
    return out


def _alc_companions():
    big = QuadExt(0, Fraction(1, 12), 10)
    small = QuadExt(0, Fraction(1, 24), 10)
    x = (SIXTH, SIXTH, SIXTH, 0)
    return (PhaseState(x, (big, small, small, 0)),
            PhaseState(x, (small, big, small, 0)),
            PhaseState(x, (small, small, big, 0)))


def _g2_points():
    sources = (PhaseState((-HALF, HALF, HALF, 0), (HALF, 0, 0, 0)),
               PhaseState((HALF, -HALF, HALF, 0), (0, HALF, 0, 0)),
               PhaseState((HALF, HALF, -HALF, 0), (0, 0, HALF, 0)))
    saddles = (PhaseState((HALF, 0, 0, 0), (0, QUARTER, QUARTER, 0)),
               PhaseState((0, HALF, 0, 0), (QUARTER, 0, QUARTER, 0)),
               PhaseState((0, 0, HALF, 0), (QUARTER, QUARTER, 0, 0)))
    return sources, saddles


def _circle_family_sample(d1, d2, d3):
    """Rational point of the Z = 0 fixed surface.

    The surface is the intersection of the hyperplane
    2(x1+x2+x3)+x4 = 1 with the ellipsoid 2(x1^2+x2^2+x3^2)+x4^2 = 1.
    Lines through the point (0, 0, 0, 1) inside the hyperplane meet the
    ellipsoid in exactly one more point, which this returns.
    """
    d1, d2, d3 = Fraction(d1), Fraction(d2), Fraction(d3)
    d4 = -2 * (d1 + d2 + d3)
    denom = 2 * (d1 * d1 + d2 * d2 + d3 * d3) + d4 * d4
    if denom == 0:
        raise InvalidRequestError("zero direction for the fixed surface")
    t = -2 * d4 / denom
    return PhaseState((t * d1, t * d2, t * d3, 1 + t * d4), (0, 0, 0, 0))


def _line_family_sample(z4):
    z4 = Fraction(z4)
    if z4 < 0:
        raise InvalidRequestError("the fixed ray requires z4 >= 0")
    return PhaseState((0, 0, 0, 1), (0, 0, 0, z4))


def catalog(params):
    """All critical points for one parameter pair, exact where possible.

    Points whose defining data degenerate (the l-bundle cone point at
    l = 0) or whose coordinates are not exactly representable (the AC pair
    away from algebraically solvable parameters) are recorded in
    ``notes``; AC entries are still cataloged in that case, flagged
    ``exact=False`` with numerically refined coordinates.
    """
    return _catalog_cached(params.k, params.l)


@lru_cache(maxsize=64)
def _catalog_cached(k, l):
    params = AWParams(k, l)
    points = []
    notes = []

    cones = _cone_states(params)
    points.append(CriticalPoint(
        LABEL_P0_KPLUSL, cones[LABEL_P0_KPLUSL], True,
        "cone point of the (k+l)-bundle; start of the plus-chirality family"))
    if LABEL_P0_L in cones:
        points.append(CriticalPoint(
            LABEL_P0_L, cones[LABEL_P0_L], True,
            "cone point of the l-bundle; start of a minus-chirality family"))
    else:
        notes.append(CatalogNote(
            LABEL_P0_L,
            "omitted: coordinate Z4 = 6*delta/l is undefined for l = 0, "
            "the l-bundle has no cone point"))
    points.append(CriticalPoint(
        LABEL_P0_K, cones[LABEL_P0_K], True,
        "cone point of the k-bundle; start of a minus-chirality family"))

    points.append(CriticalPoint(
        LABEL_P1, PhaseState((SIXTH, SIXTH, SIXTH, 0), (SIXTH, SIXTH, SIXTH, 0)),
        True, "the ALC sink; lies in the locus where both chiralities vanish"))
    for label, state in zip(LABELS_ALC_B, _alc_companions()):
        points.append(CriticalPoint(
            label, state, True,
            "ALC companion point with Z entries proportional to sqrt(10)"))

    try:
        ac_points, ac_notes = _ac_pair(params)
        points.extend(ac_points)
        notes.extend(ac_notes)
    except SolverIncompleteError as err:
        notes.append(CatalogNote("AC", f"homogeneous Einstein solve failed: {err}"))

    sources, saddles = _g2_points()
    for label, state in zip(LABELS_G2_SOURCE, sources):
        points.append(CriticalPoint(
            label, state, True,
            "source of the restricted flow on the locus where both "
            "chiralities vanish; one Z entry equals 1/2"))
    for label, state in zip(LABELS_G2_SADDLE, saddles):
        points.append(CriticalPoint(
            label, state, True,
            "saddle of the restricted flow on the locus where both "
            "chiralities vanish; two Z entries equal 1/4"))

    families = (
        CriticalFamily(
            LABEL_CIRCLE,
            "fixed surface with Z = 0: 2(x1+x2+x3)+x4 = 1 and "
            "2(x1^2+x2^2+x3^2)+x4^2 = 1; sample(d1, d2, d3) returns a "
            "rational point",
            _circle_family_sample),
        CriticalFamily(
            LABEL_LINE,
            "fixed ray (0,0,0,1,0,0,0,z4) with z4 >= 0; sample(z4)",
            _line_family_sample),
    )
    return Catalog(params=params, points=tuple(points), families=families,
                   notes=tuple(notes))


def _ac_pair(params):
    """The two AC critical points, exact when rationalizable."""
    sols = solve_homogeneous_einstein(params)
    points, notes = [], []
    x = (SEVENTH, SEVENTH, SEVENTH, SEVENTH)
    for label, (z, is_exact) in zip(LABELS_AC, sols):
        desc = ("cone-limit point: Z solves the homogeneous Einstein "
                "condition R_i = 6/49")
        points.append(CriticalPoint(label, PhaseState(x, z), is_exact, desc))
        if not is_exact:
            notes.append(CatalogNote(
                label,
                "coordinates are algebraic but not rational for these "
                "parameters; cataloged at floating-point accuracy"))
    return points, notes


# ---------------------------------------------------------------------------
# linearization


def jacobian(params, state):
    """Analytic 8x8 derivative of the vector field; exact at exact states."""
    x1, x2, x3, x4 = state.X
    z1, z2, z3, z4 = state.Z
    ca, cb, cc = quartic_coefficients(params)
    g = 2 * (x1 * x1 + x2 * x2 + x3 * x3) + x4 * x4
    gm1 = g - 1
    dg = (4 * x1, 4 * x2, 4 * x3, 2 * x4)
    z4sq = z4 * z4

    rows = []
    # X rows: d(Xi*(G-1) + Ri)
    dr = [
        (2 * z1,
         6 * z3 - 2 * z2 - 2 * ca * z2 * z3 * z3 * z4sq,
         6 * z2 - 2 * z3 - 2 * ca * z2 * z2 * z3 * z4sq,
         -2 * ca * z2 * z2 * z3 * z3 * z4),
        (6 * z3 - 2 * z1 - 2 * cb * z1 * z3 * z3 * z4sq,
         2 * z2,
         6 * z1 - 2 * z3 - 2 * cb * z1 * z1 * z3 * z4sq,
         -2 * cb * z1 * z1 * z3 * z3 * z4),
        (6 * z2 - 2 * z1 - 2 * cc * z1 * z2 * z2 * z4sq,
         6 * z1 - 2 * z2 - 2 * cc * z1 * z1 * z2 * z4sq,
         2 * z3,
         -2 * cc * z1 * z1 * z2 * z2 * z4),
        (2 * cb * z1 * z3 * z3 * z4sq + 2 * cc * z1 * z2 * z2 * z4sq,
         2 * ca * z2 * z3 * z3 * z4sq + 2 * cc * z1 * z1 * z2 * z4sq,
         2 * ca * z2 * z2 * z3 * z4sq + 2 * cb * z1 * z1 * z3 * z4sq,
         2 * z4 * (ca * z2 * z2 * z3 * z3 + cb * z1 * z1 * z3 * z3
                   + cc * z1 * z1 * z2 * z2)),
    ]
    xs = (x1, x2, x3, x4)
    for i in range(4):
        xrow = [xs[i] * dg[j] for j in range(4)]
        xrow[i] = xrow[i] + gm1
        rows.append(tuple(xrow) + dr[i])

    # Z rows
    signs = ((1, -1, -1, 0), (-1, 1, -1, 0), (-1, -1, 1, 0))
    zs = (z1, z2, z3)
    diag = (g + x1 - x2 - x3, g + x2 - x3 - x1, g + x3 - x1 - x2)
    for i in range(3):
        xrow = tuple(zs[i] * (dg[j] + signs[i][j]) for j in range(4))
        zrow = [0, 0, 0, 0]
        zrow[i] = diag[i]
        rows.append(xrow + tuple(zrow))
    xrow = tuple(z4 * (-dg[j] + (1 if j == 3 else 0)) for j in range(4))
    rows.append(xrow + (0, 0, 0, x4 - g))
    return tuple(rows)


def jacobian_fd(params, state, step=1e-6):
    """Central-difference derivative of the float vector field."""
    rhs = flow_rhs(params)
    y0 = np.asarray(state.as_floats(), dtype=float)
    out = np.empty((8, 8))
    for j in range(8):
        h = step * max(1.0, abs(y0[j]))
        yp, ym = y0.copy(), y0.copy()
        yp[j] += h
        ym[j] -= h
        fp = np.asarray(rhs(0.0, yp))
        fm = np.asarray(rhs(0.0, ym))
        out[:, j] = (fp - fm) / (2.0 * h)
    return out


@dataclass(frozen=True)
class EigenData:
    label: str
    values: tuple          # eigenvalues sorted by descending real part
    clusters: tuple        # ((value, multiplicity), ...) after 1e-8 clustering
    vectors: np.ndarray    # columns matching ``values``
    max_residual: float


def _resolve_point(params, point_or_label):
    if isinstance(point_or_label, CriticalPoint):
        return point_or_label
    if isinstance(point_or_label, PhaseState):
        return CriticalPoint("(ad hoc)", point_or_label, point_or_label.is_exact())
    if isinstance(point_or_label, str):
        if point_or_label in (LABEL_CIRCLE, LABEL_LINE):
            raise InvalidRequestError(
                f"{point_or_label} is a family of fixed states; eigen-analysis "
                "applies to isolated points only")
        return catalog(params).get(point_or_label)
    raise InvalidRequestError(f"cannot resolve {point_or_label!r}")


def eigen(params, point_or_label, cluster_tol=1e-8):
    """Floating-point spectrum of the linearization at a critical point."""
    pt = _resolve_point(params, point_or_label)
    mat = np.array([[float(v) for v in row] for row in jacobian(params, pt.state)])
    vals, vecs = np.linalg.eig(mat)
    order = np.argsort(-vals.real - 1e-12 * vals.imag)
    vals, vecs = vals[order], vecs[:, order]
    resid = max(float(np.linalg.norm(mat @ vecs[:, i] - vals[i] * vecs[:, i]))
                for i in range(len(vals)))
    clusters = []
    for v in vals:
        if clusters and abs(v - clusters[-1][0]) <= cluster_tol:
            val, mult = clusters[-1]
            clusters[-1] = ((val * mult + v) / (mult + 1), mult + 1)
        else:
            clusters.append((v, 1))
    clusters = tuple((complex(v).real if abs(complex(v).imag) < cluster_tol
                      else complex(v), m) for v, m in clusters)
    return EigenData(label=pt.label, values=tuple(vals), clusters=clusters,
                     vectors=vecs, max_residual=resid)


# ---------------------------------------------------------------------------
# closed-form eigenvector tables


@dataclass(frozen=True)
class FrameVector:
    value: Fraction
    vector: tuple
    tangent_crf: bool
    tangent_spin_plus: bool
    tangent_spin_minus: bool


@dataclass(frozen=True)
class ReferenceFrame:
    label: str
    point: CriticalPoint
    pairs: tuple


def _table_p0_kplusl(k, l, delta):
    kl = k + l
    c = Fraction(delta, kl)
    vals = [Fraction(2, 3)] * 4 + [Fraction(-2, 3)] * 2 + [Fraction(-4, 3)] * 2
    vecs = [
        (2, 0, 0, -4, 0, -1, -1, -36 * c),
        (-3 * kl, 4 * k + 5 * l, 5 * k + 4 * l, -12 * kl,
         3 * kl, -5 * k - 4 * l, -4 * k - 5 * l, 0),
        (0, 1, -1, 0, 0, 1, -1, 0),
        (0, 3, 3, 0, 2, 0, 0, 0),
        (4, -3, -3, 4, 0, -2, -2, 36 * c),
        (0, 1, 1, 0, 0, 0, 0, 0),
        (0, 2, -2, 0, 0, -1, 1, 0),
        (2, -1, 1, -4, 0, 1, 0, 18 * c),
    ]
    return vals, vecs


def _table_p0_k(k, l, delta):
    c = Fraction(delta, k)
    vals = [Fraction(2, 3)] * 4 + [Fraction(-2, 3)] * 2 + [Fraction(-4, 3)] * 2
    vecs = [
        (0, 0, 2, -4, -1, -1, 0, -36 * c),
        (5 * k + l, 4 * k - l, -3 * k, -12 * k, -4 * k + l, -5 * k - l, 3 * k, 0),
        (-1, 1, 0, 0, -1, 1, 0, 0),
        (3, 3, 0, 0, 0, 0, 2, 0),
        (0, 0, 2, 2, -1, -1, 0, 18 * c),
        (1, 1, 0, 0, 0, 0, 0, 0),
        (2, -2, 0, 0, -1, 1, 0, 0),
        (-1, 1, 2, -4, 1, 0, 0, 18 * c),
    ]
    return vals, vecs


def _mirror(vec):
    """Swap the second and third slots of both the X and Z parts."""
    return (vec[0], vec[2], vec[1], vec[3], vec[4], vec[6], vec[5], vec[7])


def _table_p0_l(k, l, delta):
    # The flow with parameters (k, l) maps to the flow with (l, k) under the
    # mirror that swaps the second and third slots, carrying the k-bundle
    # cone point to the l-bundle one.
    vals, vecs = _table_p0_k(l, k, delta)
    return vals, [_mirror(v) for v in vecs]


def _table_p1():
    vals = ([Fraction(-1, 6)] * 3 + [Fraction(-5, 6)] * 2
            + [Fraction(-2, 3)] * 2 + [Fraction(1, 3)])
    vecs = [
        (0, 0, 0, 0, 0, 0, 0, 1),
        (2, -1, -1, 0, -4, 2, 2, 0),
        (0, -1, 1, 0, 0, 2, -2, 0),
        (0, 0, 0, 1, 0, 0, 0, 0),
        (-5, -5, -5, 0, 1, 1, 1, 0),
        (4, -2, -2, 0, -2, 1, 1, 0),
        (0, 2, -2, 0, 0, -1, 1, 0),
        (2, 2, 2, 0, 1, 1, 1, 0),
    ]
    return vals, vecs


def constraint_gradients(params, state):
    """Exact gradients of the hyperplane and conservation constraints."""
    x1, x2, x3, x4 = state.X
    z1, z2, z3, z4 = state.Z
    ca, cb, cc = quartic_coefficients(params)
    dg = (4 * x1, 4 * x2, 4 * x3, 2 * x4)
    z4sq = z4 * z4
    # dRs/dZ with Rs = 2R1 + 2R2 + 2R3 + R4
    dr1 = (2 * z1,
           6 * z3 - 2 * z2 - 2 * ca * z2 * z3 * z3 * z4sq,
           6 * z2 - 2 * z3 - 2 * ca * z2 * z2 * z3 * z4sq,
           -2 * ca * z2 * z2 * z3 * z3 * z4)
    dr2 = (6 * z3 - 2 * z1 - 2 * cb * z1 * z3 * z3 * z4sq,
           2 * z2,
           6 * z1 - 2 * z3 - 2 * cb * z1 * z1 * z3 * z4sq,
           -2 * cb * z1 * z1 * z3 * z3 * z4)
    dr3 = (6 * z2 - 2 * z1 - 2 * cc * z1 * z2 * z2 * z4sq,
           6 * z1 - 2 * z2 - 2 * cc * z1 * z1 * z2 * z4sq,
           2 * z3,
           -2 * cc * z1 * z1 * z2 * z2 * z4)
    dr4 = (2 * cb * z1 * z3 * z3 * z4sq + 2 * cc * z1 * z2 * z2 * z4sq,
           2 * ca * z2 * z3 * z3 * z4sq + 2 * cc * z1 * z1 * z2 * z4sq,
           2 * ca * z2 * z2 * z3 * z4sq + 2 * cb * z1 * z1 * z3 * z4sq,
           2 * z4 * (ca * z2 * z2 * z3 * z3 + cb * z1 * z1 * z3 * z3
                     + cc * z1 * z1 * z2 * z2))
    drs = tuple(2 * dr1[j] + 2 * dr2[j] + 2 * dr3[j] + dr4[j] for j in range(4))
    return {
        "hyperplane": (2, 2, 2, 1, 0, 0, 0, 0),
        "conservation": dg + drs,
    }


def first_order_jacobians(params, state):
    """Exact 4x8 derivatives of the F system and of the H system."""
    z1, z2, z3, z4 = state.Z
    da, db, dc = cubic_coefficients(params)

    def block(sign):
        a, b, c = sign * da, sign * db, sign * dc
        return (
            (1, 0, 0, 0, 1, -1 + a * z3 * z4, -1 + a * z2 * z4, a * z2 * z3),
            (0, 1, 0, 0, -1 - b * z3 * z4, 1, -1 - b * z1 * z4, -b * z1 * z3),
            (0, 0, 1, 0, -1 - c * z2 * z4, -1 - c * z1 * z4, 1, -c * z1 * z2),
            (0, 0, 0, 1, b * z3 * z4 + c * z2 * z4,
             -a * z3 * z4 + c * z1 * z4, -a * z2 * z4 + b * z1 * z4,
             -a * z2 * z3 + b * z1 * z3 + c * z1 * z2),
        )

    return block(1), block(-1)


def _dot(u, v):
    total = 0
    for a, b in zip(u, v):
        total = total + a * b
    return total


def reference_frame(params, label):
    """Closed-form eigenvalue/eigenvector table at a cone point or the sink.

    Tangency flags are computed exactly: a vector is tangent to the
    Ricci-flat set when it annihilates the gradients of the hyperplane and
    conservation constraints, and tangent to a chirality set when it
    additionally lies in the kernel of that system's derivative.
    """
    k, l, d = params.k, params.l, params.delta
    if label == LABEL_P0_KPLUSL:
        vals, vecs = _table_p0_kplusl(k, l, d)
    elif label == LABEL_P0_K:
        vals, vecs = _table_p0_k(k, l, d)
    elif label == LABEL_P0_L:
        if l == 0:
            raise InvalidRequestError("the l-bundle cone point does not exist "
                                      "for l = 0")
        vals, vecs = _table_p0_l(k, l, d)
    elif label == LABEL_P1:
        vals, vecs = _table_p1()
    else:
        raise InvalidRequestError(
            f"no closed-form eigenvector table for {label!r}")

    point = catalog(params).get(label)
    grads = constraint_gradients(params, point.state)
    df, dh = first_order_jacobians(params, point.state)
    pairs = []
    for lam, vec in zip(vals, vecs):
        vec = tuple(Fraction(c) if not isinstance(c, Fraction) else c
                    for c in vec)
        crf = (_dot(grads["hyperplane"], vec) == 0
               and _dot(grads["conservation"], vec) == 0)
        plus = crf and all(_dot(row, vec) == 0 for row in df)
        minus = crf and all(_dot(row, vec) == 0 for row in dh)
        pairs.append(FrameVector(value=lam, vector=vec, tangent_crf=crf,
                                 tangent_spin_plus=plus,
                                 tangent_spin_minus=minus))
    return ReferenceFrame(label=label, point=point, pairs=tuple(pairs))


_CHIRALITY_OF_CONE = {
    LABEL_P0_KPLUSL: Chirality.PLUS,
    LABEL_P0_K: Chirality.MINUS,
    LABEL_P0_L: Chirality.MINUS,
}


def unstable_frame(params, label, flow_class):
    """The unstable directions used for shooting out of a cone point.

    For the Ricci-flat system this is (v1, v2, v3); for a chirality
    system it is (v1, v2), and the chirality must match the cone point
    (plus for the (k+l)-bundle, minus for the k- and l-bundles).
    """
    if isinstance(flow_class, str):
        try:
            flow_class = FlowClass(flow_class)
        except ValueError:
            raise InvalidRequestError(
                f"unknown flow class {flow_class!r}") from None
    if label not in _CHIRALITY_OF_CONE:
        raise InvalidRequestError(
            f"unstable frames are defined at cone points, not {label!r}")
    frame = reference_frame(params, label)
    if flow_class is FlowClass.RICCI_FLAT:
        want = frame.pairs[:3]
        if not all(p.tangent_crf for p in want):
            raise InvalidRequestError(
                f"table inconsistency: unstable frame at {label} is not "
                "tangent to the Ricci-flat set")
        return want
    chir = (Chirality.PLUS if flow_class is FlowClass.SPIN_PLUS
            else Chirality.MINUS)
    if _CHIRALITY_OF_CONE[label] is not chir:
        raise InvalidRequestError(
            f"{label} does not lie on the {flow_class.value} constraint set; "
            f"its chirality is {_CHIRALITY_OF_CONE[label].value}")
    want = frame.pairs[:2]
    flag = ("tangent_spin_plus" if chir is Chirality.PLUS
            else "tangent_spin_minus")
    if not all(getattr(p, flag) for p in want):
        raise InvalidRequestError(
            f"table inconsistency: unstable frame at {label} is not tangent "
            f"to the {flow_class.value} set")
    return want


# ---------------------------------------------------------------------------
# homogeneous Einstein solve (the AC pair)


def solve_homogeneous_einstein(params, grid_points=10, z_span=(0.05, 0.5),
                               newton_iters=80, resid_tol=1e-12):
    """Solve R_i(z) = 6/49 (i = 1..4) with all z_i > 0.

    z4 is eliminated through R4 = 6/49, which fixes z4^2 rationally in
    terms of (z1, z2, z3); batched Newton iteration over a positive grid
    finds the remaining three equations' roots.  Exactly two solutions are
    expected; anything else raises SolverIncompleteError.  Returns
    [(z_tuple, exact_flag), ...] sorted by descending z1, with exact
    rational (or quadratic-surd z4) coordinates whenever the numeric
    solution rationalizes and verifies exactly.
    """
    ca, cb, cc = (float(c) for c in quartic_coefficients(params))
    level = float(EINSTEIN_LEVEL)

    def residual(z):
        z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
        q = ca * (z2 * z3) ** 2 + cb * (z1 * z3) ** 2 + cc * (z1 * z2) ** 2
        w = level / q  # z4^2
        r1 = 6 * z2 * z3 + z1 ** 2 - z2 ** 2 - z3 ** 2 - ca * (z2 * z3) ** 2 * w
        r2 = 6 * z1 * z3 + z2 ** 2 - z3 ** 2 - z1 ** 2 - cb * (z1 * z3) ** 2 * w
        r3 = 6 * z1 * z2 + z3 ** 2 - z1 ** 2 - z2 ** 2 - cc * (z1 * z2) ** 2 * w
        return np.stack([r1 - level, r2 - level, r3 - level], axis=-1)

    lo, hi = z_span
    axis = np.linspace(lo, hi, grid_points)
    starts = np.array(np.meshgrid(axis, axis, axis)).reshape(3, -1).T
    z = starts.copy()
    h = 1e-7
    eye = np.eye(3)
    for _ in range(newton_iters):
        r0 = residual(z)
        jac = np.stack([(residual(z + h * eye[j]) - residual(z - h * eye[j]))
                        / (2 * h) for j in range(3)], axis=-1)
        ok = np.isfinite(jac).all(axis=(1, 2)) & np.isfinite(r0).all(axis=1)
        dets = np.zeros(len(z))
        dets[ok] = np.abs(np.linalg.det(jac[ok]))
        ok &= dets > 1e-14
        step = np.zeros_like(z)
        if ok.any():
            step[ok] = np.linalg.solve(jac[ok], r0[ok][..., None])[..., 0]
        z = np.clip(z - step, 1e-4, 4.0)

    final = residual(z)
    good = np.nonzero(np.abs(final).max(axis=1) < resid_tol)[0]
    found = {}
    for i in good:
        key = tuple(np.round(z[i], 9))
        if key not in found:
            found[key] = z[i]
    sols = sorted(found.values(), key=lambda v: -v[0])
    if len(sols) != 2:
        raise SolverIncompleteError(
            f"expected exactly 2 homogeneous Einstein solutions, found "
            f"{len(sols)}: {[tuple(map(float, s)) for s in sols]}")

    out = []
    for zvec in sols:
        z123 = tuple(float(v) for v in zvec)
        q = (ca * (z123[1] * z123[2]) ** 2 + cb * (z123[0] * z123[2]) ** 2
             + cc * (z123[0] * z123[1]) ** 2)
        z4 = (level / q) ** 0.5
        exact = _try_exact_einstein(params, z123)
        if exact is not None:
            out.append((exact, True))
        else:
            out.append(((z123[0], z123[1], z123[2], z4), False))
    return out


def _try_exact_einstein(params, z123):
    """Rationalize a numeric solution and verify it exactly, or None."""
    ca, cb, cc = quartic_coefficients(params)
    zr = tuple(Fraction(v).limit_denominator(10 ** 6) for v in z123)
    for v, r in zip(z123, zr):
        if abs(float(r) - v) > 1e-9:
            return None
    z1, z2, z3 = zr
    q = ca * (z2 * z3) ** 2 + cb * (z1 * z3) ** 2 + cc * (z1 * z2) ** 2
    if q == 0:
        return None
    w = EINSTEIN_LEVEL / q  # exact z4^2
    checks = (
        6 * z2 * z3 + z1 ** 2 - z2 ** 2 - z3 ** 2 - ca * (z2 * z3) ** 2 * w,
        6 * z1 * z3 + z2 ** 2 - z3 ** 2 - z1 ** 2 - cb * (z1 * z3) ** 2 * w,
        6 * z1 * z2 + z3 ** 2 - z1 ** 2 - z2 ** 2 - cc * (z1 * z2) ** 2 * w,
    )
    if any(c != EINSTEIN_LEVEL for c in checks):
        return None
    z4 = exact_sqrt(w)
    state = PhaseState((SEVENTH,) * 4, (z1, z2, z3, z4))
    vel = vector_field(params, state)
    if any(v != 0 for v in vel.as_tuple()):
        return None
    return (z1, z2, z3, z4)
