"""Shooting from the conical fixed points along their unstable frames.

The module integrates trajectories that leave a cone point P0 along a
prescribed combination of unstable directions, watches the algebraic
constraints, classifies the forward limit (ALC sink, conical point,
escape, or undetermined), and recovers the metric coefficient profile
(a, b, c, f) as functions of the arclength variable t.

Two integration modes exist.  Spin modes run the reduced 4-dimensional
Z-system (the X block is a function of Z on either chirality set) and
carry the single Z-only conservation constraint.  The Ricci-flat mode
runs the full 8-dimensional system and carries the hyperplane and
conservation constraints.  Either way the constraint set is exactly
invariant for the exact flow but transversally unstable for the
numerical one (the linearization at the sink has a positive off-set
eigenvalue), so the integrator renormalizes: it works in fixed-length
chunks and Newton-projects the state back onto the constraint set at
every chunk boundary, logging the pre-projection defect as drift.

Boundary runs need one more ingredient.  For (k, l) = (1, 1) the
invariant region has one-dimensional boundary segments (a line for the
plus chirality, a curve for the minus chirality) that join the cone
point to a conical limit, and the tangent boundary offsets land on
them to round-off accuracy.  When the initial state satisfies a
cataloged segment to within FACE_LOCK_TOL, the segment equations join
the per-chunk projection ("face lock"), which removes the two unstable
transverse modes of the conical saddle; the lock is dropped if the
defect ever grows past FACE_RELEASE_TOL, so nudged runs never lock.
"""

import math
import os
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .aw_algebra import AWParams, BundleIndex, BundleTag, bundle
from .critical_points import (LABEL_P0_K, LABEL_P0_KPLUSL, LABEL_P0_L,
                              LABEL_P1, LABELS_AC, LABELS_ALC_B, FlowClass,
                              catalog, unstable_frame)
from .errors import (InitializationError, InvalidRequestError,
                     ReconstructionDomainError)
from .phase_system import (Chirality, PhaseState, cubic_coefficients,
                           flow_rhs, quartic_coefficients, reduced_z_rhs,
                           residuals, x_from_z)

SAMPLE_STEP = 0.05
CHUNK_LENGTH = 5.0
DECISION_WINDOW = 5.0
DECISION_RADIUS = 1e-6
ESCAPE_NORM = 1e3
DRIFT_FACTOR = 100.0
FACE_LOCK_TOL = 1e-10
FACE_RELEASE_TOL = 1e-8
MAX_PROJECTION_ITERS = 50
PROJECTION_TARGET = 1e-14

_CONE_LABEL = {
    BundleTag.K_PLUS_L: LABEL_P0_KPLUSL,
    BundleTag.K: LABEL_P0_K,
    BundleTag.L: LABEL_P0_L,
}

_CHIRALITY = {
    FlowClass.SPIN_PLUS: Chirality.PLUS,
    FlowClass.SPIN_MINUS: Chirality.MINUS,
}

OUTCOME_ALC = "ALC"
OUTCOME_AC = "AC"
OUTCOME_ESCAPE = "Escape"
OUTCOME_UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ShootSpec:
    """Everything needed to reproduce one shooting run.

    s is normalized to the unit sphere at construction (the zero vector
    is rejected); spin modes require s3 = 0 since their frame has two
    vectors.  epsilon is the max-norm amplitude of the initial offset.
    """

    params: AWParams
    bundle: BundleIndex
    mode: FlowClass
    s: tuple
    epsilon: float = 1e-6
    eta_max: float = 200.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    stop_on_converged: bool = True

    def __post_init__(self):
        if not isinstance(self.params, AWParams):
            object.__setattr__(self, "params", AWParams(*self.params))
        if not isinstance(self.bundle, BundleIndex):
            object.__setattr__(self, "bundle",
                               bundle(self.params, self.bundle))
        if not isinstance(self.mode, FlowClass):
            object.__setattr__(self, "mode", FlowClass(self.mode))
        s = tuple(float(v) for v in self.s)
        if len(s) == 2:
            s = s + (0.0,)
        if len(s) != 3:
            raise InvalidRequestError(
                "s must have two or three components, got %r" % (self.s,))
        norm = math.sqrt(s[0]*s[0] + s[1]*s[1] + s[2]*s[2])
        if norm < 1e-12:
            raise InvalidRequestError("s must be a nonzero direction")
        if self.mode is not FlowClass.RICCI_FLAT and s[2] != 0.0:
            raise InvalidRequestError(
                "spin modes have a two-vector frame; s3 must be 0")
        object.__setattr__(self, "s", tuple(v / norm for v in s))
        eps = float(self.epsilon)
        if not 0.0 < eps <= 1e-2:
            raise InvalidRequestError(
                "epsilon must lie in (0, 1e-2], got %g" % eps)
        object.__setattr__(self, "epsilon", eps)
        if not self.eta_max > 0.0:
            raise InvalidRequestError("eta_max must be positive")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0
                and self.max_step > 0.0):
            raise InvalidRequestError("integrator tolerances must be positive")

    @property
    def cone_label(self):
        return _CONE_LABEL[self.bundle.tag]


@dataclass(frozen=True)
class Asymptotics:
    """Forward-limit classification of one trajectory."""

    kind: str
    limit_label: str = None
    limit_state: tuple = None
    limit_distance: float = math.inf
    eta_at_decision: float = math.nan
    note: str = ""


@dataclass(frozen=True)
class Trajectory:
    """A sampled shooting run with its constraint log and outcome.

    states holds full 8-dimensional rows (X rebuilt from Z in spin
    modes); residual_log columns are |hyperplane|, |conservation| and
    the chirality residual max-norm at each sample (the smaller of the
    two chiralities in Ricci-flat mode).  events is a tuple of
    (eta, kind) pairs with kind in {"converged", "escaped", "drift",
    "stiff-failure"}.
    """

    spec: ShootSpec
    etas: np.ndarray
    states: np.ndarray
    residual_log: np.ndarray
    events: tuple
    outcome: Asymptotics
    face_lock: str = None
    dense: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for arr in (self.etas, self.states, self.residual_log):
            arr.setflags(write=False)

    @property
    def samples(self):
        return tuple((float(e), PhaseState.from_sequence(row))
                     for e, row in zip(self.etas, self.states))


@dataclass(frozen=True)
class MetricProfile:
    """Metric coefficients along a run, parameterized by arclength t."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    f: np.ndarray
    trl_inv: np.ndarray
    gauge: float

    def __post_init__(self):
        for arr in (self.t, self.a, self.b, self.c, self.f, self.trl_inv):
            arr.setflags(write=False)

    def rows(self):
        return tuple(zip(self.t, self.a, self.b, self.c, self.f,
                         self.trl_inv))


@dataclass(frozen=True)
class SweepEntry:
    """One grid point of a sweep: its direction and what happened."""

    s: tuple
    outcome: Asymptotics = None
    error: str = None


@dataclass(frozen=True)
class _BoundaryFace:
    """An invariant boundary segment given by polynomial equations on Z."""

    name: str
    equations: tuple


def _line_face():
    return _BoundaryFace(
        "boundary-line",
        (lambda z: (z[1] - z[2], np.array([0.0, 1.0, -1.0, 0.0])),
         lambda z: (3.0*z[0] + 3.0*z[1] - 1.0,
                    np.array([3.0, 3.0, 0.0, 0.0]))))


def _curve_face():
    return _BoundaryFace(
        "boundary-curve",
        (lambda z: (z[1] + z[2] - z[0], np.array([-1.0, 1.0, 1.0, 0.0])),
         lambda z: ((z[1] + z[2])*z[3] - 6.0,
                    np.array([0.0, z[3], z[3], z[1] + z[2]]))))


def boundary_face(params, chirality):
    """The cataloged invariant boundary segment for these parameters.

    Only the (1, 1) orbit ships one: the plus chirality region has the
    line segment {Z2 = Z3, 3Z1 + 3Z2 = 1} and the minus chirality
    region the curve {Z2 + Z3 = Z1, (Z2 + Z3) Z4 = 6}.  Returns None
    when no verified segment exists.
    """
    if (params.k, params.l) != (1, 1):
        return None
    if chirality is Chirality.PLUS:
        return _line_face()
    return _curve_face()


def _face_defect(face, z):
    return max(abs(eq(z)[0]) for eq in face.equations)


def _zcons(params, chirality):
    da, db, dc = (float(c) for c in cubic_coefficients(params))
    sgn = 1.0 if chirality is Chirality.PLUS else -1.0

    def fun(z):
        z1, z2, z3, z4 = z
        value = (2.0*(z1 + z2 + z3) - sgn*da*z2*z3*z4 + sgn*db*z1*z3*z4
                 + sgn*dc*z1*z2*z4 - 1.0)
        grad = np.array([
            2.0 + sgn*db*z3*z4 + sgn*dc*z2*z4,
            2.0 - sgn*da*z3*z4 + sgn*dc*z1*z4,
            2.0 - sgn*da*z2*z4 + sgn*db*z1*z4,
            -sgn*da*z2*z3 + sgn*db*z1*z3 + sgn*dc*z1*z2,
        ])
        return value, grad
    return fun


def _full_constraints(params):
    ca, cb, cc = (float(c) for c in quartic_coefficients(params))

    def fun(y):
        x1, x2, x3, x4, z1, z2, z3, z4 = y
        hyper = 2.0*(x1 + x2 + x3) + x4 - 1.0
        g = 2.0*(x1*x1 + x2*x2 + x3*x3) + x4*x4
        rs = (12.0*(z1*z2 + z2*z3 + z3*z1)
              - 2.0*(z1*z1 + z2*z2 + z3*z3)
              - (ca*z2*z2*z3*z3 + cb*z1*z1*z3*z3 + cc*z1*z1*z2*z2)*z4*z4)
        cons = g - 1.0 + rs
        grad_h = np.array([2.0, 2.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0])
        grad_c = np.array([
            4.0*x1, 4.0*x2, 4.0*x3, 2.0*x4,
            12.0*(z2 + z3) - 4.0*z1 - 2.0*z1*(cb*z3*z3 + cc*z2*z2)*z4*z4,
            12.0*(z1 + z3) - 4.0*z2 - 2.0*z2*(ca*z3*z3 + cc*z1*z1)*z4*z4,
            12.0*(z1 + z2) - 4.0*z3 - 2.0*z3*(ca*z2*z2 + cb*z1*z1)*z4*z4,
            -2.0*z4*(ca*z2*z2*z3*z3 + cb*z1*z1*z3*z3 + cc*z1*z1*z2*z2),
        ])
        return np.array([hyper, cons]), np.vstack([grad_h, grad_c])
    return fun


def _project_z(params, z, chirality, face=None, max_iters=MAX_PROJECTION_ITERS):
    """Least-norm Newton projection of Z onto {zcons = 0} (plus a face)."""
    zc = _zcons(params, chirality)
    z = np.array(z, dtype=float)
    for _ in range(max_iters):
        rows = [zc(z)]
        if face is not None:
            rows.extend(eq(z) for eq in face.equations)
        r = np.array([row[0] for row in rows])
        if np.max(np.abs(r)) < PROJECTION_TARGET:
            return z
        jac = np.vstack([row[1] for row in rows])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        z = z - step
    raise InitializationError(
        "constraint projection did not converge in %d iterations"
        % max_iters)


def _project_full(params, y, max_iters=MAX_PROJECTION_ITERS):
    """Least-norm Gauss-Newton projection onto the two flow constraints."""
    con = _full_constraints(params)
    y = np.array(y, dtype=float)
    for _ in range(max_iters):
        r, jac = con(y)
        if np.max(np.abs(r)) < PROJECTION_TARGET:
            return y
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        y = y - step
    raise InitializationError(
        "constraint projection did not converge in %d iterations"
        % max_iters)


def _offset_direction(spec):
    frame = unstable_frame(spec.params, spec.cone_label, spec.mode)
    vectors = [np.array([float(c) for c in pair.vector]) for pair in frame]
    w = sum(si * v for si, v in zip(spec.s, vectors))
    return w / np.max(np.abs(w))


def initial_state(spec):
    """The projected starting point P0 + epsilon * w of a shooting run.

    The offset direction w is the s-combination of the raw frame
    vectors, scaled to unit max-norm.  Spin modes then correct the
    Z-part of the offset point by a least-norm Newton step sequence
    onto the Z-only conservation surface (the correction is normal to
    the surface, so it is second order in epsilon and leaves the offset
    direction intact) and rebuild X from Z; the Ricci-flat mode
    projects the full state onto the hyperplane and conservation
    constraints the same way.
    """
    cat = catalog(spec.params)
    p0 = np.array([float(c) for c in
                   cat.get(spec.cone_label).state.as_tuple()])
    w = _offset_direction(spec)
    if spec.mode is FlowClass.RICCI_FLAT:
        y = _project_full(spec.params, p0 + spec.epsilon * w)
        return PhaseState.from_sequence(y)
    chirality = _CHIRALITY[spec.mode]
    z = _project_z(spec.params, p0[4:] + spec.epsilon * w[4:], chirality)
    x = [float(v) for v in x_from_z(spec.params, tuple(z), chirality)]
    return PhaseState(tuple(x), tuple(z))


def _limit_candidates(params):
    """Fixed-point targets for classification, in decision priority."""
    cat = catalog(params)
    out = []
    for label in (LABEL_P1,) + tuple(LABELS_ALC_B):
        point = cat.get(label)
        out.append((OUTCOME_ALC, label,
                    np.array(point.state.as_floats())))
    for label in LABELS_AC:
        point = cat.get(label)
        out.append((OUTCOME_AC, label,
                    np.array(point.state.as_floats())))
    return tuple(out)


def _chirality_residual(res, mode):
    f_norm = max(abs(v) for v in res.F)
    h_norm = max(abs(v) for v in res.H)
    if mode is FlowClass.SPIN_PLUS:
        return f_norm
    if mode is FlowClass.SPIN_MINUS:
        return h_norm
    return min(f_norm, h_norm)


def _residual_row(params, row, mode):
    res = residuals(params, PhaseState.from_sequence(row))
    return (abs(res.hyperplane), abs(res.conservation),
            _chirality_residual(res, mode))


def _trailing_decision(etas, states, candidates):
    """Earliest eta from which the tail stays inside one decision ball."""
    span = etas[-1] - etas[0]
    for kind, label, target in candidates:
        dist = np.max(np.abs(states - target), axis=1)
        inside = dist <= DECISION_RADIUS
        if not inside[-1]:
            continue
        run_start = len(inside) - 1
        while run_start > 0 and inside[run_start - 1]:
            run_start -= 1
        tail = etas[-1] - etas[run_start]
        if tail >= DECISION_WINDOW - 1e-9 or (run_start == 0 and span >= 0.0):
            return Asymptotics(
                kind=kind, limit_label=label,
                limit_state=tuple(float(v) for v in target),
                limit_distance=float(dist[-1]),
                eta_at_decision=float(etas[run_start]))
    return None


def classify(traj, params=None):
    """Classify a trajectory's forward limit from its samples.

    Escape fires when the max-norm of any sample exceeds ESCAPE_NORM.
    ALC and AC need the trailing window (length DECISION_WINDOW, or the
    whole trajectory when it never left the ball) to stay within
    DECISION_RADIUS of one cataloged limit point.  Anything else is
    Undetermined, with the nearest candidate recorded in the note.
    """
    if params is None:
        params = traj.spec.params
    etas = np.asarray(traj.etas, dtype=float)
    states = np.asarray(traj.states, dtype=float)
    if len(etas) < 2:
        raise InvalidRequestError("classification needs at least 2 samples")
    norms = np.max(np.abs(states), axis=1)
    crossed = np.nonzero(norms >= ESCAPE_NORM * (1.0 - 1e-9))[0]
    if crossed.size:
        i = int(crossed[0])
        return Asymptotics(
            kind=OUTCOME_ESCAPE, limit_distance=float(norms[i]),
            eta_at_decision=float(etas[i]),
            note="state max-norm crossed %g" % ESCAPE_NORM)
    candidates = _limit_candidates(params)
    decided = _trailing_decision(etas, states, candidates)
    if decided is not None:
        return decided
    dists = [(float(np.max(np.abs(states[-1] - target))), label)
             for _, label, target in candidates]
    nearest = min(dists)
    return Asymptotics(
        kind=OUTCOME_UNDETERMINED, limit_distance=nearest[0],
        eta_at_decision=float(etas[-1]),
        note="nearest candidate %s at distance %.3e" % (nearest[1],
                                                        nearest[0]))


def _escape_event():
    def event(eta, y):
        return ESCAPE_NORM - float(np.max(np.abs(y)))
    event.terminal = True
    event.direction = -1.0
    return event


def integrate(spec):
    """Run one shooting trajectory and classify it.

    The integrator is an adaptive embedded Runge-Kutta 5(4) pair with
    dense output, driven in chunks of CHUNK_LENGTH; at every chunk
    boundary the state is renormalized onto the constraint set (see the
    module docstring) and the pre-projection defect is logged.  Events:
    "escaped" (max-norm crossed ESCAPE_NORM), "stiff-failure" (step-size
    underflow; partial trajectory returned), "drift" (defect above
    DRIFT_FACTOR * rel_tol), "converged" (trailing window settled inside
    a decision ball; stops the run when stop_on_converged is set).
    """
    params = spec.params
    spin = spec.mode is not FlowClass.RICCI_FLAT
    chirality = _CHIRALITY.get(spec.mode)
    start = initial_state(spec)
    if spin:
        rhs = reduced_z_rhs(params, chirality)
        state = np.array(start.Z, dtype=float)
        zc = _zcons(params, chirality)
        face = boundary_face(params, chirality)
        locked = (face if face is not None
                  and _face_defect(face, state) < FACE_LOCK_TOL else None)
    else:
        rhs = flow_rhs(params)
        state = np.array(start.as_tuple(), dtype=float)
        con = _full_constraints(params)
        locked = None

    def rebuild(vec):
        if not spin:
            return np.array(vec, dtype=float)
        x = x_from_z(params, tuple(float(v) for v in vec), chirality)
        return np.array([float(v) for v in x] + [float(v) for v in vec])

    etas = [0.0]
    rows = [rebuild(state)]
    res_rows = [_residual_row(params, rows[0], spec.mode)]
    events = []
    dense = []
    candidates = _limit_candidates(params)
    eta = 0.0
    drift_logged = False
    stopped = False
    escape = _escape_event()
    while not stopped and eta < spec.eta_max - 1e-12:
        top = min(eta + CHUNK_LENGTH, spec.eta_max)
        sol = solve_ivp(rhs, (eta, top), state, method="RK45",
                        rtol=spec.rel_tol, atol=spec.abs_tol,
                        max_step=spec.max_step, dense_output=True,
                        events=[escape])
        reached = float(sol.t[-1])
        dense.append((eta, reached, sol.sol, spin))
        grid = np.arange(eta + SAMPLE_STEP, reached + 1e-9, SAMPLE_STEP)
        if grid.size == 0 or reached - grid[-1] > 1e-9:
            grid = np.append(grid, reached)
        for point in grid:
            row = rebuild(sol.sol(min(point, reached)))
            etas.append(float(point))
            rows.append(row)
            res_rows.append(_residual_row(params, row, spec.mode))
        if sol.status == 1:
            events.append((reached, "escaped"))
            break
        if sol.status != 0:
            events.append((reached, "stiff-failure"))
            break
        state = sol.y[:, -1]
        if spin:
            drift = abs(zc(state)[0])
            if locked is not None and _face_defect(locked, state) > \
                    FACE_RELEASE_TOL:
                locked = None
            state = _project_z(params, state, chirality, locked)
        else:
            drift = float(np.max(np.abs(con(state)[0])))
            state = _project_full(params, state)
        if drift > DRIFT_FACTOR * spec.rel_tol and not drift_logged:
            events.append((reached, "drift"))
            drift_logged = True
        rows[-1] = rebuild(state)
        res_rows[-1] = _residual_row(params, rows[-1], spec.mode)
        eta = top
        if spec.stop_on_converged:
            decided = _trailing_decision(np.array(etas), np.array(rows),
                                         candidates)
            if decided is not None:
                events.append((decided.eta_at_decision, "converged"))
                stopped = True

    etas_arr = np.array(etas)
    states_arr = np.array(rows)
    res_arr = np.array(res_rows)
    traj = Trajectory(
        spec=spec, etas=etas_arr, states=states_arr, residual_log=res_arr,
        events=tuple(events), outcome=Asymptotics(OUTCOME_UNDETERMINED),
        face_lock=locked.name if locked is not None else None,
        dense=tuple(dense))
    outcome = classify(traj)
    if outcome.kind == OUTCOME_AC and traj.face_lock is not None:
        outcome = replace(
            outcome,
            note=("limit identified by coordinates while locked to the "
                  "invariant boundary segment; an alternative labeling "
                  "convention swaps the two boundary limits"))
    return replace(traj, outcome=outcome)


def _dense_g(traj):
    """Evaluate the scalar 2(X1^2+X2^2+X3^2)+X4^2 anywhere on the run.

    Prefers the integrator's dense output.  A trajectory rebuilt from
    stored samples (no dense segments, as after a CSV round trip) falls
    back to monotone cubic interpolation of the sampled scalar, whose
    error on the solver's own grid stays far below the sampling error.
    """
    if not getattr(traj, "dense", ()):
        etas = np.asarray(traj.etas, dtype=float)
        x = np.asarray(traj.states, dtype=float)[:, :4]
        g = 2.0 * np.sum(x[:, :3] ** 2, axis=1) + x[:, 3] ** 2
        keep = np.concatenate(([True], np.diff(etas) > 0.0))
        interp = PchipInterpolator(etas[keep], g[keep], extrapolate=False)
        lo, hi = float(etas[0]), float(etas[-1])

        def sampled(eta):
            return float(interp(min(max(eta, lo), hi)))
        return sampled
    params = traj.spec.params
    chirality = _CHIRALITY.get(traj.spec.mode)
    spans = [seg[0] for seg in traj.dense]

    def fun(eta):
        i = max(0, min(len(spans) - 1, bisect_right(spans, eta) - 1))
        lo, hi, sol, spin = traj.dense[i]
        vec = sol(min(max(eta, lo), hi))
        if spin:
            x = [float(v) for v in
                 x_from_z(params, tuple(float(v) for v in vec), chirality)]
        else:
            x = [float(v) for v in vec[:4]]
        return 2.0*(x[0]*x[0] + x[1]*x[1] + x[2]*x[2]) + x[3]*x[3]
    return fun


def _adaptive_simpson(fun, a, b, rel_tol, depth=20):
    """Adaptive Simpson quadrature to a tolerance relative to the result."""
    if b <= a:
        return 0.0
    fa, fm, fb = fun(a), fun(0.5*(a + b)), fun(b)
    whole = (b - a) * (fa + 4.0*fm + fb) / 6.0
    tol = max(abs(whole), (b - a)) * rel_tol
    return _asr(fun, a, b, fa, fm, fb, whole, tol, depth)


def _asr(fun, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5*(a + b)
    lm, rm = 0.5*(a + m), 0.5*(m + b)
    flm, frm = fun(lm), fun(rm)
    left = (m - a) * (fa + 4.0*flm + fm) / 6.0
    right = (b - m) * (fm + 4.0*frm + fb) / 6.0
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5*tol
    return (_asr(fun, a, m, fa, flm, fm, left, half, depth - 1)
            + _asr(fun, m, b, fm, frm, fb, right, half, depth - 1))


def reconstruct_metric(traj, gauge=1.0):
    """Recover the metric coefficient profile along a trajectory.

    1/trL solves (1/trL)' = (1/trL) * G with 1/trL = gauge at the first
    stored sample, by adaptive Simpson quadrature of G on the dense
    output; t is the arclength integral of 1/trL, anchored so that the
    leading-order cone solution has t -> 0 at the vertex (t at the first
    sample equals gauge / G there).  Coefficients: a = (1/trL)/sqrt(Z2 Z3),
    b = (1/trL)/sqrt(Z1 Z3), c = (1/trL)/sqrt(Z1 Z2), f = (1/trL) Z4.
    The first sample is dropped when a Z-product vanishes there (the run
    starts next to a cone point where one Z is zero); a vanishing
    product at any later sample raises ReconstructionDomainError.
    """
    etas = np.asarray(traj.etas, dtype=float)
    states = np.asarray(traj.states, dtype=float)
    if etas.size < 3:
        raise InvalidRequestError("reconstruction needs at least 3 samples")
    z = states[:, 4:]
    prods = np.column_stack([z[:, 1]*z[:, 2], z[:, 0]*z[:, 2],
                             z[:, 0]*z[:, 1]])
    start = 0 if np.all(prods[0] > 0.0) else 1
    bad = np.nonzero(~np.all(prods[start:] > 0.0, axis=1))[0]
    if bad.size:
        i = int(bad[0]) + start
        raise ReconstructionDomainError(
            "Z-product vanishes at sample %d (eta = %.6g)" % (i, etas[i]))
    g_raw = _dense_g(traj)
    g_memo = {}

    def g_fun(eta):
        val = g_memo.get(eta)
        if val is None:
            val = g_raw(eta)
            g_memo[eta] = val
        return val

    tol = traj.spec.rel_tol
    n = etas.size
    log_trl = np.zeros(n)
    for i in range(1, n):
        step = _adaptive_simpson(g_fun, etas[i-1], etas[i], tol)
        log_trl[i] = log_trl[i-1] + step

    def trl_between(i, eta):
        inner = _adaptive_simpson(g_fun, etas[i], eta, tol)
        return gauge * math.exp(log_trl[i] + inner)

    trl_inv = gauge * np.exp(log_trl)
    t = np.zeros(n)
    t[0] = gauge / g_fun(etas[0])
    for i in range(1, n):
        t[i] = t[i-1] + _adaptive_simpson(
            lambda e, j=i-1: trl_between(j, e), etas[i-1], etas[i], tol)
    sl = slice(start, None)
    return MetricProfile(
        t=t[sl],
        a=trl_inv[sl] / np.sqrt(prods[sl, 0]),
        b=trl_inv[sl] / np.sqrt(prods[sl, 1]),
        c=trl_inv[sl] / np.sqrt(prods[sl, 2]),
        f=trl_inv[sl] * z[sl, 3],
        trl_inv=trl_inv[sl],
        gauge=float(gauge))


def worker_count(requested=None):
    """Worker cap: explicit argument, else SPIN7_THREADS, else cpu count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("SPIN7_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidRequestError(
                "SPIN7_THREADS must be an integer, got %r" % env) from None
    return max(1, os.cpu_count() or 1)


def quadrant_grid(count):
    """count interior directions of the open quadrant s1, s2 > 0."""
    if count < 1:
        raise InvalidRequestError("grid needs at least one point")
    half_pi = math.pi / 2.0
    return tuple(
        (math.cos(j * half_pi / (count + 1)),
         math.sin(j * half_pi / (count + 1)))
        for j in range(1, count + 1))


def _sweep_point(spec):
    return integrate(spec).outcome


def sweep(params, bundle_tag, mode, s_values, epsilon=1e-6, eta_max=200.0,
          rel_tol=1e-10, abs_tol=1e-12, workers=None):
    """Classify one run per direction; failures are recorded, not raised.

    Runs are independent and distributed over a process pool capped by
    worker_count(workers); results keep the input order regardless of
    completion order.
    """
    s_values = tuple(tuple(float(v) for v in s) for s in s_values)
    if not s_values:
        raise InvalidRequestError("sweep grid must be non-empty")
    specs = []
    failures = {}
    for i, s in enumerate(s_values):
        try:
            specs.append((i, ShootSpec(
                params=params, bundle=bundle_tag, mode=mode, s=s,
                epsilon=epsilon, eta_max=eta_max, rel_tol=rel_tol,
                abs_tol=abs_tol)))
        except Exception as exc:
            failures[i] = str(exc)
    outcomes = {}
    cap = min(worker_count(workers), max(1, len(specs)))
    if cap == 1 or len(specs) <= 1:
        for i, spec in specs:
            try:
                outcomes[i] = _sweep_point(spec)
            except Exception as exc:
                failures[i] = str(exc)
    else:
        with ProcessPoolExecutor(max_workers=cap) as pool:
            futures = [(i, pool.submit(_sweep_point, spec))
                       for i, spec in specs]
            for i, future in futures:
                try:
                    outcomes[i] = future.result()
                except Exception as exc:
                    failures[i] = str(exc)
    return tuple(
        SweepEntry(s=s_values[i], outcome=outcomes.get(i),
                   error=failures.get(i))
        for i in range(len(s_values)))
