"""Barrier polynomials, slice root functions, and certified positivity.

The compact invariant sets of the quotient flow are carved out by sign
conditions on four exact-rational polynomials in the phase coordinates
(Z1, Z2, Z3, Z4).  This module builds those barriers, restricts them
along the line and ray families used in the containment arguments,
tracks the distinguished roots of the restricted polynomials together
with their first and second implicit derivatives, and certifies
non-negativity of the Sylvester resultants that witness root
interlacing.  The resultants are cross-checked, coefficient by
coefficient, against independently recorded reference expansions
before any certificate is issued.

Two slice families appear.  Lines hold Z1 = alpha fixed, travel in
u = Z2 + Z3, and scale the fourth coordinate as
Z4 = 6*Delta*beta/(k+l); the two barrier restrictions are called q1
(quadratic in u) and q2 (quartic in u), and both turn out to be
independent of the orbit integers.  Rays set (Z2, Z3) = (alpha*Z1,
beta*Z1) with Z4 = (6*Delta/k)*delta; the restrictions p1 (quadratic
in Z1) and p2 (quartic in Z1) depend on the orbit integers only
through the ratio rho = l/k.

All arithmetic below is exact.  Floating point enters only in the
convenience return value of root_fn.
"""

from fractions import Fraction

from .aw_algebra import AWParams
from .errors import (
    DegenerateRootError,
    DomainAnomalyError,
    FormulaDiscrepancyError,
    InvalidRequestError,
)
from .exact import exact_sqrt
from .ratpoly import (
    Ball,
    Box,
    Certificate,
    Interval,
    RatPoly,
    DEFAULT_MAX_DEPTH,
    _coerce as _rat,
    certify_nonneg,
    random_nonnegativity_audit,
    smallest_root_in_interval,
    sylvester_resultant,
)

__all__ = [
    "BARRIER_KINDS",
    "BARRIER_VARIABLES",
    "DEFAULT_EXCLUSION_RADIUS",
    "LINE_PARAMETER_DOMAIN",
    "LINE_SLICE_KINDS",
    "LINE_SLICE_VARIABLES",
    "RAY_PARAMETER_DOMAIN",
    "RAY_SLICE_KINDS",
    "RAY_SLICE_VARIABLES",
    "ROOT_KINDS",
    "barrier",
    "boundary_zero_report",
    "certify_line_resultant",
    "certify_nonneg",
    "certify_ray_resultant",
    "implicit_derivatives",
    "line_resultant",
    "line_slices",
    "printed_line_resultant",
    "printed_ray_expansion",
    "random_nonnegativity_audit",
    "ray_slices",
    "root_fn",
    "root_gap_hessian_det",
    "rtilde",
    "slice",
    "stated_boundary_zeros",
    "sylvester_resultant",
]

BARRIER_VARIABLES = ("Z1", "Z2", "Z3", "Z4")
LINE_SLICE_VARIABLES = ("alpha", "beta", "u")
RAY_SLICE_VARIABLES = ("alpha", "beta", "delta", "Z1")
RAY_PARAMETER_VARIABLES = ("alpha", "beta", "delta")

BARRIER_KINDS = ("Q", "A", "P", "B")
LINE_SLICE_KINDS = ("q1", "q2")
RAY_SLICE_KINDS = ("p1", "p2")
ROOT_KINDS = ("omega", "zeta", "xi", "sigma")

# Exclusion balls of this radius around the proven zeros keep the
# subdivision away from points where no interval bound can win.
DEFAULT_EXCLUSION_RADIUS = Fraction(1, 100)

# Parameter boxes for the two resultants.  The beta and delta edges
# are half open because the scalings degenerate there; certification
# works on the closure, which is a strictly stronger statement once
# the degenerate prefactor has been divided out.
LINE_PARAMETER_DOMAIN = Box((
    Interval(Fraction(0), Fraction(1, 2)),
    Interval(Fraction(0), Fraction(1), lower_open=True),
))
RAY_PARAMETER_DOMAIN = Box((
    Interval(Fraction(0), Fraction(1)),
    Interval(Fraction(0), Fraction(1)),
    Interval(Fraction(0), Fraction(1), lower_open=True),
))

# Root search windows for the quartic slices.  The quadratic slices
# use the exact discriminant instead of a window.
ZETA_WINDOW = (Fraction(0), Fraction(2, 3))
SIGMA_WINDOW = (Fraction(0), Fraction(1, 2))

_LINE_CACHE = {}
_RAY_CACHE = {}


def _as_params(params):
    if isinstance(params, AWParams):
        return params
    if params is None:
        return AWParams(1, 0)
    try:
        k, l = params
    except (TypeError, ValueError):
        raise InvalidRequestError(
            "params must be AWParams or a (k, l) pair") from None
    return AWParams(int(k), int(l))


# ---------------------------------------------------------------------------
# barrier polynomials


def barrier(params, which):
    """One of the four invariant-set barriers, exactly.

    which selects among Q and A (bounding the spin(+) family along
    lines of constant Z1) and P and B (bounding the spin(-) family
    along rays through the origin).  The result is a RatPoly over
    (Z1, Z2, Z3, Z4) whose coefficients involve the orbit integers
    through k, l, and Delta = k**2 + k*l + l**2 only.
    """
    params = _as_params(params)
    try:
        builder = _BARRIER_BUILDERS[which]
    except KeyError:
        raise InvalidRequestError(
            f"unknown barrier {which!r}, expected one of {BARRIER_KINDS}"
        ) from None
    return builder(params)


def _barrier_variables():
    names = BARRIER_VARIABLES
    return tuple(RatPoly.variable(names, n) for n in names)


def _barrier_q(params):
    z1, z2, z3, z4 = _barrier_variables()
    s = z2 + z3
    c8 = Fraction(params.k + params.l, 8 * params.delta)
    c4 = Fraction(params.k + params.l, 4 * params.delta)
    return (c8 * z4 * s * s - (2 + c4 * z1 * z4) * s
            + c8 * z1 * z1 * z4 - 2 * z1 + 1)


def _barrier_a(params):
    z1, z2, z3, z4 = _barrier_variables()
    s = z2 + z3
    lead = Fraction(1, 32) * Fraction(params.k + params.l, params.delta) ** 2
    return (lead * s ** 4 * z4 * z4 - 2 * s * s - (12 * z1 + 2) * s
            + 2 * z1 * z1 - 2 * z1 + 2)


def _barrier_p(params):
    z1, z2, z3, z4 = _barrier_variables()
    k, l, delta = params.k, params.l, params.delta
    return (1 - 2 * (z1 + z2 + z3)
            - Fraction(k + l, 2 * delta) * z2 * z3 * z4
            + Fraction(l, 2 * delta) * z1 * z3 * z4
            + Fraction(k, 2 * delta) * z1 * z2 * z4)


def _barrier_b(params):
    z1, z2, z3, z4 = _barrier_variables()
    k, l, delta = params.k, params.l, params.delta
    return (2 * (z1 * z1 + z2 * z2 + z3 * z3)
            - 12 * (z2 * z3 + z1 * z2 + z1 * z3)
            + 2 - 2 * (z1 + z2 + z3)
            + Fraction(1, 2) * Fraction(k + l, delta) ** 2
            * z2 ** 2 * z3 ** 2 * z4 ** 2
            + Fraction(1, 2) * Fraction(l, delta) ** 2
            * z1 ** 2 * z3 ** 2 * z4 ** 2
            + Fraction(1, 2) * Fraction(k, delta) ** 2
            * z1 ** 2 * z2 ** 2 * z4 ** 2)


_BARRIER_BUILDERS = {
    "Q": _barrier_q,
    "A": _barrier_a,
    "P": _barrier_p,
    "B": _barrier_b,
}


# ---------------------------------------------------------------------------
# slice families


def line_slices(params=None):
    """The two line restrictions (q1, q2) over (alpha, beta, u).

    The substitution Z1 = alpha, Z2 + Z3 = u, Z4 = 6*Delta*beta/(k+l)
    cancels every orbit-integer factor, so the same pair is returned
    for every parameter choice.  The construction still runs through
    the barrier of the given params (defaulting to (1, 0)) and fails
    loudly if the restriction ever picks up a dependence on how u is
    split between Z2 and Z3.
    """
    params = _as_params(params)
    key = (params.k, params.l)
    if key not in _LINE_CACHE:
        q1 = _restrict_line(barrier(params, "Q"), params)
        q2 = _restrict_line(barrier(params, "A"), params)
        _LINE_CACHE[key] = (q1, q2)
    return _LINE_CACHE[key]


def _restrict_line(poly, params):
    work = ("alpha", "beta", "u", "_s")
    alpha = RatPoly.variable(work, "alpha")
    beta = RatPoly.variable(work, "beta")
    u = RatPoly.variable(work, "u")
    s = RatPoly.variable(work, "_s")
    image = {
        "Z1": alpha,
        "Z2": u - s,
        "Z3": s,
        "Z4": Fraction(6 * params.delta, params.k + params.l) * beta,
    }
    composed = poly.compose(work, image)
    if composed.degree("_s") > 0:
        raise FormulaDiscrepancyError(
            "line restriction depends on the split of Z2 + Z3, "
            "expected a function of the sum alone")
    return composed.drop_variable("_s")


def ray_slices(params):
    """The two ray restrictions (p1, p2) over (alpha, beta, delta, Z1).

    The substitution (Z2, Z3) = (alpha*Z1, beta*Z1) with
    Z4 = (6*Delta/k)*delta leaves polynomials whose coefficients
    depend on the orbit integers only through rho = l/k, so results
    are cached per ratio.
    """
    params = _as_params(params)
    rho = params.rho
    if rho not in _RAY_CACHE:
        names = RAY_SLICE_VARIABLES
        alpha = RatPoly.variable(names, "alpha")
        beta = RatPoly.variable(names, "beta")
        delta = RatPoly.variable(names, "delta")
        z1 = RatPoly.variable(names, "Z1")
        image = {
            "Z1": z1,
            "Z2": alpha * z1,
            "Z3": beta * z1,
            "Z4": Fraction(6 * params.delta, params.k) * delta,
        }
        p1 = barrier(params, "P").compose(names, image)
        p2 = barrier(params, "B").compose(names, image)
        _RAY_CACHE[rho] = (p1, p2)
    return _RAY_CACHE[rho]


def slice(params, which, alpha, beta, delta=None):
    """A univariate slice polynomial at exact parameter values.

    which in {q1, q2} fixes (alpha, beta) and returns a polynomial in
    u = Z2 + Z3; which in {p1, p2} additionally needs delta and
    returns a polynomial in Z1.  Coordinates must be exact rationals
    (Fraction, int, or a num/den string); floats are refused so the
    restriction stays exact.
    """
    alpha = _rat(alpha)
    beta = _rat(beta)
    if which in LINE_SLICE_KINDS:
        if delta is not None:
            raise InvalidRequestError(
                "delta applies only to the ray slices p1 and p2")
        source = line_slices(params)[LINE_SLICE_KINDS.index(which)]
        out = ("u",)
        image = {"alpha": alpha, "beta": beta,
                 "u": RatPoly.variable(out, "u")}
    elif which in RAY_SLICE_KINDS:
        if delta is None:
            raise InvalidRequestError(
                "the ray slices p1 and p2 need a delta value")
        source = ray_slices(params)[RAY_SLICE_KINDS.index(which)]
        out = ("Z1",)
        image = {"alpha": alpha, "beta": beta, "delta": _rat(delta),
                 "Z1": RatPoly.variable(out, "Z1")}
    else:
        raise InvalidRequestError(
            f"unknown slice {which!r}, expected one of "
            f"{LINE_SLICE_KINDS + RAY_SLICE_KINDS}")
    return source.compose(out, image)


# ---------------------------------------------------------------------------
# root functions of the slices


_ROOT_SETUP = {
    # kind: (slice name, root variable, parameter names, search)
    "omega": ("q1", "u", ("alpha", "beta"), "quadratic"),
    "zeta": ("q2", "u", ("alpha", "beta"), "zeta"),
    "xi": ("p1", "Z1", RAY_PARAMETER_VARIABLES, "quadratic"),
    "sigma": ("p2", "Z1", RAY_PARAMETER_VARIABLES, "sigma"),
}


def root_fn(params, which, point):
    """Distinguished root of a slice polynomial, as a float.

    omega and xi are the smaller positive roots of the quadratic
    slices q1 and p1, taken from the exact discriminant.  zeta is the
    smallest non-negative root of q2 on [0, 2/3] and sigma the
    smallest positive root of p2 on (0, 1/2], both isolated by Sturm
    counts and exact bisection to 1e-12.  Returns None when no root
    lies in the window.  A negative discriminant for omega or xi
    raises DomainAnomalyError because two real roots are guaranteed
    on the stated parameter boxes.
    """
    found = _root_exact(params, which, point)
    if found is None:
        return None
    value, _ = found
    return float(value)


def _root_exact(params, which, point):
    """(root value, exactness flag) for root_fn, or None.

    The value is a Fraction or a quadratic-extension number, exact
    whenever the flag is True; otherwise it is a rational bracket
    midpoint within 1e-12 of the root.
    """
    try:
        slice_name, _, names, search = _ROOT_SETUP[which]
    except KeyError:
        raise InvalidRequestError(
            f"unknown root function {which!r}, expected one of "
            f"{ROOT_KINDS}") from None
    point = tuple(_rat(x) for x in point)
    if len(point) != len(names):
        raise InvalidRequestError(
            f"{which} expects {len(names)} coordinates {names}, "
            f"got {len(point)}")
    if slice_name in LINE_SLICE_KINDS:
        poly = slice(params, slice_name, *point)
    else:
        poly = slice(params, slice_name, point[0], point[1],
                     delta=point[2])
    coeffs = poly.univariate_coefficients()
    if search == "quadratic":
        return _smaller_positive_quadratic_root(coeffs, which, point)
    if search == "zeta":
        return smallest_root_in_interval(
            coeffs, ZETA_WINDOW[0], ZETA_WINDOW[1], include_lo=True)
    return smallest_root_in_interval(
        coeffs, SIGMA_WINDOW[0], SIGMA_WINDOW[1], include_lo=False)


def _smaller_positive_quadratic_root(coeffs, which, point):
    """Smaller positive root of a (possibly degenerate) quadratic."""
    while len(coeffs) < 3:
        coeffs = coeffs + [Fraction(0)]
    c0, c1, c2 = coeffs[:3]
    if c2 == 0:
        if c1 == 0:
            return None
        root = -c0 / c1
        return (root, True) if root > 0 else None
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        raise DomainAnomalyError(
            f"negative discriminant {disc} for {which} at {point}; "
            "two real roots are guaranteed on the stated domain")
    radical = exact_sqrt(disc)
    roots = ((-c1 - radical) / (2 * c2), (-c1 + radical) / (2 * c2))
    positive = [r for r in roots if r > 0]
    if not positive:
        return None
    return (min(positive), True)


def implicit_derivatives(params, which, point, order=2):
    """Exact partials of a slice root in its slice parameters.

    The root v solves F(x, v(x)) = 0 with F the symbolic slice
    polynomial, so v_i = -F_i/F_v and the second partials follow from
    one more implicit differentiation.  The returned dict maps sorted
    name tuples to values: the root itself under the empty tuple,
    first partials under one-name tuples, and, for order 2, second
    partials under two-name tuples.  Values are exact whenever the
    root is exactly representable (every rational root and every
    quadratic-slice root); a quartic root that only brackets to 1e-12
    yields partials carrying that same uncertainty.

    Raises DegenerateRootError when F_v vanishes at the point, since
    the root is then not simple and the derivatives do not exist.
    """
    if order not in (1, 2):
        raise InvalidRequestError("order must be 1 or 2")
    slice_name, root_var, names, _ = _ROOT_SETUP[which]
    found = _root_exact(params, which, point)
    if found is None:
        raise InvalidRequestError(
            f"{which} has no root in its window at {point}, "
            "nothing to differentiate")
    root, _ = found
    point = tuple(_rat(x) for x in point)
    if slice_name in LINE_SLICE_KINDS:
        symbolic = line_slices(params)[LINE_SLICE_KINDS.index(slice_name)]
    else:
        symbolic = ray_slices(params)[RAY_SLICE_KINDS.index(slice_name)]
    values = dict(zip(names, point))
    values[root_var] = root

    def at(poly):
        return poly.evaluate(values)

    f_v = symbolic.partial(root_var)
    denom = at(f_v)
    if denom == 0:
        raise DegenerateRootError(
            f"{which} has a non-simple root at {tuple(map(str, point))}; "
            "implicit derivatives are undefined there")
    out = {(): root}
    first = {}
    for name in names:
        first[name] = -at(symbolic.partial(name)) / denom
        out[(name,)] = first[name]
    if order == 2:
        f_vv = at(f_v.partial(root_var))
        for i, ni in enumerate(names):
            f_iv = at(symbolic.partial(ni).partial(root_var))
            for nj in names[i:]:
                f_ij = at(symbolic.partial(ni).partial(nj))
                f_jv = at(symbolic.partial(nj).partial(root_var))
                vi, vj = first[ni], first[nj]
                out[(ni, nj)] = -(f_ij + f_iv * vj + f_jv * vi
                                  + f_vv * vi * vj) / denom
    return out


def root_gap_hessian_det(params, point=(1, 0, 1)):
    """Determinant of the (alpha, beta) Hessian of sigma - xi.

    At the collision corner (alpha, beta, delta) = (1, 0, 1) the two
    ray-slice roots agree, their gradients in (alpha, beta) agree, and
    positivity of this determinant (with a positive diagonal) shows
    the gap grows quadratically away from the corner with delta held
    fixed.  Exact; for the corner itself the value works out to
    (19*k**2 - k*l - l**2) / (300*k**2).
    """
    xi_d = implicit_derivatives(params, "xi", point, order=2)
    sigma_d = implicit_derivatives(params, "sigma", point, order=2)
    h_aa = sigma_d[("alpha", "alpha")] - xi_d[("alpha", "alpha")]
    h_ab = sigma_d[("alpha", "beta")] - xi_d[("alpha", "beta")]
    h_bb = sigma_d[("beta", "beta")] - xi_d[("beta", "beta")]
    return h_aa * h_bb - h_ab * h_ab


# ---------------------------------------------------------------------------
# resultants and their recorded reference expansions


def line_resultant(params=None, cross_check=True):
    """Resultant of (q1, q2) in u, as a RatPoly over (alpha, beta).

    A zero of this polynomial at (alpha, beta) is equivalent to the
    two line slices sharing a root there, which is how root
    interlacing can fail.  cross_check compares the computed
    expansion against the recorded closed form coefficient by
    coefficient and raises FormulaDiscrepancyError on any mismatch.
    """
    q1, q2 = line_slices(params)
    computed = sylvester_resultant(q1, q2, "u")
    computed = computed.with_variables(("alpha", "beta"))
    if cross_check:
        _require_equal(computed, printed_line_resultant(),
                       "line resultant")
    return computed


def printed_line_resultant():
    """The recorded closed form of the line resultant.

    Entered by hand as 27*beta**2 times a bracket polynomial and kept
    independent of the Sylvester pipeline so the two can audit each
    other.
    """
    names = ("alpha", "beta")
    a = RatPoly.variable(names, "alpha")
    b = RatPoly.variable(names, "beta")
    f = Fraction
    bracket = (
        f(243, 16384) * a ** 8 * b ** 6
        + (-f(81, 512) * a ** 7 + f(81, 1024) * a ** 6) * b ** 5
        + (f(81, 256) * a ** 6 - f(189, 256) * a ** 5
           + f(27, 128) * a ** 4) * b ** 4
        + (-f(153, 32) * a ** 5 - f(27, 32) * a ** 4
           + f(27, 16) * a ** 3 - f(9, 32) * a ** 2) * b ** 3
        + (18 * a ** 4 - f(39, 2) * a ** 3 + f(159, 16) * a ** 2
           - f(9, 4) * a + f(3, 16)) * b ** 2
        + (21 * a ** 3 - 15 * a ** 2 + f(17, 4) * a - f(7, 16)) * b
        + 6 * a ** 2 - 2 * a + f(1, 4)
    )
    return 27 * b ** 2 * bracket


# Recorded expansion of the reduced ray resultant in powers of
# rho = l/k: entries are (coefficient, rho power, alpha power,
# beta power, delta power).  Entered by hand, independent of the
# Sylvester pipeline, so the two constructions audit each other.
_RTILDE_RHO_TERMS = (
    (36, 4, 4, 4, 2), (-72, 4, 3, 4, 2), (144, 3, 4, 4, 2),
    (108, 4, 2, 4, 2), (45, 3, 5, 3, 1), (-6, 3, 4, 4, 1),
    (-72, 3, 4, 3, 2), (45, 3, 3, 5, 1), (-216, 3, 3, 4, 2),
    (216, 2, 4, 4, 2), (-72, 4, 1, 4, 2), (-69, 3, 4, 3, 1),
    (60, 3, 3, 4, 1), (144, 3, 3, 3, 2), (-63, 3, 2, 5, 1),
    (216, 3, 2, 4, 2), (135, 2, 5, 3, 1), (-18, 2, 4, 4, 1),
    (-216, 2, 4, 3, 2), (135, 2, 3, 5, 1), (-216, 2, 3, 4, 2),
    (144, 1, 4, 4, 2), (36, 4, 0, 4, 2), (174, 3, 3, 3, 1),
    (-144, 3, 2, 3, 2), (63, 3, 1, 5, 1), (-72, 3, 1, 4, 2),
    (15, 2, 6, 2, 0), (-4, 2, 5, 3, 0), (-63, 2, 5, 2, 1),
    (26, 2, 4, 4, 0), (-78, 2, 4, 3, 1), (108, 2, 4, 2, 2),
    (-4, 2, 3, 5, 0), (51, 2, 3, 4, 1), (288, 2, 3, 3, 2),
    (15, 2, 2, 6, 0), (-126, 2, 2, 5, 1), (108, 2, 2, 4, 2),
    (135, 1, 5, 3, 1), (-18, 1, 4, 4, 1), (-216, 1, 4, 3, 2),
    (135, 1, 3, 5, 1), (-72, 1, 3, 4, 2), (36, 0, 4, 4, 2),
    (-174, 3, 2, 3, 1), (-60, 3, 1, 4, 1), (72, 3, 1, 3, 2),
    (-45, 3, 0, 5, 1), (-10, 2, 5, 2, 0), (28, 2, 4, 3, 0),
    (120, 2, 4, 2, 1), (-48, 2, 3, 4, 0), (216, 2, 3, 3, 1),
    (-144, 2, 3, 2, 2), (36, 2, 2, 5, 0), (120, 2, 2, 4, 1),
    (-144, 2, 2, 3, 2), (-6, 2, 1, 6, 0), (63, 2, 1, 5, 1),
    (30, 1, 6, 2, 0), (-8, 1, 5, 3, 0), (-126, 1, 5, 2, 1),
    (52, 1, 4, 4, 0), (51, 1, 4, 3, 1), (216, 1, 4, 2, 2),
    (-8, 1, 3, 5, 0), (-78, 1, 3, 4, 1), (144, 1, 3, 3, 2),
    (30, 1, 2, 6, 0), (-63, 1, 2, 5, 1), (45, 0, 5, 3, 1),
    (-6, 0, 4, 4, 1), (-72, 0, 4, 3, 2), (45, 0, 3, 5, 1),
    (69, 3, 1, 3, 1), (6, 3, 0, 4, 1), (81, 2, 4, 2, 0),
    (-24, 2, 3, 3, 0), (-306, 2, 3, 2, 1), (44, 2, 2, 4, 0),
    (-306, 2, 2, 3, 1), (108, 2, 2, 2, 2), (36, 2, 1, 5, 0),
    (-129, 2, 1, 4, 1), (15, 2, 0, 6, 0), (-6, 1, 6, 1, 0),
    (26, 1, 5, 2, 0), (63, 1, 5, 1, 1), (-20, 1, 4, 3, 0),
    (120, 1, 4, 2, 1), (-72, 1, 4, 1, 2), (-20, 1, 3, 4, 0),
    (216, 1, 3, 3, 1), (-144, 1, 3, 2, 2), (26, 1, 2, 5, 0),
    (120, 1, 2, 4, 1), (-6, 1, 1, 6, 0), (15, 0, 6, 2, 0),
    (-4, 0, 5, 3, 0), (-63, 0, 5, 2, 1), (26, 0, 4, 4, 0),
    (60, 0, 4, 3, 1), (108, 0, 4, 2, 2), (-4, 0, 3, 5, 0),
    (-69, 0, 3, 4, 1), (15, 0, 2, 6, 0), (-45, 3, 0, 3, 1),
    (-44, 2, 3, 2, 0), (-24, 2, 2, 3, 0), (120, 2, 2, 2, 1),
    (-48, 2, 1, 4, 0), (129, 2, 1, 3, 1), (-4, 2, 0, 5, 0),
    (46, 1, 5, 1, 0), (44, 1, 4, 2, 0), (-129, 1, 4, 1, 1),
    (-4, 1, 3, 3, 0), (-306, 1, 3, 2, 1), (72, 1, 3, 1, 2),
    (44, 1, 2, 4, 0), (-306, 1, 2, 3, 1), (46, 1, 1, 5, 0),
    (-6, 0, 6, 1, 0), (36, 0, 5, 2, 0), (63, 0, 5, 1, 1),
    (-48, 0, 4, 3, 0), (-72, 0, 4, 1, 2), (28, 0, 3, 4, 0),
    (174, 0, 3, 3, 1), (-10, 0, 2, 5, 0), (81, 2, 2, 2, 0),
    (28, 2, 1, 3, 0), (-63, 2, 1, 2, 1), (26, 2, 0, 4, 0),
    (-76, 1, 4, 1, 0), (-44, 1, 3, 2, 0), (129, 1, 3, 1, 1),
    (-44, 1, 2, 3, 0), (120, 1, 2, 2, 1), (-76, 1, 1, 4, 0),
    (15, 0, 6, 0, 0), (36, 0, 5, 1, 0), (-45, 0, 5, 0, 1),
    (44, 0, 4, 2, 0), (-60, 0, 4, 1, 1), (36, 0, 4, 0, 2),
    (-24, 0, 3, 3, 0), (-174, 0, 3, 2, 1), (81, 0, 2, 4, 0),
    (-10, 2, 1, 2, 0), (-4, 2, 0, 3, 0), (76, 1, 3, 1, 0),
    (118, 1, 2, 2, 0), (-63, 1, 2, 1, 1), (76, 1, 1, 3, 0),
    (-4, 0, 5, 0, 0), (-48, 0, 4, 1, 0), (6, 0, 4, 0, 1),
    (-24, 0, 3, 2, 0), (69, 0, 3, 1, 1), (-44, 0, 2, 3, 0),
    (15, 2, 0, 2, 0), (-46, 1, 2, 1, 0), (-46, 1, 1, 2, 0),
    (26, 0, 4, 0, 0), (28, 0, 3, 1, 0), (-45, 0, 3, 0, 1),
    (81, 0, 2, 2, 0), (6, 1, 1, 1, 0), (-4, 0, 3, 0, 0),
    (-10, 0, 2, 1, 0), (15, 0, 2, 0, 0),
)


def printed_ray_expansion(params):
    """The recorded reduced ray resultant at this parameter ratio.

    Collapses the recorded rho-expansion at rho = l/k into a RatPoly
    over (alpha, beta, delta).
    """
    params = _as_params(params)
    rho = params.rho
    terms = {}
    for coeff, e_rho, e_alpha, e_beta, e_delta in _RTILDE_RHO_TERMS:
        key = (e_alpha, e_beta, e_delta)
        terms[key] = terms.get(key, Fraction(0)) + coeff * rho ** e_rho
    return RatPoly(RAY_PARAMETER_VARIABLES, terms)


def rtilde(params, cross_check=True):
    """The reduced ray resultant over (alpha, beta, delta).

    Computes the Sylvester resultant of (p1, p2) in Z1, divides out
    the exact prefactor 36*delta**2, and cross-checks the result
    against the recorded rho-expansion coefficient by coefficient.
    A zero at (alpha, beta, delta) is equivalent to the two ray
    slices sharing a root, so non-negativity with a known zero set
    is what the ray containment argument needs.
    """
    params = _as_params(params)
    p1, p2 = ray_slices(params)
    resultant = sylvester_resultant(p1, p2, "Z1")
    resultant = resultant.with_variables(RAY_PARAMETER_VARIABLES)
    reduced = {}
    offenders = []
    for exps, coeff in resultant.terms.items():
        e_alpha, e_beta, e_delta = exps
        if e_delta < 2:
            offenders.append((exps, coeff, None))
            continue
        reduced[(e_alpha, e_beta, e_delta - 2)] = coeff / 36
    if offenders:
        raise FormulaDiscrepancyError(
            "ray resultant lacks the expected 36*delta**2 prefactor",
            offenders)
    computed = RatPoly(RAY_PARAMETER_VARIABLES, reduced)
    if cross_check:
        _require_equal(computed, printed_ray_expansion(params),
                       f"reduced ray resultant at (k, l) = "
                       f"({params.k}, {params.l})")
    return computed


def _require_equal(computed, recorded, label):
    if computed == recorded:
        return
    keys = set(computed.terms) | set(recorded.terms)
    differences = sorted(
        (key, computed.terms.get(key, Fraction(0)),
         recorded.terms.get(key, Fraction(0)))
        for key in keys
        if computed.terms.get(key, Fraction(0))
        != recorded.terms.get(key, Fraction(0)))
    raise FormulaDiscrepancyError(
        f"{label}: computed expansion differs from the recorded one "
        f"in {len(differences)} monomials", differences)


# ---------------------------------------------------------------------------
# zero bookkeeping and certification drivers


def stated_boundary_zeros(params):
    """Corners of the closed ray box where the reduced resultant
    vanishes, per the recorded zero-locus statement.

    (1, 0, 1) always; (0, 1, 1) joins exactly when k = l.  Returned
    as tuples of Fractions, ready to center exclusion balls on.
    """
    params = _as_params(params)
    zeros = [(Fraction(1), Fraction(0), Fraction(1))]
    if params.k == params.l:
        zeros.append((Fraction(0), Fraction(1), Fraction(1)))
    return tuple(zeros)


def boundary_zero_report(params):
    """Exact values of the reduced ray resultant at the corner
    candidates that different zero-locus conventions mention.

    Evaluates (1, 0, 1), (0, 1, 1), and (1, 1, 0) and reports which
    vanish.  Two conventions circulate for the repeated-parameter
    case, one naming (0, 1, 1) and one naming (1, 1, 0); the report
    records the direct evaluations so callers can see which corner
    actually lies in the zero set, without trying to resolve the
    wording.  When l = 0 every monomial carries a factor alpha**2, so
    the whole alpha = 0 face vanishes identically; certification then
    leans on exact lower bounds of zero rather than exclusion balls,
    and the report notes the face.
    """
    params = _as_params(params)
    poly = rtilde(params)
    candidates = (
        (Fraction(1), Fraction(0), Fraction(1)),
        (Fraction(0), Fraction(1), Fraction(1)),
        (Fraction(1), Fraction(1), Fraction(0)),
    )
    values = {point: poly.evaluate(point) for point in candidates}
    notes = []
    if params.k == params.l:
        first = values[candidates[1]]
        second = values[candidates[2]]
        notes.append(
            "repeated-parameter case: (0, 1, 1) evaluates to "
            f"{first} and (1, 1, 0) to {second}; the stated zero "
            "list uses whichever corner actually vanishes")
    if params.l == 0:
        face = poly.compose(("beta", "delta"), {
            "alpha": Fraction(0),
            "beta": RatPoly.variable(("beta", "delta"), "beta"),
            "delta": RatPoly.variable(("beta", "delta"), "delta"),
        })
        notes.append(
            "l = 0: the alpha = 0 face evaluates to the zero "
            f"polynomial ({face.is_zero}), so zeros there are "
            "non-isolated and are discharged by exact zero lower "
            "bounds instead of exclusion balls")
    return {
        "values": values,
        "stated": stated_boundary_zeros(params),
        "notes": tuple(notes),
    }


def certify_line_resultant(max_depth=DEFAULT_MAX_DEPTH,
                           exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """Certificate that the line resultant is non-negative on the
    closed box [0, 1/2] x [0, 1].

    The lone zero at (alpha, beta) = (0, 1) is excluded by a ball of
    the given radius; local positivity inside the ball is the
    business of the implicit-derivative data, not of subdivision.
    """
    poly = line_resultant()
    ball = Ball((Fraction(0), Fraction(1)), Fraction(exclusion_radius))
    return certify_nonneg(poly, LINE_PARAMETER_DOMAIN,
                          exclusions=(ball,), max_depth=max_depth)


def certify_ray_resultant(params, max_depth=DEFAULT_MAX_DEPTH,
                          exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """Certificate that the reduced ray resultant is non-negative on
    the closed unit cube in (alpha, beta, delta).

    Exclusion balls sit exactly on the stated boundary zeros for the
    given parameters, so the certificate and the zero-locus statement
    are checked against each other: a missing or misplaced ball shows
    up as an Inconclusive or CounterexampleFound verdict.
    """
    params = _as_params(params)
    poly = rtilde(params)
    balls = tuple(Ball(center, Fraction(exclusion_radius))
                  for center in stated_boundary_zeros(params))
    return certify_nonneg(poly, RAY_PARAMETER_DOMAIN,
                          exclusions=balls, max_depth=max_depth)
