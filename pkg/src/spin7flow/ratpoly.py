"""Exact multivariate polynomial arithmetic over the rationals.

This engine backs the positivity-certification layer.  It provides an
immutable polynomial class with Fraction coefficients and a fixed
variable order, Sylvester resultants of polynomials regarded as
univariate in one designated variable, Sturm-sequence isolation of the
real roots of exact univariate polynomials, and a branch-and-bound box
certifier for multivariate non-negativity whose per-box range bounds
come from exact rational Bernstein coefficients.

Every routine here is exact.  Floating point never enters; callers
convert results themselves when they want doubles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm

from .errors import InvalidRequestError

__all__ = [
    "Ball",
    "Box",
    "Certificate",
    "Interval",
    "RatPoly",
    "STATUS_COUNTEREXAMPLE",
    "STATUS_INCONCLUSIVE",
    "STATUS_NONNEGATIVE",
    "certify_nonneg",
    "count_distinct_roots",
    "random_nonnegativity_audit",
    "rational_string",
    "smallest_root_in_interval",
    "sturm_sequence",
    "sylvester_matrix",
    "sylvester_resultant",
    "univariate_gcd",
]

STATUS_NONNEGATIVE = "NonNegative"
STATUS_COUNTEREXAMPLE = "CounterexampleFound"
STATUS_INCONCLUSIVE = "Inconclusive"

DEFAULT_MAX_DEPTH = 40
ROOT_ACCURACY = Fraction(1, 10 ** 12)
SNAP_DENOMINATOR = 10 ** 6


def _coerce(value):
    """Exact scalar coercion.  Floats are refused to keep the ring exact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise InvalidRequestError(
        f"coefficients must be exact rationals, got {type(value).__name__}")


def rational_string(value):
    """Serialize an exact rational as an explicit num/den string."""
    q = _coerce(value)
    return f"{q.numerator}/{q.denominator}"


class RatPoly:
    """A polynomial with Fraction coefficients over named variables.

    Terms are stored as a map from exponent tuples to nonzero Fraction
    coefficients and iterate in graded lexicographic order, highest
    total degree first with ties broken by the exponent tuple in
    descending lexicographic order.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise InvalidRequestError(f"duplicate variable in {variables}")
        width = len(variables)
        cleaned = {}
        for exps, coeff in terms.items():
            exps = tuple(exps)
            if len(exps) != width or any(
                    not isinstance(e, int) or e < 0 for e in exps):
                raise InvalidRequestError(
                    f"bad exponent tuple {exps} for variables {variables}")
            q = _coerce(coeff)
            if q != 0:
                cleaned[exps] = cleaned.get(exps, Fraction(0)) + q
        ordered = sorted(cleaned, key=lambda e: (sum(e), e), reverse=True)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(
            self, "terms",
            {e: cleaned[e] for e in ordered if cleaned[e] != 0})

    # The slots are read-only by convention; block accidental rebinds.
    def __setattr__(self, name, value):
        raise AttributeError("RatPoly is immutable")

    @classmethod
    def zero(cls, variables):
        return cls(variables, {})

    @classmethod
    def constant(cls, variables, value):
        zero_exp = (0,) * len(tuple(variables))
        return cls(variables, {zero_exp: value})

    @classmethod
    def variable(cls, variables, name):
        variables = tuple(variables)
        if name not in variables:
            raise InvalidRequestError(f"{name!r} is not one of {variables}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1})

    @classmethod
    def monomial(cls, variables, exps, coeff):
        return cls(variables, {tuple(exps): coeff})

    @property
    def is_zero(self):
        return not self.terms

    def ordered_terms(self):
        return tuple(self.terms.items())

    def _check_same_variables(self, other):
        if self.variables != other.variables:
            raise InvalidRequestError(
                f"variable mismatch: {self.variables} versus "
                f"{other.variables}")

    def __add__(self, other):
        if not isinstance(other, RatPoly):
            other = RatPoly.constant(self.variables, other)
        self._check_same_variables(other)
        merged = dict(self.terms)
        for exps, coeff in other.terms.items():
            merged[exps] = merged.get(exps, Fraction(0)) + coeff
        return RatPoly(self.variables, merged)

    __radd__ = __add__

    def __neg__(self):
        return RatPoly(self.variables,
                       {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, RatPoly)
                       else -_coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RatPoly):
            q = _coerce(other)
            return RatPoly(self.variables,
                           {e: c * q for e, c in self.terms.items()})
        self._check_same_variables(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return RatPoly(self.variables, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = _coerce(other)
        if q == 0:
            raise ZeroDivisionError("division of a polynomial by zero")
        return RatPoly(self.variables,
                       {e: c / q for e, c in self.terms.items()})

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise InvalidRequestError("polynomial powers are naturals")
        result = RatPoly.constant(self.variables, 1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, RatPoly):
            if self.degree() > 0:
                return False
            value = self.terms.get((0,) * len(self.variables), Fraction(0))
            try:
                return value == _coerce(other)
            except InvalidRequestError:
                return NotImplemented
        return (self.variables == other.variables
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.variables, tuple(self.terms.items())))

    def degree(self, name=None):
        """Total degree, or the degree in one variable.  Zero gives -1."""
        if self.is_zero:
            return -1
        if name is None:
            return max(sum(e) for e in self.terms)
        idx = self._index(name)
        return max(e[idx] for e in self.terms)

    def _index(self, name):
        try:
            return self.variables.index(name)
        except ValueError:
            raise InvalidRequestError(
                f"{name!r} is not one of {self.variables}") from None

    def partial(self, name):
        """Exact partial derivative."""
        idx = self._index(name)
        out = {}
        for exps, coeff in self.terms.items():
            if exps[idx] == 0:
                continue
            key = tuple(e - 1 if i == idx else e
                        for i, e in enumerate(exps))
            out[key] = out.get(key, Fraction(0)) + coeff * exps[idx]
        return RatPoly(self.variables, out)

    def evaluate(self, values):
        """Exact evaluation.  Accepts a mapping by name or a sequence.

        Point entries may be any exact scalar that supports ring
        arithmetic with Fractions, so quadratic-extension numbers work.
        """
        if isinstance(values, dict):
            try:
                point = [values[v] for v in self.variables]
            except KeyError as missing:
                raise InvalidRequestError(
                    f"no value for variable {missing}") from None
        else:
            point = list(values)
            if len(point) != len(self.variables):
                raise InvalidRequestError(
                    f"expected {len(self.variables)} coordinates, "
                    f"got {len(point)}")
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for x, e in zip(point, exps):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    def compose(self, variables_out, mapping):
        """Substitute every variable by a polynomial or exact scalar.

        mapping sends each of this polynomial's variable names to
        either a RatPoly over variables_out or an exact rational.
        """
        variables_out = tuple(variables_out)
        images = []
        for name in self.variables:
            image = mapping[name]
            if not isinstance(image, RatPoly):
                image = RatPoly.constant(variables_out, image)
            elif image.variables != variables_out:
                raise InvalidRequestError(
                    f"image of {name!r} uses {image.variables}, "
                    f"expected {variables_out}")
            images.append(image)
        power_cache = [{0: RatPoly.constant(variables_out, 1)}
                       for _ in images]
        result = RatPoly.zero(variables_out)
        for exps, coeff in self.terms.items():
            term = RatPoly.constant(variables_out, coeff)
            for i, e in enumerate(exps):
                cache = power_cache[i]
                if e not in cache:
                    highest = max(cache)
                    acc = cache[highest]
                    for step in range(highest + 1, e + 1):
                        acc = acc * images[i]
                        cache[step] = acc
                term = term * cache[e]
            result = result + term
        return result

    def coefficient_of(self, name, power):
        """The coefficient of name**power, as a polynomial with the
        same variable list and exponent zero in that slot."""
        idx = self._index(name)
        out = {}
        for exps, coeff in self.terms.items():
            if exps[idx] == power:
                key = tuple(0 if i == idx else e
                            for i, e in enumerate(exps))
                out[key] = coeff
        return RatPoly(self.variables, out)

    def drop_variable(self, name):
        """Remove an unused variable from the variable list."""
        idx = self._index(name)
        if self.degree(name) > 0:
            raise InvalidRequestError(
                f"{name!r} still occurs with positive degree")
        rest = tuple(v for v in self.variables if v != name)
        out = {tuple(e for i, e in enumerate(exps) if i != idx): coeff
               for exps, coeff in self.terms.items()}
        return RatPoly(rest, out)

    def with_variables(self, variables_out):
        """Reorder or extend the variable list by name."""
        variables_out = tuple(variables_out)
        mapping = {}
        for name in self.variables:
            if name not in variables_out and self.degree(name) > 0:
                raise InvalidRequestError(
                    f"{name!r} is used but absent from {variables_out}")
            mapping[name] = (RatPoly.variable(variables_out, name)
                            if name in variables_out else Fraction(0))
        return self.compose(variables_out, mapping)

    def univariate_coefficients(self, name=None):
        """Ascending coefficient list of an effectively univariate
        polynomial."""
        if name is None:
            live = [v for v in self.variables if self.degree(v) > 0]
            if len(live) > 1:
                raise InvalidRequestError(
                    f"polynomial is multivariate in {live}")
            name = live[0] if live else self.variables[0] \
                if self.variables else None
            if name is None:
                raise InvalidRequestError("no variables to collect on")
        idx = self._index(name)
        degree = max((e[idx] for e in self.terms), default=0)
        coeffs = [Fraction(0)] * (degree + 1)
        for exps, coeff in self.terms.items():
            if any(e and i != idx for i, e in enumerate(exps)):
                raise InvalidRequestError(
                    "polynomial is not univariate in " + repr(name))
            coeffs[exps[idx]] += coeff
        return coeffs

    def __repr__(self):
        return f"RatPoly({self.variables!r}, {self!s})"

    def __str__(self):
        if self.is_zero:
            return "0"
        chunks = []
        for exps, coeff in self.terms.items():
            factors = []
            for name, e in zip(self.variables, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            body = "*".join(factors)
            mag = abs(coeff)
            if body and mag == 1:
                piece = body
            elif body:
                piece = f"{mag}*{body}"
            else:
                piece = str(mag)
            sign = "-" if coeff < 0 else "+"
            chunks.append((sign, piece))
        first_sign, first_piece = chunks[0]
        text = ("-" if first_sign == "-" else "") + first_piece
        for sign, piece in chunks[1:]:
            text += f" {sign} {piece}"
        return text


# ---------------------------------------------------------------------------
# Sylvester resultants
# ---------------------------------------------------------------------------

def sylvester_matrix(f, g, var):
    """The Sylvester matrix of f and g regarded as univariate in var.

    Rows hold the descending coefficient sequences, f shifted through
    deg(g) rows and g through deg(f) rows.  Degrees are the exact
    degrees in var of the stored terms, so coefficient polynomials that
    merely vanish at special parameter values do not shrink the matrix.
    """
    if not isinstance(f, RatPoly) or not isinstance(g, RatPoly):
        raise InvalidRequestError("sylvester_matrix expects RatPoly inputs")
    f._check_same_variables(g)
    m = f.degree(var)
    n = g.degree(var)
    if m < 1 or n < 1:
        raise InvalidRequestError(
            f"both inputs need degree >= 1 in {var!r}, got {m} and {n}")
    fc = [f.coefficient_of(var, m - i) for i in range(m + 1)]
    gc = [g.coefficient_of(var, n - i) for i in range(n + 1)]
    size = m + n
    zero = RatPoly.zero(f.variables)
    matrix = []
    for shift in range(n):
        row = [zero] * size
        for j, entry in enumerate(fc):
            row[shift + j] = entry
        matrix.append(row)
    for shift in range(m):
        row = [zero] * size
        for j, entry in enumerate(gc):
            row[shift + j] = entry
        matrix.append(row)
    return matrix


def _poly_determinant(matrix):
    """Exact determinant by column expansion with minor memoization."""
    size = len(matrix)
    if size == 0:
        raise InvalidRequestError("empty matrix")
    variables = matrix[0][0].variables
    memo = {}

    def minor(col, row_mask):
        if col == size:
            return RatPoly.constant(variables, 1)
        key = (col, row_mask)
        cached = memo.get(key)
        if cached is not None:
            return cached
        total = RatPoly.zero(variables)
        parity = 0
        for row in range(size):
            bit = 1 << row
            if row_mask & bit:
                continue
            entry = matrix[row][col]
            if not entry.is_zero:
                sub = minor(col + 1, row_mask | bit)
                contribution = entry * sub
                if parity & 1:
                    contribution = -contribution
                total = total + contribution
            parity += 1
        memo[key] = total
        return total

    return minor(0, 0)


def sylvester_resultant(f, g, var=None):
    """Resultant of f and g in var, as a polynomial in the remaining
    variables.  var may be omitted only when the two polynomials are
    jointly live in a single variable name."""
    if var is None:
        live = sorted({v for v in f.variables if f.degree(v) > 0}
                      | {v for v in g.variables if g.degree(v) > 0})
        if len(live) != 1:
            raise InvalidRequestError(
                "ambiguous elimination variable; pass var explicitly")
        var = live[0]
    det = _poly_determinant(sylvester_matrix(f, g, var))
    return det.drop_variable(var)


# ---------------------------------------------------------------------------
# Univariate real-root machinery
# ---------------------------------------------------------------------------

def _strip(coeffs):
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return out


def _horner(coeffs, x):
    total = Fraction(0)
    for c in reversed(coeffs):
        total = total * x + c
    return total


def _poly_divmod(num, den):
    num = list(num)
    den = _strip(den)
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quotient = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(num) - len(den), -1, -1):
        factor = num[i + len(den) - 1] / lead
        quotient[i] = factor
        if factor:
            for j, d in enumerate(den):
                num[i + j] -= factor * d
    return quotient, _strip(num)


def univariate_gcd(a, b):
    """Monic greatest common divisor of two exact coefficient lists."""
    a, b = _strip(a), _strip(b)
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def _derivative(coeffs):
    return [c * i for i, c in enumerate(coeffs)][1:]


def _squarefree(coeffs):
    coeffs = _strip(coeffs)
    if len(coeffs) <= 2:
        return coeffs
    g = univariate_gcd(coeffs, _derivative(coeffs))
    if len(g) <= 1:
        return coeffs
    quotient, remainder = _poly_divmod(coeffs, g)
    if remainder:
        raise ArithmeticError("squarefree division left a remainder")
    return _strip(quotient)


def sturm_sequence(coeffs):
    """Sturm sequence of a squarefree exact polynomial."""
    p0 = _strip(coeffs)
    if len(p0) <= 1:
        return [p0] if p0 else []
    seq = [p0, _derivative(p0)]
    while len(seq[-1]) > 1:
        _, rem = _poly_divmod(seq[-2], seq[-1])
        if not rem:
            break
        seq.append([-c for c in rem])
    return seq


def _sign_changes(seq, x):
    previous = 0
    changes = 0
    for coeffs in seq:
        value = _horner(coeffs, x)
        sign = (value > 0) - (value < 0)
        if sign == 0:
            continue
        if previous and sign != previous:
            changes += 1
        previous = sign
    return changes


def count_distinct_roots(sequence, lo, hi):
    """Distinct real roots in the open interval (lo, hi).

    The first sequence entry must not vanish at either endpoint.
    """
    lo, hi = _coerce(lo), _coerce(hi)
    if not sequence:
        return 0
    if _horner(sequence[0], lo) == 0 or _horner(sequence[0], hi) == 0:
        raise InvalidRequestError(
            "Sturm counting needs nonvanishing endpoints")
    return _sign_changes(sequence, lo) - _sign_changes(sequence, hi)


def _deflate(coeffs, root):
    """Exact synthetic division by (x - root)."""
    quotient, remainder = _poly_divmod(coeffs, [-root, Fraction(1)])
    if remainder:
        raise ArithmeticError(f"{root} is not a root; deflation failed")
    return _strip(quotient)


def _convergents(value, max_denominator):
    """Continued-fraction convergents of an exact rational."""
    out = []
    frac = Fraction(value)
    h0, h1 = 1, 0
    k0, k1 = 0, 1
    n, d = frac.numerator, frac.denominator
    while d:
        a = n // d
        n, d = d, n - a * d
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        if k0 > max_denominator:
            break
        out.append(Fraction(h0, k0))
    return out


def smallest_root_in_interval(coeffs, lo, hi, include_lo=False,
                              accuracy=ROOT_ACCURACY,
                              snap_denominator=SNAP_DENOMINATOR):
    """Leftmost real root of an exact univariate polynomial on an
    interval, or None.

    The search covers (lo, hi], and [lo, hi] when include_lo is set.
    Returns a pair (root, exact).  When exact is True the root is a
    proven rational zero; otherwise it is the midpoint of a bracket no
    wider than accuracy.  Rational candidates with denominator up to
    snap_denominator are tested exactly before settling for a bracket.
    """
    lo, hi = _coerce(lo), _coerce(hi)
    if hi <= lo:
        raise InvalidRequestError("need lo < hi for root isolation")
    poly = _strip(coeffs)
    if not poly:
        raise InvalidRequestError(
            "the zero polynomial has no isolated roots")
    if len(poly) == 1:
        return None
    poly = _squarefree(poly)
    if include_lo and _horner(poly, lo) == 0:
        return lo, True
    while _horner(poly, lo) == 0:
        poly = _deflate(poly, lo)
        if len(poly) <= 1:
            return None
    fallback = None
    if _horner(poly, hi) == 0:
        fallback = hi
        poly = _deflate(poly, hi)
        if len(poly) <= 1:
            return (fallback, True)
    sequence = sturm_sequence(poly)
    if count_distinct_roots(sequence, lo, hi) == 0:
        return (fallback, True) if fallback is not None else None
    a, b = lo, hi
    while b - a > accuracy:
        mid = (a + b) / 2
        if _horner(poly, mid) == 0:
            quotient = _deflate(poly, mid)
            if len(quotient) <= 1:
                return mid, True
            inner = sturm_sequence(quotient)
            if count_distinct_roots(inner, a, mid) == 0:
                return mid, True
            poly, sequence, b = quotient, inner, mid
            continue
        if count_distinct_roots(sequence, a, mid) >= 1:
            b = mid
        else:
            a = mid
    for candidate in _convergents((a + b) / 2, snap_denominator):
        if a < candidate <= b and _horner(poly, candidate) == 0:
            return candidate, True
    return (a + b) / 2, False


# ---------------------------------------------------------------------------
# Boxes, balls, and certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A rational interval with optional open-endpoint flags.

    The flags record statements like (0, 1]; the certifier itself
    always works with the closure, which is the stronger claim.
    """

    lower: Fraction
    upper: Fraction
    lower_open: bool = False
    upper_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lower", _coerce(self.lower))
        object.__setattr__(self, "upper", _coerce(self.upper))
        if self.lower > self.upper:
            raise InvalidRequestError(
                f"interval bounds out of order: {self.lower} > {self.upper}")

    @property
    def width(self):
        return self.upper - self.lower

    def __str__(self):
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        return f"{left}{self.lower}, {self.upper}{right}"


@dataclass(frozen=True)
class Box:
    """An axis-aligned product of rational intervals."""

    intervals: tuple

    def __post_init__(self):
        fixed = tuple(
            iv if isinstance(iv, Interval) else Interval(*iv)
            for iv in self.intervals)
        object.__setattr__(self, "intervals", fixed)

    @classmethod
    def from_bounds(cls, bounds):
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @classmethod
    def unit(cls, dimension):
        return cls.from_bounds([(0, 1)] * dimension)

    @property
    def dimension(self):
        return len(self.intervals)

    @property
    def widths(self):
        return tuple(iv.width for iv in self.intervals)

    def midpoint(self):
        return tuple((iv.lower + iv.upper) / 2 for iv in self.intervals)

    def corners(self):
        points = [()]
        for iv in self.intervals:
            points = [p + (endpoint,) for p in points
                      for endpoint in (iv.lower, iv.upper)]
        return tuple(points)

    def __str__(self):
        return " x ".join(str(iv) for iv in self.intervals)


@dataclass(frozen=True)
class Ball:
    """A closed Euclidean ball with rational center and radius."""

    center: tuple
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(
            self, "center", tuple(_coerce(c) for c in self.center))
        object.__setattr__(self, "radius", _coerce(self.radius))
        if self.radius < 0:
            raise InvalidRequestError("ball radius must be nonnegative")

    def contains_point(self, point):
        gap = sum((Fraction(p) - c) ** 2
                  for p, c in zip(point, self.center))
        return gap <= self.radius ** 2

    def contains_box(self, box):
        if box.dimension != len(self.center):
            raise InvalidRequestError("ball and box dimensions differ")
        return all(self.contains_point(corner) for corner in box.corners())

    def to_json_dict(self):
        return {"center": [rational_string(c) for c in self.center],
                "radius": rational_string(self.radius)}


@dataclass
class Certificate:
    """Outcome of a branch-and-bound non-negativity run.

    status is one of the STATUS_* strings.  max_depth records the
    deepest subdivision level that was actually examined.  For a
    counterexample the point and its exact negative value are kept; for
    an inconclusive run the box with the worst surviving lower bound is
    kept instead.
    """

    status: str
    exclusion_balls: tuple
    boxes_processed: int
    max_depth: int
    counterexample: tuple = None
    worst_box: Box = None
    worst_bound: Fraction = None

    def to_json_dict(self):
        payload = {
            "status": self.status,
            "exclusions": [ball.to_json_dict()
                           for ball in self.exclusion_balls],
            "boxes_processed": self.boxes_processed,
            "max_depth_reached": self.max_depth,
        }
        if self.counterexample is not None:
            point, value = self.counterexample
            payload["counterexample"] = {
                "point": [rational_string(c) for c in point],
                "value": rational_string(value),
            }
        return payload


# ---------------------------------------------------------------------------
# Bernstein range bounds
# ---------------------------------------------------------------------------

def _dense_coefficients(poly):
    """Dense power-basis coefficient tensor with per-axis degrees."""
    dims = tuple(max(poly.degree(v), 0) + 1 for v in poly.variables)
    strides = []
    acc = 1
    for size in reversed(dims):
        strides.append(acc)
        acc *= size
    strides = tuple(reversed(strides))
    flat = [Fraction(0)] * acc
    for exps, coeff in poly.terms.items():
        index = sum(e * s for e, s in zip(exps, strides))
        flat[index] = coeff
    return flat, dims, strides


def _axis_transform(flat, dims, strides, axis, table):
    """Apply a lower-triangular table along one tensor axis."""
    size = dims[axis]
    stride = strides[axis]
    total = len(flat)
    out = list(flat)
    block = stride * size
    for base in range(0, total, block):
        for offset in range(stride):
            start = base + offset
            fiber = [flat[start + i * stride] for i in range(size)]
            for i in range(size):
                acc = Fraction(0)
                for j in range(i + 1):
                    factor = table[i][j]
                    if factor:
                        acc += factor * fiber[j]
                out[start + i * stride] = acc
    return out


def _bernstein_tensor(poly):
    """Bernstein coefficients of a polynomial over the unit cube."""
    flat, dims, strides = _dense_coefficients(poly)
    for axis, size in enumerate(dims):
        d = size - 1
        table = [[Fraction(comb(i, j), comb(d, j)) if j <= i else None
                  for j in range(size)] for i in range(size)]
        flat = _axis_transform(flat, dims, strides, axis, table)
    return flat, dims, strides


def _split_axis(nums, dims, strides, axis):
    """Integer de Casteljau halves along one axis.

    Input numerators carry an implicit scale; both outputs come back
    multiplied by 2**degree, so the caller adds degree to the scale
    exponent.
    """
    size = dims[axis]
    d = size - 1
    stride = strides[axis]
    total = len(nums)
    left = [0] * total
    right = [0] * total
    block = stride * size
    for base in range(0, total, block):
        for offset in range(stride):
            start = base + offset
            cur = [nums[start + i * stride] for i in range(size)]
            left[start] = cur[0] << d
            right[start + d * stride] = cur[d] << d
            for level in range(1, size):
                for i in range(size - level):
                    cur[i] = cur[i] + cur[i + 1]
                left[start + level * stride] = cur[0] << (d - level)
                right[start + (d - level) * stride] = \
                    cur[d - level] << (d - level)
    return left, right


def _corner_indices(dims, strides):
    corners = [0]
    for size, stride in zip(dims, strides):
        top = (size - 1) * stride
        corners = [c + extra for c in corners for extra in (0, top)]
    return tuple(corners)


def certify_nonneg(poly, box, exclusions=(), max_depth=DEFAULT_MAX_DEPTH):
    """Branch-and-bound certificate that poly >= 0 on a closed box.

    Each box's range is enclosed by its exact rational Bernstein
    coefficients.  A box is discharged when its Bernstein lower bound
    is nonnegative or when it lies inside an exclusion ball.  A corner
    coefficient is the exact value at that corner, so a negative corner
    outside the exclusion balls is returned as a counterexample at an
    exact rational point.  Subdivision bisects the widest axis; boxes
    still alive at max_depth make the outcome Inconclusive and the one
    with the worst bound is reported.
    """
    if not isinstance(poly, RatPoly):
        raise InvalidRequestError("certify_nonneg expects a RatPoly")
    if not isinstance(box, Box):
        box = Box.from_bounds(box)
    dimension = len(poly.variables)
    if box.dimension != dimension:
        raise InvalidRequestError(
            f"box dimension {box.dimension} does not match "
            f"{dimension} variables")
    if any(iv.width == 0 for iv in box.intervals):
        raise InvalidRequestError(
            "degenerate box edges are not supported; evaluate instead")
    balls = tuple(exclusions)
    for ball in balls:
        if len(ball.center) != dimension:
            raise InvalidRequestError("exclusion ball dimension mismatch")
    lowers = [iv.lower for iv in box.intervals]
    widths = [iv.width for iv in box.intervals]
    if dimension == 0 or poly.is_zero:
        value = poly.evaluate([0] * dimension) if dimension else \
            poly.evaluate([])
        status = STATUS_NONNEGATIVE if value >= 0 else STATUS_COUNTEREXAMPLE
        counter = None if value >= 0 else ((), value)
        return Certificate(status, balls, 1, 0, counterexample=counter)

    unit = tuple(f"u{i}" for i in range(dimension))
    mapping = {
        name: RatPoly.constant(unit, lowers[i])
        + widths[i] * RatPoly.variable(unit, unit[i])
        for i, name in enumerate(poly.variables)
    }
    cube_poly = poly.compose(unit, mapping)
    bern, dims, strides = _bernstein_tensor(cube_poly)
    denominator = lcm(*[c.denominator for c in bern]) if bern else 1
    nums = tuple(int(c * denominator) for c in bern)
    corner_cells = _corner_indices(dims, strides)
    degrees = tuple(size - 1 for size in dims)

    def real_bounds(cells):
        bounds = []
        for i, (offset, level) in enumerate(cells):
            lo = lowers[i] + widths[i] * Fraction(offset, 1 << level)
            hi = lowers[i] + widths[i] * Fraction(offset + 1, 1 << level)
            bounds.append((lo, hi))
        return bounds

    def cell_has_top(cell, axis):
        return (cell // strides[axis]) % dims[axis] == degrees[axis]

    root_cells = tuple((0, 0) for _ in range(dimension))
    stack = [(nums, 0, root_cells, 0)]
    boxes_processed = 0
    deepest = 0
    worst_bound = None
    worst_cells = None
    inconclusive = False

    while stack:
        cell_nums, shift, cells, depth = stack.pop()
        boxes_processed += 1
        deepest = max(deepest, depth)
        low = min(cell_nums)
        if low >= 0:
            continue
        bounds = real_bounds(cells)
        sub_box = Box.from_bounds(bounds)
        if any(ball.contains_box(sub_box) for ball in balls):
            continue
        scale = denominator << shift
        for cell in corner_cells:
            if cell_nums[cell] < 0:
                point = []
                for i, (offset, level) in enumerate(cells):
                    tick = offset + (1 if cell_has_top(cell, i) else 0)
                    point.append(
                        lowers[i] + widths[i] * Fraction(tick, 1 << level))
                point = tuple(point)
                if any(ball.contains_point(point) for ball in balls):
                    continue
                value = Fraction(cell_nums[cell], scale)
                return Certificate(
                    STATUS_COUNTEREXAMPLE, balls, boxes_processed,
                    deepest, counterexample=(point, value))
        if depth >= max_depth:
            inconclusive = True
            bound = Fraction(low, scale)
            if worst_bound is None or bound < worst_bound:
                worst_bound = bound
                worst_cells = cells
            continue
        axis = min(range(dimension), key=lambda i: (cells[i][1], i))
        left, right = _split_axis(cell_nums, dims, strides, axis)
        offset, level = cells[axis]
        left_cells = tuple(
            (2 * offset, level + 1) if i == axis else c
            for i, c in enumerate(cells))
        right_cells = tuple(
            (2 * offset + 1, level + 1) if i == axis else c
            for i, c in enumerate(cells))
        new_shift = shift + degrees[axis]
        stack.append((tuple(right), new_shift, right_cells, depth + 1))
        stack.append((tuple(left), new_shift, left_cells, depth + 1))

    if inconclusive:
        return Certificate(
            STATUS_INCONCLUSIVE, balls, boxes_processed, deepest,
            worst_box=Box.from_bounds(real_bounds(worst_cells)),
            worst_bound=worst_bound)
    return Certificate(STATUS_NONNEGATIVE, balls, boxes_processed, deepest)


def _is_dyadic(q):
    return q.denominator & (q.denominator - 1) == 0


def random_nonnegativity_audit(poly, box, samples, seed):
    """Exact spot check of a certified box.

    Draws dyadic random points inside the closed box, evaluates the
    polynomial exactly at each, and returns the worst pair
    (value, point) encountered.  Boxes with dyadic endpoints take an
    all-integer evaluation path, which keeps large sample counts cheap.
    """
    if not isinstance(box, Box):
        box = Box.from_bounds(box)
    rng = random.Random(seed)
    bits = 16
    scale = 1 << bits
    worst_value = None
    worst_point = None
    lowers = [iv.lower for iv in box.intervals]
    widths = [iv.width for iv in box.intervals]
    dyadic = all(_is_dyadic(lo) and _is_dyadic(w)
                 for lo, w in zip(lowers, widths))
    if dyadic and not poly.is_zero:
        shift = max(
            bits + max(lo.denominator.bit_length(),
                       w.denominator.bit_length())
            for lo, w in zip(lowers, widths))
        unit = 1 << shift
        clear = lcm(*[c.denominator for c in poly.terms.values()])
        int_terms = [(int(c * clear), exps)
                     for exps, c in poly.terms.items()]
        max_deg = [max(poly.degree(v), 0) for v in poly.variables]
        worst_num = None
        worst_coords = None
        for _ in range(samples):
            coords = [
                int(unit * lo) + (unit * w // scale)
                * rng.randrange(scale + 1)
                for lo, w in zip(lowers, widths)]
            numerator = 0
            for coeff, exps in int_terms:
                term = coeff
                for x, e, m in zip(coords, exps, max_deg):
                    term *= x ** e << (shift * (m - e))
                numerator += term
            if worst_num is None or numerator < worst_num:
                worst_num = numerator
                worst_coords = coords
        worst_value = Fraction(
            worst_num, clear * (1 << (shift * sum(max_deg))))
        worst_point = tuple(Fraction(c, unit) for c in worst_coords)
        return worst_value, worst_point
    for _ in range(samples):
        point = tuple(
            lo + w * Fraction(rng.randrange(scale + 1), scale)
            for lo, w in zip(lowers, widths))
        value = poly.evaluate(point)
        if worst_value is None or value < worst_value:
            worst_value = value
            worst_point = point
    return worst_value, worst_point
