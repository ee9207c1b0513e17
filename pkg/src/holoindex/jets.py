"""Sparse truncated power series (jets) and self-map germs of C^n.

A jet is a polynomial in ``n`` complex variables in which every monomial of
total degree above the truncation degree ``d`` has been discarded.  A map
germ is an n-tuple of jets with vanishing constant terms, viewed as a
holomorphic self-map of a neighbourhood of the origin.  Because every germ
here fixes the origin, composition is well defined degree-by-degree: the
coefficients of ``g(f(x))`` through degree ``d`` depend only on the
coefficients of ``g`` and ``f`` through degree ``d``, so truncated
composition agrees with analytic composition through the truncation.

Coefficients are double-precision complex numbers.  After every arithmetic
operation, coefficients of magnitude at most ``DROP_TOL`` are removed; with
exact integer or root-of-unity inputs this keeps jets sparse and prevents
rounding dust from accumulating under repeated composition.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import DegenerateComponentError, ShapeMismatchError

# Coefficients at or below this magnitude are treated as exact zeros.
DROP_TOL = 1e-12

Multidegree = tuple  # exponent tuple, one nonnegative integer per variable


def _validate_exponents(exponents, dim):
    if len(exponents) != dim:
        raise ShapeMismatchError(
            f"multidegree {exponents} has length {len(exponents)}, expected {dim}"
        )
    if any((not isinstance(e, (int, np.integer))) or e < 0 for e in exponents):
        raise ShapeMismatchError(f"multidegree {exponents} must be nonnegative integers")


class Jet:
    """One sparse truncated polynomial.

    ``terms`` maps exponent tuples to nonzero complex coefficients; every
    stored multidegree has total degree at most ``degree`` and length
    ``dim``.  Instances are immutable: all operations return new jets.
    """

    __slots__ = ("dim", "degree", "terms")

    def __init__(self, dim, degree, terms=None):
        if dim < 1:
            raise ShapeMismatchError("jet dimension must be >= 1")
        if degree < 0:
            raise ShapeMismatchError("truncation degree must be >= 0")
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "degree", int(degree))
        cleaned = {}
        if terms:
            for exponents, coeff in terms.items():
                exponents = tuple(int(e) for e in exponents)
                _validate_exponents(exponents, dim)
                if sum(exponents) > degree:
                    continue  # truncated away
                c = complex(coeff)
                if abs(c) > DROP_TOL:
                    cleaned[exponents] = c
        object.__setattr__(self, "terms", cleaned)

    def __setattr__(self, name, value):
        raise AttributeError("Jet instances are immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim, degree):
        return cls(dim, degree, {})

    @classmethod
    def constant(cls, value, dim, degree):
        return cls(dim, degree, {(0,) * dim: value})

    @classmethod
    def variable(cls, index, dim, degree):
        """The coordinate function x_index (0-based)."""
        if not 0 <= index < dim:
            raise ShapeMismatchError(f"variable index {index} out of range for dim {dim}")
        exponents = tuple(1 if i == index else 0 for i in range(dim))
        return cls(dim, degree, {exponents: 1.0})

    @classmethod
    def monomial(cls, coeff, exponents, degree):
        exponents = tuple(int(e) for e in exponents)
        return cls(len(exponents), degree, {exponents: coeff})

    # -- structure --------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def valuation(self):
        """Minimal total degree of a stored monomial, or None for the zero jet."""
        if not self.terms:
            return None
        return min(sum(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.dim, 0.0 + 0.0j)

    def linear_coefficients(self):
        """Degree-1 coefficients as a length-dim complex vector."""
        out = np.zeros(self.dim, dtype=complex)
        for i in range(self.dim):
            exponents = tuple(1 if k == i else 0 for k in range(self.dim))
            out[i] = self.terms.get(exponents, 0.0)
        return out

    def homogeneous_part(self, total):
        return Jet(self.dim, self.degree,
                   {e: c for e, c in self.terms.items() if sum(e) == total})

    def sorted_terms(self):
        """Terms in lexicographic exponent order, for reproducible output."""
        return sorted(self.terms.items(), key=lambda item: item[0])

    def with_degree(self, degree):
        """Reinterpret at another truncation degree.

        Lowering discards high-order terms.  Raising is lossless on the
        stored polynomial but does not recover analytically truncated
        terms; callers use it when the jet is known to be an exact
        polynomial.
        """
        return Jet(self.dim, degree, self.terms)

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other):
        if self.dim != other.dim or self.degree != other.degree:
            raise ShapeMismatchError(
                f"jet mismatch: dim {self.dim} deg {self.degree} vs "
                f"dim {other.dim} deg {other.degree}"
            )

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Jet.constant(other, self.dim, self.degree)
        self._check_compatible(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Jet(self.dim, self.degree, terms)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.degree, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Jet.constant(other, self.dim, self.degree)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Jet(self.dim, self.degree,
                       {e: c * other for e, c in self.terms.items()})
        self._check_compatible(other)
        degree = self.degree
        terms = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > degree:
                    continue
                key = tuple(a + b for a, b in zip(e1, e2))
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return Jet(self.dim, self.degree, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ShapeMismatchError("jet powers must be nonnegative integers")
        result = Jet.constant(1.0, self.dim, self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shifted(self, point):
        """The exact Taylor shift: the polynomial x -> self(point + x).

        Expands each monomial by binomial products; total degree is
        preserved, so the shift of a polynomial jet is exact.
        """
        point = np.asarray(point, dtype=complex)
        if point.shape != (self.dim,):
            raise ShapeMismatchError("shift point has wrong dimension")
        result = {}
        for e, c in self.terms.items():
            # Expand prod_i (p_i + x_i)^{e_i} term by term.
            partial = {(0,) * self.dim: c}
            for i, k in enumerate(e):
                if k == 0:
                    continue
                new = {}
                for j in range(k + 1):
                    w = comb(k, j) * point[i] ** (k - j)
                    if w == 0:
                        continue
                    for key, val in partial.items():
                        nk = tuple(v + (j if t == i else 0)
                                   for t, v in enumerate(key))
                        new[nk] = new.get(nk, 0.0) + val * w
                partial = new
            for key, val in partial.items():
                result[key] = result.get(key, 0.0) + val
        return Jet(self.dim, self.degree, result)

    def derivative(self, index):
        """Partial derivative with respect to variable ``index``.

        The result is kept at the same truncation degree; for jets used as
        exact polynomials this is the exact derivative.
        """
        terms = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            key = tuple(v - 1 if i == index else v for i, v in enumerate(e))
            terms[key] = terms.get(key, 0.0) + c * k
        return Jet(self.dim, self.degree, terms)

    # -- evaluation -------------------------------------------------------

    def evaluate(self, points):
        """Evaluate at a batch of points, shape (..., dim) -> (...)."""
        points = np.asarray(points, dtype=complex)
        if points.shape[-1] != self.dim:
            raise ShapeMismatchError(
                f"points have last axis {points.shape[-1]}, expected {self.dim}"
            )
        out = np.zeros(points.shape[:-1], dtype=complex)
        if not self.terms:
            return out
        # Per-variable power tables: powers[i][k] = x_i^k on the batch.
        max_exp = [0] * self.dim
        for e in self.terms:
            for i, v in enumerate(e):
                if v > max_exp[i]:
                    max_exp[i] = v
        powers = []
        for i in range(self.dim):
            tab = [np.ones(points.shape[:-1], dtype=complex)]
            for _ in range(max_exp[i]):
                tab.append(tab[-1] * points[..., i])
            powers.append(tab)
        for e, c in self.terms.items():
            mono = c
            for i, v in enumerate(e):
                if v:
                    mono = mono * powers[i][v]
            out = out + mono
        return out

    # -- comparisons / repr ------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Jet) and self.dim == other.dim
                and self.degree == other.degree and self.terms == other.terms)

    def __hash__(self):
        return hash((self.dim, self.degree, tuple(self.sorted_terms())))

    def allclose(self, other, tol=1e-9):
        if not isinstance(other, Jet) or self.dim != other.dim:
            return False
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= tol
                   for k in keys)

    def __repr__(self):
        if not self.terms:
            return "Jet(0)"
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"x{i + 1}^{v}" if v > 1 else f"x{i + 1}"
                            for i, v in enumerate(e) if v)
            bits.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return "Jet(" + " + ".join(bits) + f"; d={self.degree})"


def substitute(outer, inner):
    """Substitute the jets ``inner`` (one per variable) into ``outer``.

    Every inner jet must have zero constant term; that is what makes the
    truncated result agree with the analytic composition through the common
    truncation degree.  Monomial powers of the inner jets are memoized per
    variable, so each distinct exponent is built from one extra product.
    """
    dim = outer.dim
    if len(inner) != dim:
        raise ShapeMismatchError(f"expected {dim} inner jets, got {len(inner)}")
    degree = outer.degree
    inner_dim = inner[0].dim
    for jet in inner:
        if jet.dim != inner_dim or jet.degree != degree:
            raise ShapeMismatchError("inner jets disagree in dimension or degree")
        if abs(jet.constant_term()) > DROP_TOL:
            raise ShapeMismatchError("substitution requires origin-fixing inner jets")

    one = Jet.constant(1.0, inner_dim, degree)
    powers = [[one] for _ in range(dim)]  # powers[i][k] == inner[i]**k

    def power(i, k):
        tab = powers[i]
        while len(tab) <= k:
            tab.append(tab[-1] * inner[i])
        return tab[k]

    result = Jet.zero(inner_dim, degree)
    for e, c in outer.terms.items():
        if sum(e) > degree:
            continue
        mono = Jet.constant(c, inner_dim, degree)
        for i, v in enumerate(e):
            if v:
                mono = mono * power(i, v)
        result = result + mono
    return result


class MapGerm:
    """An n-tuple of jets fixing the origin: a self-map germ of (C^n, 0)."""

    __slots__ = ("components", "dim", "degree")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ShapeMismatchError("a map germ needs at least one component")
        dim = components[0].dim
        degree = components[0].degree
        if len(components) != dim:
            raise ShapeMismatchError(
                f"self-map germ of C^{dim} needs {dim} components, got {len(components)}"
            )
        for jet in components:
            if jet.dim != dim or jet.degree != degree:
                raise ShapeMismatchError("components disagree in dimension or degree")
            if abs(jet.constant_term()) > DROP_TOL:
                raise ShapeMismatchError("map germ must fix the origin")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "degree", degree)

    def __setattr__(self, name, value):
        raise AttributeError("MapGerm instances are immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, dim, degree):
        return cls(tuple(Jet.variable(i, dim, degree) for i in range(dim)))

    @classmethod
    def from_linear(cls, matrix, degree):
        matrix = np.asarray(matrix, dtype=complex)
        dim = matrix.shape[0]
        if matrix.shape != (dim, dim):
            raise ShapeMismatchError("linear part must be a square matrix")
        comps = []
        for j in range(dim):
            terms = {}
            for i in range(dim):
                if abs(matrix[j, i]) > DROP_TOL:
                    e = tuple(1 if k == i else 0 for k in range(dim))
                    terms[e] = matrix[j, i]
            comps.append(Jet(dim, degree, terms))
        return cls(comps)

    @classmethod
    def monomial_map(cls, powers, degree):
        """Diagonal monomial map x_i -> x_i^{powers[i]}."""
        dim = len(powers)
        comps = []
        for i, k in enumerate(powers):
            e = tuple(k if j == i else 0 for j in range(dim))
            comps.append(Jet(dim, degree, {e: 1.0}))
        return cls(comps)

    # -- structure --------------------------------------------------------

    def with_degree(self, degree):
        return MapGerm(tuple(c.with_degree(degree) for c in self.components))

    def __eq__(self, other):
        return isinstance(other, MapGerm) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def allclose(self, other, tol=1e-9):
        return (isinstance(other, MapGerm) and self.dim == other.dim
                and all(a.allclose(b, tol) for a, b in zip(self.components, other.components)))

    def __repr__(self):
        inner = ", ".join(repr(c) for c in self.components)
        return f"MapGerm[{inner}]"

    # -- evaluation -------------------------------------------------------

    def evaluate(self, points):
        """Evaluate at points of shape (..., dim); returns the same shape."""
        points = np.asarray(points, dtype=complex)
        values = [c.evaluate(points) for c in self.components]
        return np.stack(values, axis=-1)

    def partials(self):
        """Matrix of partial-derivative jets, row j = gradient of component j."""
        return [[c.derivative(i) for i in range(self.dim)] for c in self.components]

    def jacobian(self, points, partials=None):
        """Jacobian matrices at a batch of points: shape (..., dim, dim)."""
        points = np.asarray(points, dtype=complex)
        if partials is None:
            partials = self.partials()
        rows = []
        for j in range(self.dim):
            rows.append(np.stack([partials[j][i].evaluate(points)
                                  for i in range(self.dim)], axis=-1))
        return np.stack(rows, axis=-2)


def compose(g, f):
    """The composition g∘f of two origin-fixing germs, truncated.

    Both germs must share dimension and truncation degree; coefficients of
    the result agree with the analytic composition through that degree.
    """
    if not isinstance(g, MapGerm) or not isinstance(f, MapGerm):
        raise ShapeMismatchError("compose expects two map germs")
    if g.dim != f.dim or g.degree != f.degree:
        raise ShapeMismatchError(
            f"compose mismatch: ({g.dim}, deg {g.degree}) vs ({f.dim}, deg {f.degree})"
        )
    return MapGerm(tuple(substitute(c, f.components) for c in g.components))


def iterate(f, k):
    """The k-th iterate f^k as a germ, k >= 1, by repeated composition."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ShapeMismatchError("iteration count must be a positive integer")
    # Binary powering; composition is associative through the truncation.
    result = None
    base = f
    while k:
        if k & 1:
            result = base if result is None else compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


def linear_part(f):
    """The Jacobian matrix of the germ at the origin."""
    return np.stack([c.linear_coefficients() for c in f.components], axis=0)


def lowest_forms(g):
    """Per component, the minimal total degree and that homogeneous part.

    Raises ``DegenerateComponentError`` if a component is identically zero
    (the origin is then not isolated along that slot).
    """
    out = []
    for j, c in enumerate(g.components):
        v = c.valuation()
        if v is None:
            raise DegenerateComponentError(
                f"component {j + 1} is identically zero through degree {g.degree}"
            )
        out.append((v, c.homogeneous_part(v)))
    return out


def displacement(f):
    """The germ id − f, whose zero order at 0 is the fixed point index."""
    ident = MapGerm.identity(f.dim, f.degree)
    return MapGerm(tuple(a - b for a, b in zip(ident.components, f.components)))


def conjugate(f, matrix):
    """The germ T∘f∘T⁻¹ for an invertible linear map T."""
    matrix = np.asarray(matrix, dtype=complex)
    inv = np.linalg.inv(matrix)
    t = MapGerm.from_linear(matrix, f.degree)
    t_inv = MapGerm.from_linear(inv, f.degree)
    return compose(t, compose(f, t_inv))


def invert(h, max_sweeps=None):
    """Inverse germ of ``h`` with identity linear part, through truncation.

    Solves K∘h = id by fixed-point iteration K ← id − (h − id)∘K; each
    sweep extends the agreement by at least one degree.
    """
    ident = MapGerm.identity(h.dim, h.degree)
    tail = MapGerm(tuple(a - b for a, b in zip(h.components, ident.components)))
    lin = linear_part(h)
    if not np.allclose(lin, np.eye(h.dim), atol=1e-9):
        raise ShapeMismatchError("germ inversion requires an identity linear part")
    k = ident
    sweeps = max_sweeps or h.degree + 1
    for _ in range(sweeps):
        composed = compose(tail, k)
        new = MapGerm(tuple(a - b for a, b in zip(ident.components, composed.components)))
        if new == k:
            break
        k = new
    return k


def dimension_of_jet_space(dim, degree):
    """Number of monomials of total degree <= degree in dim variables."""
    return comb(degree + dim, dim)
