"""Zero orders and fixed point indices of holomorphic germs.

The zero order of a germ g at an isolated zero is the number of solutions
of g(x) = q in a small ball around the zero for a small regular value q;
the fixed point index of f is the zero order of id - f.  Three routes are
implemented:

* ``cronin``: when the lowest homogeneous parts of the components vanish
  jointly only at the origin, the order is the product of their degrees.
  Exact and instant.

* ``composite_product``: iterates of resonant germs have displacement
  components of the shape x_j * (block in x_i^{m_i}) that defeat the
  direct product formula.  Pulling back along a diagonal monomial
  substitution x_i = z_i^{alpha_i} rebalances the lowest forms; the order
  of the pullback factors as the product of the substitution order and the
  sought order, which turns the index into the closed form
  prod_{j in D} (1 + m_j) over the fully resonant slots D.  The route only
  fires when a weighted-degree certificate proves the rebalanced lowest
  forms are exactly the block system and every principal submatrix of the
  block is invertible; otherwise it refuses.

* ``numerical_degree``: count preimages of a small random regular value by
  multi-start Newton, verified against a second independent value.

``fixed_point_index`` auto-selects: certified Cronin, then the resonant
route, then the numerical count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import jets
from ._newton import NewtonBudget, as_generator, count_preimages
from .divisors import lcm
from .errors import IsolationError, StructureError
from .jets import MapGerm, displacement, linear_part, lowest_forms
from .spectra import UNITY_TOL, spectrum_of_germ

# Magnitude of the regular value: 1e-3 * radius ** (largest lowest degree).
REGULAR_VALUE_FACTOR = 1e-3


@dataclass
class IndexReport:
    """A zero order / fixed point index with its provenance.

    For the numerical route, ``witnesses`` holds the preimage points of the
    sampled regular value with their Jacobian condition numbers; the exact
    routes leave those fields empty and record their certificates in
    ``details``.
    """

    value: int
    method: str  # "cronin" | "composite_product" | "numerical_degree"
    witnesses: np.ndarray | None = None
    conditions: np.ndarray | None = None
    regular_value: np.ndarray | None = None
    ball_radius: float | None = None
    details: dict = field(default_factory=dict)


# -- isolation tests --------------------------------------------------------


def isolation_random_lines(forms, rng=None, lines=64, tol=1e-12):
    """Necessary test: no sampled complex line lies in the common zero set.

    The restriction of a homogeneous form P of degree m to the line t*v is
    t^m P(v), so the line lies in the zero set of the system exactly when
    every component vanishes at the direction v.  Cheap, and only
    necessary: positive-dimensional zero sets away from the sampled lines
    escape detection.
    """
    rng = as_generator(rng)
    dim = forms[0][1].dim
    directions = rng.standard_normal((lines, dim)) + 1j * rng.standard_normal((lines, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    for v in directions:
        values = []
        for degree, form in forms:
            scale = max(abs(c) for c in form.terms.values())
            values.append(abs(form.evaluate(v)) / scale)
        if max(values) <= tol:
            return False
    return True


def _binary_form_roots(form, degree):
    """Projective roots of a homogeneous form in two variables.

    Returned as unit vectors in C^2; the chordal distance between two such
    vectors u, w is |u1*w2 - u2*w1|.
    """
    coeffs = np.zeros(degree + 1, dtype=complex)  # coefficient of x^k y^(degree-k)
    for (a, b), c in form.terms.items():
        coeffs[a] = c
    roots = []
    top = degree
    while top >= 0 and abs(coeffs[top]) <= 1e-14 * max(abs(coeffs).max(), 1.0):
        roots.append(np.array([1.0, 0.0], dtype=complex))  # root at infinity
        top -= 1
    if top > 0:
        poly = coeffs[: top + 1][::-1]  # numpy wants descending powers
        for t in np.roots(poly):
            vec = np.array([t, 1.0], dtype=complex)
            roots.append(vec / np.linalg.norm(vec))
    return roots


def isolation_certified(forms):
    """Sufficient conditions proving the lowest system has an isolated zero.

    Covers: one variable; all-linear lowest parts with nonsingular matrix;
    pure powers of distinct variables; and, in two variables, disjoint
    projective root sets of the two forms.  Returns False when no
    certificate applies (which does not mean the zero fails to be
    isolated).
    """
    dim = forms[0][1].dim
    if dim == 1:
        return all(not form.is_zero() for _, form in forms)
    if all(degree == 1 for degree, _ in forms):
        matrix = np.stack([form.linear_coefficients() for _, form in forms])
        sing = np.linalg.svd(matrix, compute_uv=False)
        return bool(sing[-1] > 1e-9 * max(sing[0], 1.0))
    # Pure powers of distinct variables: (c_1 x_{p(1)}^{k_1}, ...).
    variables = []
    for _, form in forms:
        if len(form.terms) != 1:
            variables = None
            break
        exponents = next(iter(form.terms))
        support = [i for i, e in enumerate(exponents) if e]
        if len(support) != 1:
            variables = None
            break
        variables.append(support[0])
    if variables is not None and sorted(variables) == list(range(dim)):
        return True
    if dim == 2:
        roots_a = _binary_form_roots(forms[0][1], forms[0][0])
        roots_b = _binary_form_roots(forms[1][1], forms[1][0])
        sep = min(
            (abs(u[0] * w[1] - u[1] * w[0]) for u in roots_a for w in roots_b),
            default=1.0,
        )
        return bool(sep > 1e-8)
    return False


# -- Cronin route ------------------------------------------------------------


def zero_order_cronin(g, *, assert_isolated=False, rng=None):
    """Product of the lowest homogeneous degrees, gated on isolation.

    The gate accepts a proven certificate, the caller's assertion, or the
    random-line test; when even the necessary test fails the computation
    refuses and recommends the numerical route.
    """
    forms = lowest_forms(g)
    certified = isolation_certified(forms)
    if not (assert_isolated or certified):
        if not isolation_random_lines(forms, rng):
            raise IsolationError(
                "lowest homogeneous system vanishes along a sampled line; "
                "the origin is not an isolated zero of the lowest forms — "
                "use the numerical route"
            )
    value = 1
    for degree, _ in forms:
        value *= degree
    return IndexReport(
        value=value,
        method="cronin",
        details={
            "lowest_degrees": tuple(degree for degree, _ in forms),
            "isolation": "certified" if certified
            else ("asserted" if assert_isolated else "random_lines"),
        },
    )


# -- resonant substitution route ---------------------------------------------


def _principal_submatrices_invertible(matrix, tol=1e-9):
    n = matrix.shape[0]
    scale = max(np.abs(matrix).max(), 1.0)
    for size in range(1, n + 1):
        for rows in combinations(range(n), size):
            sub = matrix[np.ix_(rows, rows)]
            if abs(np.linalg.det(sub)) <= tol * scale**size:
                return False
    return True


def _resonant_substitution(g):
    """Certificate analysis of the displacement of a resonant iterate.

    Identifies the fully degenerate slots D (vanishing diagonal linear
    coefficient), reads the block exponents m_j from the pure-power
    monomials of the quotients g_j / x_j, assigns substitution powers
    alpha, and verifies with exact weighted-degree arithmetic that the
    rebalanced lowest forms are precisely the block system with an
    everywhere-invertible principal structure.  Raises ``StructureError``
    whenever any condition fails.
    """
    n = g.dim
    L = linear_part(g)
    off = L - np.diag(np.diag(L))
    if np.abs(off).max(initial=0.0) > UNITY_TOL:
        raise StructureError("linear part is not diagonal")
    diag = np.diag(L)
    degenerate = [j for j in range(n) if abs(diag[j]) <= UNITY_TOL]
    if not degenerate:
        raise StructureError("no degenerate slot; the direct route applies")

    quotients = {}
    for j in degenerate:
        q = {}
        for exponents, coeff in g.components[j].terms.items():
            if exponents[j] == 0:
                raise StructureError(
                    f"component {j + 1} has a monomial {exponents} not divisible "
                    f"by x{j + 1}"
                )
            key = tuple(e - 1 if i == j else e for i, e in enumerate(exponents))
            q[key] = coeff
        if not q:
            raise StructureError(f"component {j + 1} vanishes through the truncation")
        quotients[j] = q

    # Minimal pure-power exponent of each variable across the quotients.
    pure = {}
    for q in quotients.values():
        for exponents in q:
            support = [i for i, e in enumerate(exponents) if e]
            if len(support) == 1:
                i = support[0]
                pure[i] = min(pure.get(i, exponents[i]), exponents[i])
    for j in degenerate:
        if j not in pure:
            raise StructureError(
                f"slot {j + 1}: no pure power of x{j + 1} in its own block"
            )

    orders = {j: pure[j] for j in degenerate}
    M0 = lcm(*orders.values())
    alpha = []
    for i in range(n):
        if i in orders:
            alpha.append(M0 // orders[i])
        else:
            divisible = all(e[i] > 0 for e in g.components[i].terms)
            alpha.append(M0 if divisible else 1)

    # Weighted-degree certificate: in the substituted coordinates the
    # degree of a monomial is its alpha-weighted exponent sum.
    block = {j: {} for j in degenerate}
    for j in degenerate:
        base = alpha[j] + M0
        for exponents, coeff in quotients[j].items():
            weighted = alpha[j] + sum(a * e for a, e in zip(alpha, exponents))
            if weighted < base:
                raise StructureError(
                    f"component {j + 1}: monomial {exponents} undercuts the "
                    "block degree after substitution"
                )
            if weighted == base:
                support = [i for i, e in enumerate(exponents) if e]
                if (len(support) != 1 or support[0] not in orders
                        or exponents[support[0]] != orders[support[0]]):
                    raise StructureError(
                        f"component {j + 1}: monomial {exponents} lands on the "
                        "block degree but is not a block column"
                    )
                block[j][support[0]] = coeff
    for i in range(n):
        if i in orders:
            continue
        linear_key = tuple(1 if k == i else 0 for k in range(n))
        for exponents, coeff in g.components[i].terms.items():
            if exponents == linear_key:
                continue
            weighted = sum(a * e for a, e in zip(alpha, exponents))
            if weighted <= alpha[i]:
                raise StructureError(
                    f"component {i + 1}: monomial {exponents} is not dominated "
                    "by the linear term after substitution"
                )

    matrix = np.array(
        [[block[j].get(i, 0.0) for i in degenerate] for j in degenerate],
        dtype=complex,
    )
    if not _principal_submatrices_invertible(matrix):
        raise StructureError(
            "a principal submatrix of the resonant block is singular; "
            "isolation is not certified"
        )
    return degenerate, orders, M0, alpha, matrix


def zero_order_composite(g):
    """Zero order of a resonant displacement via monomial substitution.

    Exact: the order of the pullback is a Cronin product over the certified
    lowest forms, and dividing by the order of the substitution itself
    (the product of its powers) leaves prod (1 + m_j) over the degenerate
    slots.
    """
    degenerate, orders, M0, alpha, matrix = _resonant_substitution(g)
    pullback_order = 1
    for i in range(g.dim):
        pullback_order *= (alpha[i] + M0) if i in orders else alpha[i]
    substitution_order = 1
    for a in alpha:
        substitution_order *= a
    value = pullback_order // substitution_order
    assert pullback_order % substitution_order == 0
    return IndexReport(
        value=value,
        method="composite_product",
        details={
            "degenerate_slots": tuple(j + 1 for j in degenerate),
            "block_orders": tuple(orders[j] for j in degenerate),
            "substitution_powers": tuple(alpha),
            "pullback_order": pullback_order,
            "substitution_order": substitution_order,
            "block_matrix": matrix,
        },
    )


# -- numerical route ----------------------------------------------------------


def zero_order_numerical(g, radius, *, rng=None, budget=None):
    """Count preimages of a small random regular value inside the ball.

    The target magnitude is tied to the largest lowest-form degree so the
    preimages stay interior; two independent targets must agree, witnesses
    near the sphere raise a leakage error.
    """
    rng = as_generator(rng)
    budget = budget or NewtonBudget()
    forms = lowest_forms(g)
    m_max = max(degree for degree, _ in forms)
    target_scale = REGULAR_VALUE_FACTOR * radius**m_max
    default_order = 1
    for degree, _ in forms:
        default_order *= degree
    default_order = min(default_order, 64)
    partials = g.partials()
    result = count_preimages(
        g.evaluate,
        lambda pts: g.jacobian(pts, partials),
        g.dim,
        np.zeros(g.dim, dtype=complex),
        radius,
        target_scale,
        rng,
        budget,
        default_order=default_order,
    )
    return IndexReport(
        value=result.count,
        method="numerical_degree",
        witnesses=result.points,
        conditions=result.conditions,
        regular_value=result.target,
        ball_radius=radius,
        details={"target_scale": target_scale, "lowest_degrees":
                 tuple(degree for degree, _ in forms)},
    )


# -- fixed point indices -------------------------------------------------------


def fixed_point_index(f, strategy="auto", *, radius=0.5, rng=None, budget=None):
    """Zero order of id - f at the origin, by the selected strategy.

    ``auto`` tries certified Cronin, then the resonant substitution route,
    then the numerical count; ``cronin`` allows only the exact routes and
    raises if neither certifies; ``numerical`` forces the degree count.
    """
    if strategy not in ("auto", "cronin", "numerical"):
        raise ValueError(f"unknown strategy {strategy!r}")
    g = displacement(f)
    if strategy in ("auto", "cronin"):
        forms = lowest_forms(g)
        if isolation_certified(forms):
            return zero_order_cronin(g, assert_isolated=True, rng=rng)
        try:
            return zero_order_composite(g)
        except StructureError as refusal:
            if strategy == "cronin":
                raise IsolationError(
                    "no exact route certified for this germ: "
                    f"{refusal}"
                ) from refusal
    return zero_order_numerical(g, radius, rng=rng, budget=budget)


def is_simple(f):
    """True iff 1 is not an eigenvalue of the linear part (within tolerance).

    A fixed point of a holomorphic germ has index 1 exactly when it is
    simple in this sense; degenerate fixed points always carry index > 1.
    """
    spec = spectrum_of_germ(f)
    return all(abs(v - 1.0) > UNITY_TOL for v in spec.eigenvalues)


def product_rule_check(h1, h2, *, radius=0.4, rng=None, budget=None):
    """Verify that zero orders multiply under composition.

    Computes the orders of h1, h2 and h1∘h2 independently and checks the
    product identity exactly.
    """
    composed = jets.compose(h1, h2)
    order_1 = _zero_order_auto(h1, radius, rng, budget)
    order_2 = _zero_order_auto(h2, radius, rng, budget)
    order_12 = _zero_order_auto(composed, radius, rng, budget)
    return order_12.value == order_1.value * order_2.value


def _zero_order_auto(g, radius, rng, budget):
    forms = lowest_forms(g)
    if isolation_certified(forms):
        return zero_order_cronin(g, assert_isolated=True, rng=rng)
    try:
        return zero_order_composite(g)
    except StructureError:
        return zero_order_numerical(g, radius, rng=rng, budget=budget)
