"""Degree-by-degree normal form reduction for diagonal germs.

For a germ with diagonal linear part diag(lambda_1..lambda_n) there is a
tangent-to-identity coordinate change H killing, through any prescribed
degree r, every monomial x^I in component j whose eigenvalue product
lambda^I differs from lambda_j.  The construction is the classical
homological recursion: at degree k the change of variables
H_k = id + phi_k with per-monomial coefficient

    phi = c / (lambda^I - lambda_j)

removes the coefficient c of x^I from component j without touching lower
degrees.  Monomials with lambda^I = lambda_j (resonant) are retained;
divisors between the resonance tolerance and the small-divisor threshold
abort loudly rather than amplify noise.

``resonant_skeleton`` post-processes the normal form of a germ whose
leading eigenvalues are primitive roots of unity of distinct prime orders:
it extracts the matrix of resonant block coefficients b_{ji} (the
coefficient of x_j x_i^{m_i} in component j), classifies every retained
monomial against the expected block/tail shapes, and reports whether all
principal submatrices of the block are invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .divisors import factorize
from .errors import NonDiagonalLinearPartError, SmallDivisorError
from .jets import Jet, MapGerm, compose, invert, linear_part
from .spectra import UNITY_TOL, classify_unity

DIVISOR_TOL = 1e-6


@dataclass
class NormalFormResult:
    """Outcome of a normalization: transform, normalized germ, support."""

    transform: MapGerm        # H with identity linear part
    normalized: MapGerm       # H^{-1} ∘ f ∘ H through the degree
    degree: int
    resonant_support: set     # {(component index, exponent tuple), ...}
    eigenvalues: tuple

    def conjugacy_residual(self):
        """Max coefficient mismatch of f∘H vs H∘g, a correctness witness."""
        left = compose(self.transform, self.normalized)
        right = compose(self._source, self.transform)
        worst = 0.0
        for a, b in zip(left.components, right.components):
            keys = set(a.terms) | set(b.terms)
            for key in keys:
                worst = max(worst, abs(a.terms.get(key, 0.0) - b.terms.get(key, 0.0)))
        return worst

    _source: MapGerm = None


def _diagonal_eigenvalues(f):
    matrix = linear_part(f)
    off = matrix - np.diag(np.diag(matrix))
    if np.abs(off).max(initial=0.0) > UNITY_TOL:
        raise NonDiagonalLinearPartError(
            "normalization requires a diagonal linear part; conjugate by a "
            "linear change of coordinates first"
        )
    return np.diag(matrix)


def normalize(f, r, *, divisor_tol=DIVISOR_TOL, unity_tol=UNITY_TOL):
    """Kill all non-resonant monomials through degree r.

    Works degree by degree: at each k the homological equation is solved
    monomial-by-monomial (the diagonal linear part decouples it), the germ
    is conjugated, and the accumulated transform is extended.  Resonant
    coefficients are left exactly where they first appear.
    """
    if r < 1:
        raise ValueError("normalization degree must be >= 1")
    eigenvalues = _diagonal_eigenvalues(f)
    g = f.with_degree(r)
    n = f.dim
    transform = MapGerm.identity(n, r)
    for k in range(2, r + 1):
        phi_terms = [{} for _ in range(n)]
        for j in range(n):
            for exponents, coeff in g.components[j].terms.items():
                if sum(exponents) != k:
                    continue
                product = complex(np.prod(eigenvalues**np.array(exponents)))
                divisor = product - eigenvalues[j]
                if abs(divisor) <= unity_tol:
                    continue  # resonant: retained
                if abs(divisor) <= divisor_tol:
                    raise SmallDivisorError(
                        f"divisor {abs(divisor):.3g} below threshold for "
                        f"component {j + 1}, monomial {exponents}",
                        component=j + 1,
                        exponents=exponents,
                    )
                phi_terms[j][exponents] = coeff / divisor
        if all(not t for t in phi_terms):
            continue
        step = MapGerm(tuple(
            Jet.variable(j, n, r) + Jet(n, r, phi_terms[j]) for j in range(n)
        ))
        step_inverse = invert(step)
        g = compose(step_inverse, compose(g, step))
        transform = compose(transform, step)
    support = set()
    for j in range(n):
        for exponents in g.components[j].terms:
            if sum(exponents) >= 2:
                support.add((j, exponents))
    result = NormalFormResult(
        transform=transform,
        normalized=g,
        degree=r,
        resonant_support=support,
        eigenvalues=tuple(complex(v) for v in eigenvalues),
    )
    result._source = f.with_degree(r)
    return result


@dataclass
class SkeletonReport:
    """Resonant block extraction from a normal form.

    ``classification`` labels each retained monomial: ``block`` for the
    x_j x_i^{m_i} entries, ``resonant_tail`` for deeper products of the
    invariant powers, ``free_tail`` for retained terms in the non-unity
    components, and ``violation`` for anything outside the expected shape
    (a sign that the non-unity eigenvalues satisfy an extra multiplicative
    relation).  ``principal_minors_invertible`` is the invertibility
    verdict on the block matrix and all its principal submatrices.
    """

    orders: tuple
    block: np.ndarray
    principal_minors_invertible: bool
    classification: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    normal_form: NormalFormResult = None


def _all_principal_minors_invertible(matrix, tol=1e-9):
    n = matrix.shape[0]
    scale = max(np.abs(matrix).max(initial=0.0), 1.0)
    for size in range(1, n + 1):
        for rows in combinations(range(n), size):
            sub = matrix[np.ix_(rows, rows)]
            if abs(np.linalg.det(sub)) <= tol * scale**size:
                return False
    return True


def resonant_skeleton(f, m, *, degree=None, divisor_tol=DIVISOR_TOL):
    """Normalize and match the result against the resonant block shape.

    ``m`` lists the prime orders of the leading eigenvalues (slot j must
    carry a primitive m_j-th root of unity); the remaining eigenvalues
    must keep their (m_1*...*m_s)-th powers away from 1.  The returned
    report carries the block matrix, the shape classification of every
    retained monomial, and the principal-minor verdict.
    """
    m = tuple(int(v) for v in m)
    s = len(m)
    n = f.dim
    if s > n:
        raise ValueError("more orders than dimensions")
    for v in m:
        if len(factorize(v)) != 1 or max(factorize(v).values()) != 1:
            raise ValueError(f"orders must be primes, got {v}")
    if len(set(m)) != s:
        raise ValueError("orders must be mutually distinct")
    eigenvalues = _diagonal_eigenvalues(f)
    for j in range(s):
        order = classify_unity(eigenvalues[j])
        if order != m[j]:
            raise ValueError(
                f"slot {j + 1} carries unity order {order}, expected {m[j]}"
            )
    bulk = 1
    for v in m:
        bulk *= v
    for rr in range(s, n):
        if abs(eigenvalues[rr] ** bulk - 1.0) <= UNITY_TOL:
            raise ValueError(
                f"eigenvalue {rr + 1} has {bulk}-th power 1; the tail "
                "eigenvalues must avoid the resonance"
            )
    r = degree if degree is not None else max(7, max(m) + 1)
    nf = normalize(f, r, divisor_tol=divisor_tol)
    g = nf.normalized

    block = np.zeros((s, s), dtype=complex)
    classification = {}
    violations = []
    for j in range(n):
        for exponents, coeff in g.components[j].terms.items():
            if sum(exponents) < 2:
                continue
            label = None
            if j < s:
                if exponents[j] >= 1:
                    reduced = tuple(e - 1 if i == j else e
                                    for i, e in enumerate(exponents))
                    if all(e == 0 for e in reduced[s:]):
                        multiples = [reduced[i] % m[i] == 0 for i in range(s)]
                        if all(multiples):
                            weights = [reduced[i] // m[i] for i in range(s)]
                            if sum(weights) == 1:
                                i = weights.index(1)
                                block[j, i] = coeff
                                label = "block"
                            elif sum(weights) >= 2:
                                label = "resonant_tail"
                if label is None:
                    label = "violation"
                    violations.append((j, exponents))
            else:
                label = "free_tail"
            classification[(j, exponents)] = label
    verdict = _all_principal_minors_invertible(block)
    return SkeletonReport(
        orders=m,
        block=block,
        principal_minors_invertible=verdict,
        classification=classification,
        violations=violations,
        normal_form=nf,
    )
