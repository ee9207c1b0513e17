"""Root-of-unity structure of the linear part of a germ.

Which iterates of a germ can hide periodic points is decided entirely by
the eigenvalues of its Jacobian at the fixed point: a linear map has a
periodic point of period M > 1 exactly when some of its eigenvalues are
primitive m_1-th, ..., m_s-th roots of unity with lcm(m_1..m_s) = M.  This
module classifies eigenvalues against that criterion and exposes the
divisibility predicates used by normal-form reduction.

Eigenvalues are floating complex numbers, so "root of unity" is decided
against the tolerance ``UNITY_TOL``; fixtures built from exact angle
fractions pass with margins many orders above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import gcd

import numpy as np

from . import jets
from .divisors import lcm

UNITY_TOL = 1e-9
DEFAULT_ORDER_CAP = 720


def classify_unity(value, m_max=DEFAULT_ORDER_CAP):
    """Least m <= m_max with value^m = 1 (within tolerance), or None.

    Minimality makes the returned order primitive: no smaller power of the
    input returns to 1.
    """
    value = complex(value)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    if abs(abs(value) - 1.0) > UNITY_TOL:
        return None
    powers = np.cumprod(np.full(m_max, value, dtype=complex))
    hits = np.nonzero(np.abs(powers - 1.0) <= UNITY_TOL)[0]
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a linear part with their root-of-unity classification.

    ``unity_orders[i]`` is the primitive order of ``eigenvalues[i]`` or
    None when the eigenvalue is not a root of unity within tolerance and
    the order cap.
    """

    eigenvalues: tuple
    unity_orders: tuple
    diagonalizable: bool = True

    @property
    def dim(self):
        return len(self.eigenvalues)

    def orders_present(self):
        """Distinct unity orders among the eigenvalues, ascending."""
        return sorted({m for m in self.unity_orders if m is not None})


def spectrum_of(matrix, m_max=DEFAULT_ORDER_CAP):
    """Classify the spectrum of a linear-part matrix.

    Diagonalizability is decided from the conditioning of the eigenvector
    matrix; downstream normal-form operations reject non-diagonalizable
    linear parts.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("spectrum_of expects a square matrix")
    offdiag = matrix - np.diag(np.diag(matrix))
    if not offdiag.any():
        eigenvalues = np.diag(matrix)
        diagonalizable = True
    else:
        eigenvalues, vectors = np.linalg.eig(matrix)
        diagonalizable = bool(np.linalg.cond(vectors) < 1e8)
    eigenvalues = tuple(complex(v) for v in eigenvalues)
    orders = tuple(classify_unity(v, m_max) for v in eigenvalues)
    return Spectrum(eigenvalues=eigenvalues, unity_orders=orders,
                    diagonalizable=diagonalizable)


def spectrum_of_germ(f, m_max=DEFAULT_ORDER_CAP):
    return spectrum_of(jets.linear_part(f), m_max)


def linear_period_set(spec, M_cap):
    """Periods of periodic points of the linear map, up to M_cap.

    The origin always contributes period 1; every other period is the lcm
    of the primitive orders present on some nonempty subset of eigenvalue
    slots.
    """
    periods = {1}
    orders = [m for m in spec.unity_orders if m is not None]
    distinct = sorted(set(orders))
    for size in range(1, len(distinct) + 1):
        for subset in combinations(distinct, size):
            value = lcm(*subset)
            if value <= M_cap:
                periods.add(value)
    return periods


def condition_1_0(spec, M):
    """True iff some unity orders among the eigenvalues have lcm M."""
    if M < 2:
        raise ValueError("condition_1_0 is about periods M >= 2")
    return M in linear_period_set(spec, M)


def resonance_predicate(m, j, exponents):
    """Divisibility test for the eigenvalue relation on prime-order spectra.

    With lambda_k a primitive m_k-th root of unity and the m_k mutually
    distinct primes, lambda_j equals the product of lambda_k^{i_k} exactly
    when m_j divides (i_j - 1) and m_k divides i_k for every other k.  The
    exponent tuple covers the first len(m) slots only.
    """
    m = tuple(int(v) for v in m)
    if len(set(m)) != len(m):
        raise ValueError("orders must be mutually distinct primes")
    if not 0 <= j < len(m):
        raise ValueError(f"component index {j} out of range")
    if len(exponents) != len(m):
        raise ValueError("exponent tuple must cover exactly the unity slots")
    for k, i_k in enumerate(exponents):
        need = i_k - 1 if k == j else i_k
        if need % m[k] != 0:
            return False
    return True


def shub_sullivan_applicable(spec, m):
    """True iff every eigenvalue is 1 or has m-th power away from 1.

    Under this hypothesis the fixed point index of the m-th iterate equals
    the index of the map itself, so iterate indices can be reused without
    recomputation.
    """
    if m < 2:
        raise ValueError("the iterate exponent must be >= 2")
    for value in spec.eigenvalues:
        if abs(value - 1.0) <= UNITY_TOL:
            continue
        if abs(value**m - 1.0) <= UNITY_TOL:
            return False
    return True


def unity_root(p, q):
    """The exact-angle root of unity e^{2 pi i p / q}.

    Quarter-turn multiples are returned exactly so that desk fixtures built
    from orders 1, 2 and 4 have bit-exact spectra.
    """
    if q == 0:
        raise ValueError("unity_root needs q != 0")
    p = p % q
    g = gcd(p, q) or q
    num, den = p // g, q // g
    if den in (1, 2, 4):
        table = {(0, 1): 1 + 0j, (1, 2): -1 + 0j, (1, 4): 1j, (3, 4): -1j}
        return table[(num, den)]
    angle = 2.0 * np.pi * p / q
    return complex(np.cos(angle), np.sin(angle))
