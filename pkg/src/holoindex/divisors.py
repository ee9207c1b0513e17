"""Prime and divisor combinatorics behind periodic point counting.

Counting works through two linked identities on a self-map h of a finite
set: the number of fixed points of an iterate splits over minimal periods,

    L(h^{M'}) = sum over m | M' of P_m(h),

and inverting that triangular system expresses the period-M count as a
signed sum over the subsets of the primes dividing M,

    P_M(h) = sum over tau subset of primes(M) of (-1)^{#tau} L(h^{M:tau}),

where M:tau divides out one copy of each prime in tau.  ``dold_plan``
materializes the signed divisor list; ``census_invert`` solves the
triangular system directly.  ``number1_construct`` performs the prime-power
bookkeeping used to steer a period through lcm arithmetic: for inputs
(m_1..m_s) whose lcm strictly drops when any m_j is removed, it selects one
prime power per slot that witnesses the drop and certifies the three
families of divisibility identities tying them to M.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd

from .errors import HypothesisError

_PRIME_TABLE_LIMIT = 10**6
_prime_table = None


def _primes_up_to(limit):
    """Sieve of Eratosthenes, cached for the desk-scale table."""
    global _prime_table
    if _prime_table is None or (_prime_table and _prime_table[-1] < limit):
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        p = 2
        while p * p <= limit:
            if sieve[p]:
                sieve[p * p:limit + 1:p] = b"\x00" * len(range(p * p, limit + 1, p))
            p += 1
        _prime_table = [i for i in range(limit + 1) if sieve[i]]
    return _prime_table


def factorize(n):
    """Prime factorization as {prime: exponent}, by table trial division."""
    if n < 1:
        raise HypothesisError(f"cannot factorize {n}: need a positive integer")
    out = {}
    remaining = n
    for p in _primes_up_to(_PRIME_TABLE_LIMIT):
        if p * p > remaining:
            break
        while remaining % p == 0:
            out[p] = out.get(p, 0) + 1
            remaining //= p
    if remaining > 1:
        out[remaining] = out.get(remaining, 0) + 1
    return out


def prime_set(n):
    """Sorted list of the distinct primes dividing n."""
    return sorted(factorize(n))


def divisors(n):
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, k in factorize(n).items():
        divs = [d * p**j for d in divs for j in range(k + 1)]
    return sorted(divs)


def lcm(*values):
    return reduce(lambda a, b: a * b // gcd(a, b), values, 1)


@dataclass(frozen=True)
class DoldPlan:
    """Signed divisor list entering the period-count inversion for M.

    ``weights`` holds (divisor M:tau, sign (-1)^{#tau}) pairs, one per
    subset tau of the primes dividing M, ordered by subset size and then by
    divisor value ascending within a size.
    """

    M: int
    primes: tuple
    weights: tuple

    def signed_sum(self, values):
        """Combine per-divisor numbers with the plan's signs."""
        return sum(sign * values[d] for d, sign in self.weights)


def dold_plan(M):
    """The complete signed divisor list for period M."""
    if M < 1:
        raise HypothesisError(f"period must be >= 1, got {M}")
    primes = prime_set(M)
    by_size = {}
    for mask in range(1 << len(primes)):
        tau = [primes[i] for i in range(len(primes)) if mask >> i & 1]
        q = 1
        for p in tau:
            q *= p
        by_size.setdefault(len(tau), []).append((M // q, (-1) ** len(tau)))
    weights = []
    for size in sorted(by_size):
        weights.extend(sorted(by_size[size]))
    return DoldPlan(M=M, primes=tuple(primes), weights=tuple(weights))


def census_invert(L_values, M, flag_negative=None):
    """Solve L(h^{M'}) = sum_{m | M'} P_m for the period counts P_m.

    ``L_values`` must contain an entry for every divisor of M.  The system
    is triangular in the divisor order, so it always has a unique integer
    solution.  Negative outputs are possible when the inputs do not come
    from an actual self-map; they are returned as-is, with the offending
    divisors appended to ``flag_negative`` when a list is supplied.
    """
    divs = divisors(M)
    missing = [d for d in divs if d not in L_values]
    if missing:
        raise HypothesisError(f"census table lacks divisors {missing} of {M}")
    counts = {}
    for d in divs:
        counts[d] = L_values[d] - sum(counts[m] for m in divisors(d) if m != d)
    if flag_negative is not None:
        flag_negative.extend(d for d in divs if counts[d] < 0)
    return counts


@dataclass(frozen=True)
class Number1Certificate:
    """Witness for the prime-power selection behind lcm steering.

    For each slot j: ``primes[j] ** exponents[j]`` divides m_j exactly
    (no higher power does) and divides no other m_k; M factors as
    M = M_star * prod(primes) = M_star2 * prod(primes**exponents); and
    M_star / m_j reduces to cofactors[j] / primes[j] in lowest terms.
    """

    m: tuple
    M: int
    M_star: int
    M_star2: int
    primes: tuple
    exponents: tuple
    cofactors: tuple

    def verify(self):
        """Raise if any of the three invariant families fails."""
        s = len(self.m)
        for j in range(s):
            n_j, r_j = self.primes[j], self.exponents[j]
            q = n_j**r_j
            if self.m[j] % q != 0:
                raise HypothesisError(f"slot {j + 1}: {n_j}^{r_j} does not divide {self.m[j]}")
            if self.m[j] % (q * n_j) == 0:
                raise HypothesisError(f"slot {j + 1}: {n_j}^{r_j + 1} divides {self.m[j]}")
            for k in range(s):
                if k != j and self.m[k] % q == 0:
                    raise HypothesisError(
                        f"slot {j + 1}: {n_j}^{r_j} also divides m_{k + 1} = {self.m[k]}"
                    )
        prod_primes = 1
        prod_powers = 1
        for n_j, r_j in zip(self.primes, self.exponents):
            prod_primes *= n_j
            prod_powers *= n_j**r_j
        if self.M != self.M_star * prod_primes:
            raise HypothesisError("M != M_star * product of selected primes")
        if self.M != self.M_star2 * prod_powers:
            raise HypothesisError("M != M_star2 * product of selected prime powers")
        for j in range(s):
            n_j = self.primes[j]
            n_prime = self.cofactors[j]
            # M_star / m_j == n_prime / n_j in lowest terms.
            if self.M_star * n_j != n_prime * self.m[j]:
                raise HypothesisError(f"slot {j + 1}: M_star/m_j != cofactor/prime")
            if gcd(n_j, n_prime) != 1:
                raise HypothesisError(f"slot {j + 1}: cofactor shares a factor with the prime")


def number1_construct(m):
    """Select the prime-power witnesses for the lcm-drop hypothesis.

    Requires, for every j, that dropping m_j strictly lowers the lcm of the
    list.  Returns a verified ``Number1Certificate``; the selection is
    deterministic (smallest admissible prime per slot).
    """
    m = tuple(int(v) for v in m)
    if not m or any(v < 1 for v in m):
        raise HypothesisError("inputs must be positive integers")
    M = lcm(*m)
    factored = [factorize(v) for v in m]
    primes = []
    exponents = []
    for j, fac in enumerate(factored):
        others = [k for k in range(len(m)) if k != j]
        if others and lcm(*[m[k] for k in others]) == M:
            raise HypothesisError(
                f"hypothesis fails at slot {j + 1}: removing m_{j + 1} = {m[j]} "
                f"does not lower the lcm {M}"
            )
        # A witness prime must appear in m_j with an exponent strictly
        # larger than in every other slot.
        choice = None
        for p in sorted(fac):
            r = fac[p]
            if all(factored[k].get(p, 0) < r for k in others):
                choice = (p, r)
                break
        if choice is None:
            raise HypothesisError(
                f"hypothesis fails at slot {j + 1}: no prime power in {m[j]} "
                "exceeds all other slots"
            )
        primes.append(choice[0])
        exponents.append(choice[1])
    prod_primes = 1
    prod_powers = 1
    for p, r in zip(primes, exponents):
        prod_primes *= p
        prod_powers *= p**r
    M_star = M // prod_primes
    M_star2 = M // prod_powers
    cofactors = tuple(M_star * p // v for p, v in zip(primes, m))
    cert = Number1Certificate(m=m, M=M, M_star=M_star, M_star2=M_star2,
                              primes=tuple(primes), exponents=tuple(exponents),
                              cofactors=cofactors)
    cert.verify()
    return cert


# -- executable period arithmetic on concrete maps -------------------------


def minimal_period_of(point, mapping, m):
    """Minimal period of a point with mapping^m(point) == point.

    ``mapping`` is a callable on hashable states.  Returns the least
    divisor L of m with mapping^L fixing the point; the period of any
    point fixed by the m-th iterate divides m.
    """
    orbit = [point]
    x = point
    for _ in range(m):
        x = mapping(x)
        if x == point:
            break
        orbit.append(x)
    period = len(orbit)
    if m % period != 0 or x != point:
        raise HypothesisError(f"point {point!r} is not fixed by iterate {m}")
    return period
