"""Periodic orbit discovery and perturbation censuses for polynomial maps.

Maps are evaluated pointwise here (a germ's jet is treated as an exact
polynomial), because iterating the truncated jet would contaminate root
finding far from the origin.  Iterates are computed by repeated
application and their Jacobians by the chain rule.

An ``OrbitCensus`` records, for a ball and a period M, every fixed point
of f^M found in the ball with its minimal period, the period counts P_m,
and a cross-check table comparing the independently searched fixed point
counts L(f^{M'}) against the divisor sums of the P_m: the two must agree
exactly for every divisor M' of M, otherwise the search is incomplete and
the census refuses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from ._newton import NewtonBudget, as_generator, find_zeros, _unit_directions
from .divisors import divisors
from .errors import (IncompleteCensusError, PerturbationBudgetError,
                     RegionBoundaryError)
from .jets import Jet, MapGerm, compose
from .spectra import UNITY_TOL, spectrum_of_germ

ORBIT_TOL_FACTOR = 1e-8     # orbit-closure tolerance, relative to the radius
BOUNDARY_MARGIN_FACTOR = 1e-9


@dataclass(frozen=True)
class Ball:
    """Search region: the open ball |x - center| < radius in C^n."""

    center: tuple
    radius: float

    @classmethod
    def at_origin(cls, dim, radius):
        return cls(center=(0.0 + 0.0j,) * dim, radius=float(radius))

    def center_array(self):
        return np.asarray(self.center, dtype=complex)


def iterate_values(f, k, points):
    """f^k applied pointwise to a batch of points."""
    x = np.asarray(points, dtype=complex)
    for _ in range(k):
        x = f.evaluate(x)
    return x


def iterate_jacobian(f, k, points, partials=None):
    """Jacobian of f^k on a batch, by the chain rule."""
    x = np.asarray(points, dtype=complex)
    if partials is None:
        partials = f.partials()
    total = np.broadcast_to(np.eye(f.dim, dtype=complex),
                            x.shape[:-1] + (f.dim, f.dim)).copy()
    for _ in range(k):
        total = f.jacobian(x, partials) @ total
        x = f.evaluate(x)
    return total


def germ_at_orbit_point(f, k, point):
    """The germ of f^k anchored at a fixed point of f^k.

    Shifts the polynomial map to each orbit point in turn and composes the
    shifted germs, so the result is the exact jet of x -> f^k(p + x) - p
    through the truncation degree.  Residual constant terms (the anchor's
    own fixed point residual, at Newton precision) are stripped.
    """
    point = np.asarray(point, dtype=complex)
    orbit = [point]
    for _ in range(k - 1):
        orbit.append(f.evaluate(orbit[-1][None, :])[0])
    germ = None
    for p in orbit:
        image = f.evaluate(p[None, :])[0]
        jets_at_p = []
        for j, comp in enumerate(f.components):
            shifted = comp.shifted(p) - Jet.constant(image[j], f.dim, f.degree)
            jets_at_p.append(shifted)
        step_germ = MapGerm(jets_at_p)
        germ = step_germ if germ is None else compose(step_germ, germ)
    # Strip the closure residual so the anchored germ fixes its origin.
    cleaned = []
    for comp in germ.components:
        constant = comp.constant_term()
        cleaned.append(comp - Jet.constant(constant, f.dim, f.degree)
                       if constant else comp)
    return MapGerm(cleaned)


def _displaced(f, k, partials):
    """Callables for F(x) = f^k(x) - x and its Jacobian."""

    def evaluate(points):
        return iterate_values(f, k, points) - points

    def jacobian(points):
        eye = np.eye(f.dim, dtype=complex)
        return iterate_jacobian(f, k, points, partials) - eye

    return evaluate, jacobian


def _check_boundary(f, M, region, margin, rng, samples=256):
    """Reject regions whose sphere carries (near-)fixed points of f^M."""
    directions = _unit_directions(rng, samples, len(region.center))
    points = region.center_array() + region.radius * directions
    gap = np.linalg.norm(iterate_values(f, M, points) - points, axis=1).min()
    if gap <= margin:
        raise RegionBoundaryError(
            f"iterate {M} moves a boundary sample by only {gap:.3g} "
            f"(margin {margin:.3g}); shrink or grow the region"
        )


def fixed_points_of_iterate(f, k, region, *, rng=None, budget=None,
                            seeds=None):
    """All fixed points of f^k inside the region, as an array of points."""
    rng = as_generator(rng)
    partials = f.partials()
    evaluate, jacobian = _displaced(f, k, partials)
    result = find_zeros(evaluate, jacobian, f.dim, region.center_array(),
                        region.radius, rng,
                        budget or NewtonBudget(expected_order=16),
                        extra_starts=seeds)
    return result.points


def minimal_period(f, point, M, *, orbit_tol=None, radius=1.0):
    """Least divisor L of M with f^L returning the point to itself.

    Divisors are tested in ascending order, so the minimal admissible
    period wins; the point must be fixed by f^M within the tolerance.
    """
    tol = orbit_tol if orbit_tol is not None else ORBIT_TOL_FACTOR * radius
    point = np.asarray(point, dtype=complex)
    for d in divisors(M):
        if np.linalg.norm(iterate_values(f, d, point[None, :])[0] - point) <= tol:
            return d
    raise IncompleteCensusError(
        f"point {point} is not fixed by iterate {M} within {tol:.3g}"
    )


@dataclass
class OrbitRecord:
    """One periodic orbit: representative, period, orbit, multipliers."""

    representative: np.ndarray
    period: int
    points: np.ndarray          # the L orbit points, starting at the representative
    multipliers: np.ndarray     # eigenvalues of D(f^L) at the representative
    simple: bool                # no multiplier equal to 1 (within tolerance)
    hyperbolic: bool            # no multiplier on the unit circle (within tolerance)


@dataclass
class OrbitCensus:
    region: Ball
    M: int
    records: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)        # minimal period -> #points
    fixed_counts: dict = field(default_factory=dict)  # divisor -> #Fix(f^d) in region
    table: list = field(default_factory=list)         # (divisor, L, sum of counts)

    def count(self, m):
        return self.counts.get(m, 0)


def _classify_points(f, points, M, region):
    """Group fixed points of f^M into orbits with periods and multipliers."""
    tol = ORBIT_TOL_FACTOR * region.radius
    partials = f.partials()
    records = []
    counts = {d: 0 for d in divisors(M)}
    assigned = np.zeros(len(points), dtype=bool)
    for idx in range(len(points)):
        if assigned[idx]:
            continue
        p = points[idx]
        period = minimal_period(f, p, M, orbit_tol=tol)
        orbit = [p]
        x = p[None, :]
        for _ in range(period - 1):
            x = f.evaluate(x)
            orbit.append(x[0])
        # Mark the orbit mates that were found in the region.
        members = [idx]
        for j in range(idx + 1, len(points)):
            if assigned[j]:
                continue
            dists = np.linalg.norm(np.asarray(orbit) - points[j], axis=1)
            if dists.min() <= tol:
                assigned[j] = True
                members.append(j)
        assigned[idx] = True
        counts[period] += len(members)
        # Period arithmetic consistency on the discovered orbit: under the
        # k-th iterate the minimal period must drop to period/gcd(period, k).
        for k in divisors(M):
            expected = period // gcd(period, k)
            observed = None
            for t in divisors(M // k):
                if np.linalg.norm(iterate_values(f, k * t, p[None, :])[0] - p) <= tol:
                    observed = t
                    break
            if observed != expected:
                raise IncompleteCensusError(
                    f"period arithmetic violated at {p}: under iterate {k} the "
                    f"minimal period is {observed}, expected {expected}"
                )
        rep_candidates = sorted(
            (tuple(np.round(v.real, 12)) + tuple(np.round(v.imag, 12)), i)
            for i, v in enumerate(orbit)
        )
        rep = orbit[rep_candidates[0][1]]
        multipliers = np.linalg.eigvals(
            iterate_jacobian(f, period, rep[None, :], partials)[0]
        )
        simple = bool(np.all(np.abs(multipliers - 1.0) > UNITY_TOL))
        hyperbolic = bool(np.all(np.abs(np.abs(multipliers) - 1.0) > UNITY_TOL))
        records.append(OrbitRecord(
            representative=rep,
            period=period,
            points=np.asarray(orbit),
            multipliers=multipliers,
            simple=simple,
            hyperbolic=hyperbolic,
        ))
    return records, counts


def find_periodic(f, region, M, *, rng=None, budget=None,
                  boundary_margin=None):
    """Census of the fixed points of f^M in the region, by minimal period.

    Every divisor d of M gets its own independent fixed point search for
    f^d; the per-period counts come from classifying the f^M search.  The
    divisor-sum identity between the two is checked exactly and a
    violation raises ``IncompleteCensusError``.
    """
    rng = as_generator(rng)
    margin = (BOUNDARY_MARGIN_FACTOR * region.radius
              if boundary_margin is None else boundary_margin)
    if margin > 0:
        _check_boundary(f, M, region, margin, rng)
    fixed_counts = {}
    points_by_divisor = {}
    known = None
    for d in divisors(M):
        # Fixed points of smaller iterates persist into larger ones, so the
        # previous finds seed the next search.
        pts = fixed_points_of_iterate(f, d, region, rng=rng, budget=budget,
                                      seeds=known)
        points_by_divisor[d] = pts
        fixed_counts[d] = len(pts)
        known = pts if known is None or not len(known) else np.concatenate(
            [known, pts])
    records, counts = _classify_points(f, points_by_divisor[M], M, region)
    table = []
    for d in divisors(M):
        partial_sum = sum(counts[m] for m in divisors(d))
        table.append((d, fixed_counts[d], partial_sum))
    census = OrbitCensus(region=region, M=M, records=records, counts=counts,
                         fixed_counts=fixed_counts, table=table)
    bad = [(d, L, s) for d, L, s in table if L != s]
    if bad:
        raise IncompleteCensusError(
            "census identity violated: "
            + ", ".join(f"L(f^{d})={L} but divisor sum {s}" for d, L, s in bad)
            + "; enlarge the search budget"
        )
    return census


# -- perturbation experiments --------------------------------------------------


def perturb_germ(f, magnitude, rng, mode="full"):
    """A random perturbation of the germ, fixing the origin.

    ``full`` shifts the whole linear part by complex Gaussians of the given
    magnitude and adds random quadratic terms of magnitude squared.
    ``resonance_preserving`` keeps every root-of-unity eigenvalue exact:
    only diagonal entries of non-unity slots move, plus the quadratic
    terms.
    """
    n = f.dim
    degree = f.degree
    if mode not in ("full", "resonance_preserving"):
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if mode == "full":
        shift = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        shift *= magnitude / np.linalg.norm(shift)
    else:
        spec = spectrum_of_germ(f)
        shift = np.zeros((n, n), dtype=complex)
        free = [i for i, order in enumerate(spec.unity_orders) if order is None]
        if free:
            draws = rng.standard_normal(len(free)) + 1j * rng.standard_normal(len(free))
            draws *= magnitude / np.linalg.norm(draws)
            for i, value in zip(free, draws):
                shift[i, i] = value
    quad_scale = magnitude**2
    components = []
    for j in range(n):
        terms = dict(f.components[j].terms)
        for i in range(n):
            if abs(shift[j, i]) == 0:
                continue
            key = tuple(1 if k == i else 0 for k in range(n))
            terms[key] = terms.get(key, 0.0) + shift[j, i]
        if degree >= 2 and quad_scale > 0:
            keys = [tuple((1 if k == a else 0) + (1 if k == b else 0)
                          for k in range(n))
                    for a in range(n) for b in range(a, n)]
            bumps = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
            bumps *= quad_scale / np.linalg.norm(bumps)
            for key, bump in zip(keys, bumps):
                terms[key] = terms.get(key, 0.0) + bump
        components.append(Jet(n, degree, terms))
    return MapGerm(components)


@dataclass
class PerturbationReport:
    M: int
    magnitude: float
    censuses: list
    period_counts: list
    modal_count: int
    stable: bool
    perturbed_maps: list


def perturb_and_count(f, M, magnitude, trials, *, radius=0.5, rng=None,
                      budget=None, mode="full", max_resamples=20,
                      boundary_margin=None):
    """Count period-M points of random perturbations of the germ.

    Each trial draws perturbations until every fixed point of the
    perturbed iterate inside the ball is simple (a degenerate draw is
    resampled, up to the budget), then runs the full census.  The modal
    period-M count and a stability flag (all trials agreeing) summarize
    the experiment.
    """
    rng = as_generator(rng)
    region = Ball.at_origin(f.dim, radius)
    censuses = []
    maps = []
    for _ in range(int(trials)):
        chosen = None
        census = None
        for _ in range(max_resamples):
            candidate = perturb_germ(f, magnitude, rng, mode)
            try:
                census = find_periodic(candidate, region, M, rng=rng,
                                       budget=budget,
                                       boundary_margin=boundary_margin)
            except IncompleteCensusError:
                continue
            # Simplicity of every fixed point of the M-th iterate, read off
            # the orbit multipliers: at a period-L point the multipliers of
            # the M-th iterate are the L-th iterate's raised to M/L.
            simple = all(
                np.all(np.abs(record.multipliers ** (M // record.period) - 1.0)
                       > UNITY_TOL)
                for record in census.records
            )
            if simple and census.records:
                chosen = candidate
                break
        if chosen is None:
            raise PerturbationBudgetError(
                f"no perturbation of magnitude {magnitude:g} made all fixed "
                f"points of the {M}-th iterate simple within {max_resamples} draws"
            )
        censuses.append(census)
        maps.append(chosen)
    period_counts = [census.count(M) for census in censuses]
    values, freq = np.unique(period_counts, return_counts=True)
    modal = int(values[np.argmax(freq)])
    stable = bool(len(set(period_counts)) == 1)
    return PerturbationReport(
        M=M,
        magnitude=magnitude,
        censuses=censuses,
        period_counts=period_counts,
        modal_count=modal,
        stable=stable,
        perturbed_maps=maps,
    )
