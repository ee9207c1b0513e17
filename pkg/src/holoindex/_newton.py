"""Batched multi-start Newton searches in complex balls.

Two search modes share one iteration core:

* ``count_preimages`` counts solutions of F(x) = q inside a ball for a
  small random target q, the numerical realization of a local degree.  The
  count is re-verified against a second independent target, every witness
  must have a nonsingular Jacobian, and witnesses near the bounding sphere
  abort the computation instead of silently spilling.

* ``find_zeros`` locates the solution set of F(x) = 0 inside a ball,
  including multiple zeros.  Acceptance is based on the size of the last
  Newton step rather than the raw residual, which keeps nearly-flat maps
  (such as high iterates close to the identity) from flooding the result
  with spurious roots.

Starts are quasi-random (scrambled Sobol) with log-spread radii so that
root clusters at different scales are all seeded, plus deterministic ray
starts.  All randomness flows through one numpy Generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import BoundaryLeakageError, InstabilityError

DEFAULT_SEED = 20250809


def as_generator(rng):
    """Accept a Generator, a seed, or None (fixed default seed)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng(DEFAULT_SEED)
    return np.random.default_rng(rng)


@dataclass
class NewtonBudget:
    """Knobs of the multi-start search.

    ``expected_order`` scales the number of quasi-random starts
    (``starts_factor`` per expected solution); ray starts are added on
    ``rays`` fixed directions at geometrically spaced radii.
    """

    expected_order: int | None = None
    starts_factor: int = 200
    rays: int = 16
    ray_radii: int = 8
    max_iter: int = 80
    max_starts: int = 40000

    def n_starts(self, default_order):
        order = self.expected_order if self.expected_order else default_order
        return min(self.max_starts, self.starts_factor * max(1, order))


@dataclass
class SearchResult:
    count: int
    points: np.ndarray           # (count, dim)
    target: np.ndarray | None    # q for preimage searches, None for zeros
    conditions: np.ndarray       # Jacobian condition numbers at the points
    radius: float


def _unit_directions(rng, n_points, dim):
    z = rng.standard_normal((n_points, dim)) + 1j * rng.standard_normal((n_points, dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return z / norms


def _sobol_starts(rng, n_points, dim, center, radius, radius_decades=3.0):
    """Quasi-random starts: Sobol directions with log-uniform radii."""
    m = max(1, int(np.ceil(np.log2(max(2, n_points)))))
    sampler = qmc.Sobol(d=2 * dim + 1, scramble=True, seed=rng)
    u = sampler.random_base2(m)[:n_points]
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    gauss = ndtri(u[:, : 2 * dim])
    vec = gauss[:, :dim] + 1j * gauss[:, dim:2 * dim]
    norms = np.linalg.norm(vec, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    directions = vec / norms
    radii = radius * np.power(10.0, -radius_decades * u[:, -1])
    return center + directions * radii[:, None]


def _ray_starts(rng, budget, dim, center, radius):
    directions = _unit_directions(rng, budget.rays, dim)
    radii = radius * np.power(0.5, np.arange(budget.ray_radii))
    pts = (directions[None, :, :] * radii[:, None, None]).reshape(-1, dim)
    return center + pts


def _newton_sweep(evaluate, jacobian, starts, center, radius, target, max_iter):
    """Run Newton from all starts; returns final points and step sizes."""
    x = np.array(starts, dtype=complex)
    n = x.shape[-1]
    escape = 8.0 * radius
    steps = np.full(x.shape[0], np.inf)
    active = np.ones(x.shape[0], dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            if not active.any():
                break
            xa = x[active]
            f = evaluate(xa)
            if target is not None:
                f = f - target
            j = jacobian(xa)
            # Overflowing trajectories and exactly singular Jacobians are
            # neutralized for this round: they take an identity step and
            # either recover or fail the acceptance test.
            finite = np.isfinite(f).all(axis=1) & np.isfinite(j).all(axis=(1, 2))
            dets = np.where(finite, np.linalg.det(np.where(
                np.isfinite(j), j, 0.0)), 0.0)
            bad = ~finite | (np.abs(dets) < 1e-280)
            if bad.any():
                j = np.where(np.isfinite(j), j, 0.0)
                f = np.where(np.isfinite(f), f, 0.0)
                j[bad] = np.eye(n)
            delta = np.linalg.solve(j, f[..., None])[..., 0]
            xa = xa - delta
            x[active] = xa
            sizes = np.linalg.norm(delta, axis=1)
            # An identity-substituted round is not a Newton step: it cannot
            # certify convergence unless the value is exactly zero.
            if bad.any():
                fnorm = np.linalg.norm(f, axis=1)
                sizes = np.where(bad & (fnorm > 0.0), np.inf, sizes)
            idx = np.nonzero(active)[0]
            steps[idx] = sizes
            # Freeze runaway trajectories (no in-ball roots there) and
            # machine-precision converged ones (their step is final).
            done = sizes < 1e-13 * radius
            run = ~np.isfinite(sizes) | (np.linalg.norm(xa - center, axis=1) > escape)
            stop = done | run
            if stop.any():
                active[idx[stop]] = False
    return x, steps


def _dedup_sorted(points, tol, scores=None):
    """Deterministic greedy dedup; clusters keep their best-score member.

    Without scores the order is lexicographic; with scores (for example
    residual norms) the smallest score within a cluster survives.
    """
    if len(points) == 0:
        return points
    lex_keys = tuple(
        key for i in range(points.shape[1] - 1, -1, -1)
        for key in (points[:, i].imag, points[:, i].real)
    )
    if scores is None:
        order = np.lexsort(lex_keys)
    else:
        order = np.lexsort(lex_keys + (np.asarray(scores),))
    pts = points[order]
    kept = [pts[0]]
    for p in pts[1:]:
        dists = np.linalg.norm(np.asarray(kept) - p, axis=1)
        if dists.min() > tol:
            kept.append(p)
    return np.asarray(kept)


def _condition_numbers(jacobian, points):
    if len(points) == 0:
        return np.zeros(0)
    j = jacobian(points)
    sing = np.linalg.svd(j, compute_uv=False)
    smin = sing[..., -1]
    smax = sing[..., 0]
    with np.errstate(divide="ignore"):
        return np.where(smin > 0, smax / smin, np.inf)


def find_zeros(evaluate, jacobian, dim, center, radius, rng, budget=None, *,
               step_tol_factor=1e-9, dedup_factor=1e-7, default_order=8,
               residual_cap=None, extra_starts=None):
    """All zeros of F inside the ball, located by multi-start Newton.

    A trajectory counts as a zero when its final Newton step is below
    ``step_tol_factor * radius``; the step length is scale-free in F, so
    multiple zeros and nearly-identity maps are handled uniformly.
    ``extra_starts`` seeds the search with externally known candidates.
    """
    rng = as_generator(rng)
    budget = budget or NewtonBudget()
    center = np.asarray(center, dtype=complex)
    blocks = [
        _sobol_starts(rng, budget.n_starts(default_order), dim, center, radius),
        _ray_starts(rng, budget, dim, center, radius),
        center[None, :],
    ]
    if extra_starts is not None and len(extra_starts):
        blocks.append(np.asarray(extra_starts, dtype=complex))
    starts = np.concatenate(blocks)
    final, steps = _newton_sweep(evaluate, jacobian, starts, center, radius,
                                 None, budget.max_iter)
    ok = steps <= step_tol_factor * radius
    inside = np.linalg.norm(final - center, axis=1) <= radius
    candidates = final[ok & inside]
    if residual_cap is not None and len(candidates):
        res = np.linalg.norm(evaluate(candidates), axis=1)
        candidates = candidates[res <= residual_cap]
    if len(candidates) == 0:
        empty = candidates.reshape(0, dim)
        return SearchResult(count=0, points=empty, target=None,
                            conditions=np.zeros(0), radius=radius)
    # Multiple zeros collect a converged cloud whose spread is set by the
    # Jacobian noise floor, far wider than the dedup radius for simple
    # roots.  Candidates with a numerically singular Jacobian are therefore
    # clustered coarsely, each cluster keeping its smallest-residual member.
    with np.errstate(all="ignore"):
        sing = np.linalg.svd(jacobian(candidates), compute_uv=False)
        ratio = np.where(sing[..., 0] > 0, sing[..., -1] / sing[..., 0], 0.0)
        ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    regular = candidates[ratio > 1e-6]
    degenerate = candidates[ratio <= 1e-6]
    blocks = []
    if len(regular):
        blocks.append(_dedup_sorted(regular, dedup_factor * radius))
    if len(degenerate):
        residuals = np.linalg.norm(evaluate(degenerate), axis=1)
        blocks.append(_dedup_sorted(degenerate, 1e-3 * radius, residuals))
    points = np.concatenate(blocks) if blocks else candidates.reshape(0, dim)
    points = _dedup_sorted(points, dedup_factor * radius)
    conditions = _condition_numbers(jacobian, points)
    return SearchResult(count=len(points), points=points, target=None,
                        conditions=conditions, radius=radius)


def _preimage_single(evaluate, jacobian, dim, center, radius, target, rng,
                     budget, default_order, resid_tol, dedup_factor,
                     boundary_factor, step_tol):
    starts = np.concatenate([
        _sobol_starts(rng, budget.n_starts(default_order), dim, center, radius),
        _ray_starts(rng, budget, dim, center, radius),
    ])
    final, steps = _newton_sweep(evaluate, jacobian, starts, center, radius,
                                 target, budget.max_iter)
    values = evaluate(final) - target
    residuals = np.linalg.norm(values, axis=1)
    # Residual and step must both be small: the residual certifies the
    # value, the scale-free step excludes near-miss blobs when the target
    # magnitude is many orders below the coefficient scale.
    converged = final[(residuals <= resid_tol) & (steps <= step_tol)]
    dist = np.linalg.norm(converged - center, axis=1)
    margin = boundary_factor * radius
    near_sphere = (dist > radius - margin) & (dist < radius + margin)
    if near_sphere.any():
        offender = converged[near_sphere][0]
        raise BoundaryLeakageError(
            f"witness at distance {np.linalg.norm(offender - center):.6g} of the "
            f"center sits within {margin:.3g} of the sphere of radius {radius:.6g}; "
            "shrink the ball or check that the zero is isolated"
        )
    inside = converged[dist <= radius - margin]
    return _dedup_sorted(inside, dedup_factor * radius)


def count_preimages(evaluate, jacobian, dim, center, radius, target_scale, rng,
                    budget=None, *, default_order=8, dedup_factor=1e-7,
                    boundary_factor=0.05, resid_factor=1e-9,
                    step_tol_factor=1e-9, condition_cap=1e10):
    """Count solutions of F(x) = q in the ball for |q| = target_scale.

    Two independent targets are sampled; their counts must agree, otherwise
    the configuration is reported unstable.  Witnesses of the first target
    are returned with their Jacobian condition numbers.
    """
    rng = as_generator(rng)
    budget = budget or NewtonBudget()
    center = np.asarray(center, dtype=complex)
    resid_tol = max(resid_factor * target_scale, 1e-13)
    step_tol = step_tol_factor * radius
    witnesses = None
    first_target = None
    counts = []
    for attempt in range(2):
        target = target_scale * _unit_directions(rng, 1, dim)[0]
        points = _preimage_single(evaluate, jacobian, dim, center, radius,
                                  target, rng, budget, default_order,
                                  resid_tol, dedup_factor, boundary_factor,
                                  step_tol)
        counts.append(len(points))
        if attempt == 0:
            witnesses = points
            first_target = target
    if counts[0] != counts[1]:
        raise InstabilityError(
            f"regular-value counts disagree ({counts[0]} vs {counts[1]}): "
            "change the target magnitude or enlarge the search budget"
        )
    conditions = _condition_numbers(jacobian, witnesses)
    if np.any(~np.isfinite(conditions)) or np.any(conditions > condition_cap):
        raise InstabilityError(
            "a witness Jacobian is numerically singular; the sampled value "
            "is not regular, resample with a different seed or magnitude"
        )
    return SearchResult(count=counts[0], points=witnesses, target=first_target,
                        conditions=conditions, radius=radius)
