"""Closed-loop grey-box identification of first-order rate dynamics.

The logged reference is replayed through the same proportional controller
that flew the data, the model is rolled out with forward Euler at the data
rate, and (a, b) are chosen to minimise the simulation error. An exhaustive
grid search serves as an independent oracle for the local optimiser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NonFiniteCost

DEFAULT_BOUNDS = ((-20.0, -0.01), (0.01, 100.0))
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class IdDataset:
    Ts: float
    K_id: float
    angle: np.ndarray
    rate: np.ndarray
    ref: np.ndarray

    def __post_init__(self):
        for name in ("angle", "rate", "ref"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.angle)
        if len(self.rate) != n or len(self.ref) != n:
            raise ValueError("angle, rate and ref must have equal length")
        if n < 10:
            raise ValueError("need at least 10 samples")
        if not self.Ts > 0:
            raise ValueError("Ts must be positive")
        if not (np.all(np.isfinite(self.angle)) and np.all(np.isfinite(self.rate))
                and np.all(np.isfinite(self.ref))):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return len(self.angle)


@dataclass(frozen=True)
class IdResult:
    a_hat: float
    b_hat: float
    cost: float
    converged: bool
    iterations: int
    flat: bool = False


def simulate_closed_loop(a, b, dataset):
    """Euler rollout of the closed loop. ``a`` and ``b`` may be arrays of
    equal shape, in which case every candidate is simulated at once and the
    outputs carry the time axis last."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(dataset)
    shape = np.broadcast(a, b).shape
    angle = np.empty(shape + (n,))
    rate = np.empty(shape + (n,))
    phi = np.full(shape, dataset.angle[0])
    phid = np.full(shape, dataset.rate[0])
    angle[..., 0] = phi
    rate[..., 0] = phid
    Ts, K = dataset.Ts, dataset.K_id
    ref = dataset.ref
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n - 1):
            u = K * (ref[k] - phi)
            phi, phid = phi + Ts * phid, phid + Ts * (a * phid + b * u)
            angle[..., k + 1] = phi
            rate[..., k + 1] = phid
    return angle, rate


def _cost_from_rollout(angle, rate, dataset):
    with np.errstate(over="ignore", invalid="ignore"):
        ea = np.linalg.norm(dataset.angle[1:] - angle[..., 1:], axis=-1)
        er = np.linalg.norm(dataset.rate[1:] - rate[..., 1:], axis=-1)
        cost = ea + er
    return np.where(np.isfinite(cost), cost, np.inf)


def id_cost(a, b, dataset):
    """2-norm of the angle error plus 2-norm of the rate error, samples 1..N."""
    angle, rate = simulate_closed_loop(a, b, dataset)
    cost = _cost_from_rollout(angle, rate, dataset)
    return float(cost) if np.ndim(cost) == 0 else cost


def _checked_cost(a, b, dataset):
    c = id_cost(a, b, dataset)
    if not math.isfinite(c):
        raise NonFiniteCost(f"rollout diverged for a={a}, b={b}")
    return c


def oracle_grid(dataset, bounds=DEFAULT_BOUNDS, resolution=200):
    """Brute-force argmin of ``id_cost`` on a uniform grid over ``bounds``."""
    (a_lo, a_hi), (b_lo, b_hi) = bounds
    res_a, res_b = (resolution, resolution) if np.isscalar(resolution) else resolution
    a_grid = np.linspace(a_lo, a_hi, res_a)
    b_grid = np.linspace(b_lo, b_hi, res_b)
    A, B = np.meshgrid(a_grid, b_grid, indexing="ij")
    costs = id_cost(A, B, dataset)
    i, j = np.unravel_index(np.argmin(costs), costs.shape)
    finite = costs[np.isfinite(costs)]
    flat = finite.size > 0 and float(finite.max() - finite.min()) < FLAT_TOL
    return IdResult(float(A[i, j]), float(B[i, j]), float(costs[i, j]),
                    converged=not flat, iterations=costs.size, flat=flat)


def _residuals(theta, dataset, scale):
    a, b = theta * scale
    angle, rate = simulate_closed_loop(a, b, dataset)
    r = np.concatenate([dataset.angle[1:] - angle[1:], dataset.rate[1:] - rate[1:]])
    if not np.all(np.isfinite(r)):
        return np.full_like(r, 1e6)
    return r


def identify(dataset, bounds=DEFAULT_BOUNDS, init=None, grid=5, oracle=None):
    """Multi-start local identification of (a, b).

    Starts are a ``grid`` x ``grid`` lattice over ``bounds``, the optional
    ``init`` point and the argmin of ``oracle`` (an :func:`oracle_grid`
    result). Each start is refined with a bounded least-squares solve on the
    stacked residuals and polished with Nelder-Mead on the actual cost. The
    best point found is returned, so the result never scores worse than any
    start.
    """
    (a_lo, a_hi), (b_lo, b_hi) = bounds
    if not (a_lo < a_hi <= 0 and 0 <= b_lo < b_hi):
        raise ValueError("bounds must satisfy a_lo < a_hi <= 0 <= b_lo < b_hi")
    starts = [(a, b) for a in np.linspace(a_lo, a_hi, grid) for b in np.linspace(b_lo, b_hi, grid)]
    if init is not None:
        if not (a_lo <= init[0] <= a_hi and b_lo <= init[1] <= b_hi):
            raise ValueError("init outside bounds")
        starts.append(tuple(init))
    if oracle is not None:
        starts.append((oracle.a_hat, oracle.b_hat))

    start_costs = np.array([id_cost(a, b, dataset) for a, b in starts])
    finite = start_costs[np.isfinite(start_costs)]
    if finite.size and float(finite.max() - finite.min()) < FLAT_TOL:
        k = int(np.argmin(start_costs))
        return IdResult(starts[k][0], starts[k][1], float(start_costs[k]),
                        converged=False, iterations=0, flat=True)

    scale = np.array([max(abs(a_lo), abs(a_hi)), max(abs(b_lo), abs(b_hi))])
    lo, hi = np.array([a_lo, b_lo]) / scale, np.array([a_hi, b_hi]) / scale
    best = (float(np.min(start_costs)), *starts[int(np.argmin(start_costs))])
    iterations = 0
    order = np.argsort(start_costs)
    for k in order:
        x0 = np.clip(np.array(starts[k]) / scale, lo, hi)
        sol = optimize.least_squares(_residuals, x0, bounds=(lo, hi), args=(dataset, scale),
                                     x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14,
                                     max_nfev=400)
        iterations += sol.nfev
        a, b = np.clip(sol.x, lo, hi) * scale
        c = id_cost(a, b, dataset)
        if c < best[0]:
            best = (c, a, b)

    def scaled_cost(theta):
        th = np.clip(theta, lo, hi) * scale
        c = id_cost(th[0], th[1], dataset)
        return c if math.isfinite(c) else 1e300

    x0 = np.array([best[1], best[2]]) / scale
    prev_cost = best[0]
    converged = False
    for _ in range(20):
        res = optimize.minimize(scaled_cost, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        iterations += res.nit
        xa = np.clip(res.x, lo, hi)
        c = scaled_cost(xa)
        step = float(np.max(np.abs(xa - x0)))
        if c < best[0]:
            best = (c, *(xa * scale))
        if prev_cost - c < 1e-10 or step < 1e-8:
            converged = True
            break
        x0, prev_cost = xa, min(prev_cost, c)
    return IdResult(float(best[1]), float(best[2]), float(best[0]), converged, iterations)


def square_wave(n, Ts, amplitude=0.3, period=2.0):
    t = np.arange(n) * Ts
    return amplitude * np.where(np.floor(2.0 * t / period) % 2 == 0, 1.0, -1.0)


def synthetic_dataset(a=-2.3, b=12.6, n=500, Ts=0.02, K_id=0.5, ref=None, noise=0.0, seed=0,
                      angle0=0.0, rate0=0.0):
    """Closed-loop data generated by the identification model itself.

    With ``noise`` > 0, Gaussian noise of that standard deviation is added to
    both logged outputs after the rollout.
    """
    if ref is None:
        ref = square_wave(n, Ts)
    seed_ds = IdDataset(Ts, K_id, np.full(n, angle0), np.full(n, rate0), ref)
    angle, rate = simulate_closed_loop(a, b, seed_ds)
    if noise > 0:
        rng = np.random.default_rng(seed)
        angle = angle + rng.normal(0.0, noise, n)
        rate = rate + rng.normal(0.0, noise, n)
        angle[0], rate[0] = angle0, rate0
    return IdDataset(Ts, K_id, angle, rate, np.asarray(ref, dtype=float))
