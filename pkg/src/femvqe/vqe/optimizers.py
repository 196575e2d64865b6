"""Classical minimizers with a shared energy-tolerance stopping rule.

All three optimizers are monitored the same way: every accepted iterate's
energy lands in a history, and once two consecutive accepted energies differ
by less than cfg.tol the optimizer is asked to stop.  This gives SPSA,
COBYLA and L-BFGS-B identical convergence semantics even though their
native stopping rules differ.

What counts as "accepted" per optimizer:
  SPSA     the(f+ + f-)/2 midpoint of each iteration's perturbation pair,
           plus the initial f(theta0) baseline
  COBYLA   the baseline, each evaluation that improves on the last accepted
           energy by at least tol, and the final iterate when the trust
           region closes.  Probe micro-improvements along the ansatz's
           near-flat directions would otherwise satisfy the tolerance rule
           mid-descent; recording only cumulative-tol progress means the
           closing pair tests whether the tail actually stabilized.
  L-BFGS-B the initial point and each line-search iterate (finite-difference
           probes are counted as evaluations but never accepted)
"""

from __future__ import annotations

import contextlib
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import DegenerateSimplex

STOP_REASONS = ("tolerance_met", "maxiter_reached", "optimizer_internal")


class _StopOptimization(Exception):
    """Internal signal: the shared convergence rule fired."""


# scipy's Fortran COBYLA complains on fd 2 whenever a Python exception
# crosses the f2py callback boundary, which is exactly how the shared stop
# rule terminates it.  The run itself is fine, so those two lines are
# filtered out; everything else written to stderr in the window survives.
_F2PY_NOISE = (b"capi_return is NULL", b"__cobyla__user__routines failed")


@contextlib.contextmanager
def _filtered_fd2():
    saved = os.dup(2)
    spool = tempfile.TemporaryFile()
    try:
        os.dup2(spool.fileno(), 2)
        yield
    finally:
        os.dup2(saved, 2)
        os.close(saved)
        spool.seek(0)
        data = spool.read()
        spool.close()
        if data:
            kept = [
                line
                for line in data.splitlines(keepends=True)
                if not any(pat in line for pat in _F2PY_NOISE)
            ]
            if kept:
                os.write(2, b"".join(kept))


@dataclass
class OptimizeOutcome:
    """History record returned alongside theta_opt by each minimizer."""

    history: tuple  # (iteration, accepted energy) pairs
    evaluations: int
    stop_reason: str
    converged: bool
    best_energy: float


class ConvergenceMonitor:
    """Accepted-energy bookkeeping shared by all optimizers."""

    def __init__(self, tol: float):
        self.tol = tol
        self.history = []
        self.evaluations = 0
        self.stop_requested = False
        self.best_energy = np.inf
        self.best_theta = None

    def accept(self, theta, energy: float) -> None:
        self.history.append((len(self.history), float(energy)))
        if energy < self.best_energy:
            self.best_energy = float(energy)
            self.best_theta = np.array(theta, dtype=float)
        if len(self.history) >= 2 and abs(self.history[-1][1] - self.history[-2][1]) < self.tol:
            self.stop_requested = True

    @property
    def converged(self) -> bool:
        return (
            len(self.history) >= 2
            and abs(self.history[-1][1] - self.history[-2][1]) < self.tol
        )

    def wrap(self, f):
        """Objective wrapper: counts evaluations, raises once a stop is due."""

        def wrapped(theta):
            if self.stop_requested:
                raise _StopOptimization
            self.evaluations += 1
            return float(f(np.asarray(theta, dtype=float)))

        return wrapped

    def outcome(self, stop_reason: str) -> OptimizeOutcome:
        if self.stop_requested:
            stop_reason = "tolerance_met"
        return OptimizeOutcome(
            history=tuple(self.history),
            evaluations=self.evaluations,
            stop_reason=stop_reason,
            converged=self.converged,
            best_energy=float(self.best_energy),
        )


def central_difference(f, theta, step):
    """Second-order finite-difference gradient, one coordinate at a time."""
    grad = np.empty_like(theta)
    for i in range(theta.size):
        probe = theta.copy()
        probe[i] = theta[i] + step
        hi = f(probe)
        probe[i] = theta[i] - step
        lo = f(probe)
        grad[i] = (hi - lo) / (2 * step)
    return grad


def spsa_minimize(f, theta0, cfg):
    """Simultaneous perturbation stochastic approximation.

    Gain sequences a_k = a/(k+1+A)^alpha, c_k = c/(k+1)^gamma with the
    standard exponents; `a` is calibrated so the expected first step has a
    target magnitude, from one baseline evaluation plus 12 probe pairs
    (25 evaluations total).
    """
    opts = dict(cfg.optimizer_options)
    alpha = opts.get("alpha", 0.602)
    gamma = opts.get("gamma", 0.101)
    c = opts.get("c", 0.1)
    big_a = opts.get("big_a", 0.1 * cfg.maxiter)
    target_step = opts.get("target_step", 2 * np.pi / 10)
    probe_pairs = opts.get("probe_pairs", 12)

    theta = np.array(theta0, dtype=float)
    monitor = ConvergenceMonitor(cfg.tol)
    fun = monitor.wrap(f)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x5B5A)))

    stop_reason = "maxiter_reached"
    try:
        monitor.accept(theta, fun(theta))  # baseline, also seeds the history
        a = opts.get("a")
        if a is None:
            slopes = []
            for _ in range(probe_pairs):
                delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
                diff = fun(theta + c * delta) - fun(theta - c * delta)
                slopes.append(abs(diff) / (2 * c))
            mean_slope = float(np.mean(slopes))
            # flat landscape: any finite gain works, the update is zero anyway
            a = target_step * (big_a + 1) ** alpha / max(mean_slope, 1e-30)

        for k in range(cfg.maxiter):
            a_k = a / (k + 1 + big_a) ** alpha
            c_k = c / (k + 1) ** gamma
            delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
            f_plus = fun(theta + c_k * delta)
            f_minus = fun(theta - c_k * delta)
            grad = (f_plus - f_minus) / (2 * c_k) * delta  # delta^-1 == delta
            monitor.accept(theta, (f_plus + f_minus) / 2)
            theta = theta - a_k * grad
            if monitor.stop_requested:
                break
    except _StopOptimization:
        pass

    return monitor.best_theta, monitor.outcome(stop_reason)


def cobyla_minimize(f, theta0, cfg):
    """Derivative-free linear-approximation trust region (scipy backend).

    The trust radius shrinks from rhobeg (default 1 rad) to cfg.tol; the
    shared wrapper can cut the run short before that.  A collapsed simplex
    is retried once from a jittered start before DegenerateSimplex surfaces.
    """
    opts = dict(cfg.optimizer_options)
    rhobeg = opts.get("rhobeg", 1.0)

    theta0 = np.array(theta0, dtype=float)

    monitor = ConvergenceMonitor(cfg.tol)
    inner = monitor.wrap(f)

    def tracked(theta):
        value = inner(theta)
        if not monitor.history:  # baseline f(theta0)
            monitor.accept(theta, value)
        elif monitor.best_energy - value >= cfg.tol:
            monitor.accept(np.array(theta, dtype=float), value)
        return value

    stop_reason = "optimizer_internal"
    try:
        for attempt in (0, 1):
            start = theta0
            if attempt == 1:  # re-span the simplex from a jittered start
                jitter_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xC0B)))
                start = theta0 + jitter_rng.uniform(-1e-3, 1e-3, size=theta0.size)
            with _filtered_fd2():
                result = minimize(
                    tracked,
                    start,
                    method="COBYLA",
                    tol=cfg.tol,
                    options={"rhobeg": rhobeg, "maxiter": cfg.maxiter},
                )
            if result.status == 1:
                # natural stop: the trust region shrank to rhoend.  Fold the
                # final iterate into the accepted stream; a quiet tail shows
                # up as a sub-tol closing pair.
                monitor.accept(np.asarray(result.x, dtype=float), float(result.fun))
                break
            if result.status == 2:
                stop_reason = "maxiter_reached"
                break
        else:
            raise DegenerateSimplex(
                f"COBYLA simplex degenerated twice: {result.message}",
                partial=(monitor.best_theta, monitor.outcome("optimizer_internal")),
            )
    except _StopOptimization:
        pass

    return monitor.best_theta, monitor.outcome(stop_reason)


def lbfgsb_minimize(f, theta0, cfg):
    """L-BFGS-B with central finite-difference gradients.

    Bounds are fixed at [-4pi, 4pi] per angle; scipy's own ftol test is
    disabled so the shared tolerance rule governs energy-based stopping.
    """
    opts = dict(cfg.optimizer_options)
    fd_step = opts.get("fd_step", 1e-6)
    memory = opts.get("memory", 10)
    gtol = opts.get("gtol", 1e-8)
    bound = opts.get("bound", 4 * np.pi)

    monitor = ConvergenceMonitor(cfg.tol)
    fun = monitor.wrap(f)
    cache = {}

    def cached_fun(theta):
        value = fun(theta)
        cache[np.asarray(theta, dtype=float).tobytes()] = value
        return value

    def jac(theta):
        return central_difference(fun, np.asarray(theta, dtype=float), fd_step)

    first_seen = [False]

    def on_eval(theta, value):
        if not first_seen[0]:  # first objective call is f(theta0): accept it
            first_seen[0] = True
            monitor.accept(theta, value)

    def tracked(theta):
        value = cached_fun(theta)
        on_eval(theta, value)
        return value

    def callback(xk):
        key = np.asarray(xk, dtype=float).tobytes()
        value = cache.get(key)
        if value is None:
            value = cached_fun(xk)
        monitor.accept(xk, value)

    theta0 = np.array(theta0, dtype=float)
    stop_reason = "optimizer_internal"
    result = None
    try:
        result = minimize(
            tracked,
            theta0,
            method="L-BFGS-B",
            jac=jac,
            bounds=[(-bound, bound)] * theta0.size,
            callback=callback,
            options={"maxiter": cfg.maxiter, "maxcor": memory, "ftol": 0.0, "gtol": gtol},
        )
        stop_reason = "maxiter_reached" if result.status == 1 else "optimizer_internal"
        if result.status == 0 and not monitor.stop_requested:
            # natural gradient-norm stop: the returned optimum is the final
            # accepted iterate (on a flat landscape the callback never fires,
            # so this is what closes the consecutive-energy pair)
            monitor.accept(result.x, float(result.fun))
    except _StopOptimization:
        pass

    return monitor.best_theta, monitor.outcome(stop_reason)


MINIMIZERS = {
    "SPSA": spsa_minimize,
    "COBYLA": cobyla_minimize,
    "LBFGSB": lbfgsb_minimize,
}
