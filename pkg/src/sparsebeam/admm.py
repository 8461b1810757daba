"""Consensus ADMM engine: one auxiliary beamformer copy per constraint.

Per iteration the consensus variable is the closed-form average
w = rho/(2 + rho*L) * sum_l (v_l + u_l); each auxiliary copy then shrinks
w - u_l groupwise and projects onto its own constraint set, and the scaled
duals absorb the disagreement.  The L copy updates are independent and may
run on a thread pool; results are gathered by constraint index and summed in
a fixed order, so histories are bit-identical for any parallelism width.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, InfeasibleProblemError, ProjectionError
from .problem import objective
from .projections import project
from .shrinkage import group_shrink


class WeakPenaltyWarning(UserWarning):
    """rho/2 is not comfortably above eta/L.

    The v-update treats the penalized subproblem as a plain nearest-point
    projection, which is justified only when the quadratic coupling dominates
    the shrinkage weight; this warning fires when rho/2 < 10*eta/L.
    """


@dataclass(frozen=True)
class AdmmConfig:
    """Solver knobs: shrinkage weight, penalty, iteration budget, tolerances.

    ``primal_tol``/``dual_tol`` enable early stopping only when both are set;
    the default is a fixed ``k_max`` iteration budget.  ``parallel`` is the
    thread-pool width for the per-constraint updates.
    """

    eta: float
    rho: float
    k_max: int = 100
    primal_tol: float = None
    dual_tol: float = None
    parallel: int = 1

    def __post_init__(self):
        if self.eta < 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if not self.rho > 0:
            raise ConfigurationError(f"rho must be > 0, got {self.rho}")
        if int(self.k_max) != self.k_max or self.k_max < 0:
            raise ConfigurationError(f"k_max must be an integer >= 0, got {self.k_max}")
        for name in ("primal_tol", "dual_tol"):
            tol = getattr(self, name)
            if tol is not None and not tol > 0:
                raise ConfigurationError(f"{name} must be > 0 when set, got {tol}")
        if int(self.parallel) != self.parallel or self.parallel < 1:
            raise ConfigurationError(f"parallel must be an integer >= 1, got {self.parallel}")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective: float
    primal_residual: float
    dual_residual: float


@dataclass(eq=False)
class AdmmState:
    """Consensus variable, auxiliary copies, scaled duals, and the history."""

    w: np.ndarray
    v: np.ndarray  # (L, M*N)
    u: np.ndarray  # (L, M*N)
    k: int = 0
    history: list = field(default_factory=list)


def check_penalty_ratio(config, L):
    """Warn when rho/2 < 10*eta/L (the projection premise is then weak)."""
    if L >= 1 and config.rho / 2.0 < 10.0 * config.eta / L:
        warnings.warn(
            f"rho/2 = {config.rho / 2.0:g} is below 10*eta/L = "
            f"{10.0 * config.eta / L:g}; the projection-based v-update assumes "
            "the quadratic penalty dominates the shrinkage weight",
            WeakPenaltyWarning,
            stacklevel=3,
        )


def update_w(v, u, rho):
    """Closed-form consensus update: rho/(2 + rho*L) * sum_l (v_l + u_l)."""
    L = v.shape[0]
    total = (v + u).sum(axis=0)
    return (rho / (2.0 + rho * L)) * total


def update_u(u, v_new, w_new):
    """Scaled dual ascent: u_l + v_l - w."""
    return u + v_new - w_new[np.newaxis, :]


def update_v(problem, w, u, eta, rho, parallel=1):
    """Shrink-then-project every auxiliary copy; independent across l."""
    L = problem.L

    def one(l):
        c = w - u[l]
        vbar = group_shrink(c, eta, rho, L, problem.M, problem.N)
        try:
            return project(problem.constraints[l], vbar).v
        except ProjectionError as err:
            raise ProjectionError(
                f"constraint l={l} ({problem.constraints[l].describe()}): {err}",
                dict(err.diagnostics, constraint_index=l),
            ) from err

    if parallel > 1 and L > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(one, range(L)))
    else:
        rows = [one(l) for l in range(L)]
    if not rows:
        return np.zeros((0, problem.size), dtype=complex)
    return np.array(rows)


def cyclic_projection(problem, w, max_sweeps=500, tol=1e-8, stall_window=25):
    """Feasibility restoration by cyclic nearest-point projections.

    Sweeps the constraints in their fixed order, projecting whenever one is
    violated, until the worst violation falls below ``tol``; gives up early
    when ``stall_window`` consecutive sweeps fail to improve the best worst
    violation by at least 0.1%.  Returns (w, max_violation, converged).
    """
    w = np.asarray(w, dtype=complex).copy()
    best = np.inf
    stalled = 0
    for _ in range(max_sweeps):
        for c in problem.constraints:
            if c.violation(w) > 0.0:
                w = project(c, w).v
        current = problem.max_violation(w)
        if current <= tol:
            return w, current, True
        if current < best * (1.0 - 1e-3):
            best = current
            stalled = 0
        else:
            stalled += 1
            if stalled >= stall_window:
                break
    return w, problem.max_violation(w), False


def _zero_forcing_start(problem):
    """Per-user zero-forcing beams scaled to twice each SINR target."""
    M, N = problem.M, problem.N
    w = np.zeros(M * N, dtype=complex)
    if not problem.channels:
        return w
    H = np.column_stack([ch.h for ch in problem.channels])
    gram = H.conj().T @ H
    try:
        X = np.linalg.solve(gram, np.eye(M, dtype=complex))
    except np.linalg.LinAlgError:
        X = np.linalg.pinv(gram)
    W_zf = H @ X
    for m, ch in enumerate(problem.channels):
        col = W_zf[:, m]
        gain = np.vdot(ch.h, col)  # h^H w, equals 1 when the inverse is exact
        if abs(gain) > 1e-12:
            col = col * (np.sqrt(2.0 * ch.sinr_target * ch.noise_variance) / gain)
        w[m * N : (m + 1) * N] = col
    return w


def _mainlobe_boost(problem, w):
    """Smallest tau so that block 0 plus tau*a(center) clears 1.2x each floor."""
    passbands = problem.constraints_of_kind("passband")
    if not passbands:
        return w
    center = np.mean([c.angle_deg for c in passbands])
    anchor = min(passbands, key=lambda c: abs(c.angle_deg - center))
    a_c = anchor.steering
    N = problem.N
    block0 = w[:N]
    tau = 0.0
    for c in passbands:
        a = c.steering
        others = c.response(w) - abs(np.vdot(a, block0)) ** 2
        need = 1.2 * c.threshold - others
        ci = np.vdot(a, block0)  # a^H w_0
        if abs(ci) ** 2 >= need:
            continue
        gi = np.vdot(a, a_c)
        if abs(gi) == 0.0:
            continue  # this angle cannot be lifted by the anchor; POCS will
        aa = abs(gi) ** 2
        bb = 2.0 * (np.conj(ci) * gi).real
        cc = abs(ci) ** 2 - need
        disc = bb * bb - 4.0 * aa * cc
        root = (-bb + np.sqrt(max(disc, 0.0))) / (2.0 * aa)
        tau = max(tau, root)
    if tau > 0.0:
        w = w.copy()
        w[:N] = w[:N] + tau * a_c
    return w


def restore_feasibility(problem, w, tol=1e-9, max_rounds=3):
    """Cyclic projections with violation-descent rescue rounds.

    Plain projection sweeps stall on some nonconvex instances; each rescue
    round descends the squared-hinge violation surrogate from the stalled
    point and projects again.  Returns (w, max_violation, converged).
    """
    w, violation, ok = cyclic_projection(problem, w, max_sweeps=300, tol=tol)
    for _ in range(max_rounds):
        if ok:
            break
        w = _violation_descent(problem, w)
        w, violation, ok = cyclic_projection(problem, w, max_sweeps=300, tol=tol)
    return w, violation, ok


def _violation_descent(problem, w0, max_iter=600):
    """L-BFGS on the smooth sum of squared constraint violations.

    Cyclic projections alone limit-cycle on roughly half the hard subarray
    instances (the passband and SINR sets are nonconvex); descending the
    squared-hinge surrogate first lands inside the right basin, after which
    the projections finish the job.
    """
    n = problem.size
    constraints = problem.constraints

    def fun(x):
        v = x[:n] + 1j * x[n:]
        value = 0.0
        grad = np.zeros(n, dtype=complex)
        for c in constraints:
            violation = c.quad(v) - c.f
            if violation > 0.0:
                value += violation * violation
                grad += (2.0 * violation) * c.f_action(v)
        return value, 2.0 * np.concatenate([grad.real, grad.imag])

    x0 = np.concatenate([w0.real, w0.imag])
    res = minimize(
        fun, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": 1e-16, "ftol": 1e-20},
    )
    return res.x[:n] + 1j * res.x[n:]


def find_feasible_point(problem, seed=0):
    """A point satisfying every constraint, for initializing the consensus.

    Stage 1 builds zero-forcing user beams with doubled SINR targets, stage 2
    lifts the mainlobe floor with a steering injection, stage 3 runs cyclic
    projections.  Stage 4 retries from fresh random starts and perturbations
    of the best point, each pushed through a violation descent before the
    projections.  A run is abandoned as infeasible when 20 restarts are
    exhausted, or sooner when eight independent basins all floor far from
    feasibility.
    """
    if problem.L == 0:
        return np.zeros(problem.size, dtype=complex)
    rng = np.random.default_rng(seed)
    w = _zero_forcing_start(problem)
    w = _mainlobe_boost(problem, w)
    w, violation, ok = cyclic_projection(problem, w)
    best_w, best_violation = w, violation
    restarts = 0
    while not ok and restarts < 20:
        restarts += 1
        if restarts == 1:
            start = best_w
        elif restarts % 2 == 0:
            scale = rng.uniform(0.3, 3.0)
            start = scale * (
                rng.standard_normal(problem.size)
                + 1j * rng.standard_normal(problem.size)
            )
        else:
            scale = 0.25 * restarts * (1.0 + np.linalg.norm(best_w))
            noise = rng.standard_normal(problem.size) + 1j * rng.standard_normal(
                problem.size
            )
            start = best_w + scale * noise / np.sqrt(problem.size)
        start = _violation_descent(problem, start)
        w, violation, ok = cyclic_projection(problem, start)
        if violation < best_violation:
            best_w, best_violation = w, violation
        if restarts >= 8 and best_violation > 1e-2:
            break
    if not ok:
        raise InfeasibleProblemError(
            f"no feasible point found after {restarts} restarts "
            f"(best max violation {best_violation:.3e})",
            problem.worst_violations(best_w),
        )
    return w


def initialize(problem, seed=0):
    """Feasible consensus start: every v_l at the feasible point, duals zero."""
    w0 = find_feasible_point(problem, seed)
    L = problem.L
    v = np.tile(w0, (L, 1)) if L else np.zeros((0, problem.size), dtype=complex)
    u = np.zeros((L, problem.size), dtype=complex)
    return AdmmState(w=w0.copy(), v=v, u=u, k=0, history=[])


def solve(problem, config, seed=0):
    """Run the consensus iteration for k_max rounds (or to the tolerances).

    Deterministic for a fixed seed, constraint order, and any ``parallel``
    width.  Projection failures abort with the iteration and constraint in
    the message: silently skipping a constraint would corrupt the consensus.
    """
    check_penalty_ratio(config, problem.L)
    state = initialize(problem, seed)
    eta, rho = config.eta, config.rho
    w_prev = state.w
    for k in range(config.k_max):
        w_new = update_w(state.v, state.u, rho)
        try:
            v_new = update_v(problem, w_new, state.u, eta, rho, config.parallel)
        except ProjectionError as err:
            raise ProjectionError(
                f"iteration {k + 1}: {err}", dict(err.diagnostics, iteration=k + 1)
            ) from err
        u_new = update_u(state.u, v_new, w_new)
        primal = float(
            np.max(np.linalg.norm(v_new - w_new[np.newaxis, :], axis=1))
        ) if problem.L else 0.0
        dual = rho * float(np.linalg.norm(w_new - w_prev))
        state.w, state.v, state.u = w_new, v_new, u_new
        state.k = k + 1
        state.history.append(
            IterationRecord(
                k=k + 1,
                objective=objective(w_new, eta, problem.M, problem.N),
                primal_residual=primal,
                dual_residual=dual,
            )
        )
        w_prev = w_new
        if (
            config.primal_tol is not None
            and config.dual_tol is not None
            and primal <= config.primal_tol
            and dual <= config.dual_tol
        ):
            break
    return state
