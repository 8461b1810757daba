"""Design metrics: transmit power, MSRR, beampattern, SINR, feasibility."""

from dataclasses import dataclass

import numpy as np

from .arrays import linear_to_db, steering_vector
from .problem import group_norms, user_blocks

CONSTRAINT_KINDS = ("passband", "stopband", "antenna_power", "sinr")


def tx_power(w):
    """Total transmit power: the squared norm of the stack."""
    w = np.asarray(w)
    return float(np.vdot(w, w).real)


def responses(w, geometry, angles_deg, M):
    """Transmit response sum_m |a(theta)^H w_m|^2 at each angle."""
    N = geometry.num_antennas
    A = np.column_stack([steering_vector(geometry, t) for t in angles_deg])
    W = user_blocks(w, M, N)
    proj = W.conj() @ A  # (M, n_angles) of w_m^H a
    return (np.abs(proj) ** 2).sum(axis=0)


def msrr(w, problem):
    """Mainlobe-to-sidelobe response ratio over the constraint grids.

    Returns +inf when the stopband response vanishes but the mainlobe does
    not, and nan for the all-zero beamformer (0/0).
    """
    main = float(responses(w, problem.geometry, problem.grids.mainlobe, problem.M).sum())
    stop = float(responses(w, problem.geometry, problem.grids.stopband, problem.M).sum())
    if stop == 0.0:
        return float("inf") if main > 0.0 else float("nan")
    return main / stop


def beampattern(w, problem, step_deg=0.5):
    """(angles, responses) over a fine display grid spanning [-90, 90].

    The display grid is finer than the constraint grid on purpose, so
    between-grid sidelobe excursions show up in reports.
    """
    angles = np.arange(-90.0, 90.0 + step_deg / 2.0, step_deg)
    return angles, responses(w, problem.geometry, angles, problem.M)


def sinr_per_user(w, channels, M, N):
    """Achieved downlink SINR of every user (linear)."""
    W = user_blocks(w, M, N)
    out = np.zeros(len(channels))
    for i, ch in enumerate(channels):
        coef = W @ np.conj(ch.h)
        power = np.abs(coef) ** 2
        signal = float(power[ch.index])
        interference = float(power.sum() - power[ch.index])
        out[i] = signal / (interference + ch.noise_variance)
    return out


def antenna_power(w, M, N):
    """Radiated power per antenna: squared group norms."""
    return group_norms(w, M, N) ** 2


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    """Signed slack per constraint plus per-kind worst violations."""

    slacks: np.ndarray
    violations: np.ndarray
    max_violation_by_kind: dict
    tolerance: float
    passed: bool


def feasibility_report(w, problem, tol=1e-6):
    """Evaluate every constraint; a design passes when no violation exceeds tol."""
    slacks = problem.slacks(w)
    violations = np.maximum(0.0, -slacks)
    by_kind = {}
    for kind in CONSTRAINT_KINDS:
        vals = [
            violations[l]
            for l, c in enumerate(problem.constraints)
            if c.kind == kind
        ]
        if vals:
            by_kind[kind] = float(max(vals))
    return FeasibilityReport(
        slacks=slacks,
        violations=violations,
        max_violation_by_kind=by_kind,
        tolerance=tol,
        passed=bool(violations.max(initial=0.0) <= tol),
    )


@dataclass(frozen=True, eq=False)
class DesignReport:
    """Metrics bundle for one beamformer design."""

    tx_power_w: float
    msrr: float
    msrr_db: float
    sinr: np.ndarray
    antenna_power_w: np.ndarray
    max_violation_by_kind: dict
    feasible: bool
    pattern_angles_deg: np.ndarray
    pattern_response: np.ndarray
    support: tuple = None


def design_report(w, problem, support=None, tol=1e-6, pattern_step_deg=0.5):
    """Full metrics bundle for a stack evaluated against the full problem."""
    w = np.asarray(w, dtype=complex)
    feas = feasibility_report(w, problem, tol)
    ratio = msrr(w, problem)
    angles, pattern = beampattern(w, problem, pattern_step_deg)
    return DesignReport(
        tx_power_w=tx_power(w),
        msrr=ratio,
        msrr_db=linear_to_db(ratio) if np.isfinite(ratio) and ratio > 0 else float("nan"),
        sinr=sinr_per_user(w, problem.channels, problem.M, problem.N),
        antenna_power_w=antenna_power(w, problem.M, problem.N),
        max_violation_by_kind=feas.max_violation_by_kind,
        feasible=feas.passed,
        pattern_angles_deg=angles,
        pattern_response=pattern,
        support=tuple(support) if support is not None else None,
    )
