"""Stacked beamforming problem: the constraint family and regularized objective.

The per-user weight vectors w_1..w_M are stacked into one complex vector of
length M*N.  Block m (one user's weights) occupies entries [m*N, (m+1)*N);
antenna group n gathers entries {n, n+N, ..., n+(M-1)*N}.

Every constraint is held in the normalized sense  w^H F w <= f.  F is never
materialized in the solver: each kind stores its rank structure (a steering
or channel generator vector, or a diagonal selector) and evaluates or applies
F in O(M*N).  ``dense_f_matrix`` builds the explicit matrix for verification
only.
"""

from dataclasses import dataclass, replace

import numpy as np

from .arrays import ArrayGeometry, AngleGrids, UserChannel  # noqa: F401  (re-exported context)
from .arrays import build_grids, los_channel, rayleigh_channel, steering_vector
from .errors import ConfigurationError


def user_blocks(w, M, N):
    """View the stacked vector as an (M, N) array, one row per user."""
    w = np.asarray(w)
    if w.shape != (M * N,):
        raise ValueError(f"stack has shape {w.shape}, expected ({M * N},)")
    return w.reshape(M, N)


def group_norms(w, M, N):
    """Per-antenna l2 norms across users: the N group magnitudes."""
    return np.linalg.norm(user_blocks(w, M, N), axis=0)


def objective(w, eta, M, N):
    """||w||^2 plus eta times the sum of antenna-group norms."""
    w = np.asarray(w)
    return float(np.vdot(w, w).real + eta * group_norms(w, M, N).sum())


@dataclass(frozen=True, eq=False)
class BeamformerStack:
    """Stacked complex beamformer with per-user and per-antenna views."""

    w: np.ndarray
    M: int
    N: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        if w.shape != (self.M * self.N,):
            raise ValueError(
                f"stack length {w.shape} does not match M*N = {self.M * self.N}"
            )
        object.__setattr__(self, "w", w)

    def user_block(self, m):
        return self.w[m * self.N : (m + 1) * self.N]

    def antenna_group(self, n):
        return self.w[n :: self.N]

    def group_norms(self):
        return group_norms(self.w, self.M, self.N)


class QuadraticConstraint:
    """Base for one constraint in the normalized sense w^H F w <= f."""

    kind = "generic"

    @property
    def f(self):
        raise NotImplementedError

    def quad(self, w):
        """The quadratic form w^H F w, evaluated through the structure."""
        raise NotImplementedError

    def f_action(self, w):
        """F @ w without forming F."""
        raise NotImplementedError

    def dense_f_matrix(self):
        """Explicit Hermitian F; verification only."""
        raise NotImplementedError

    def restrict(self, support):
        """The same constraint on the subarray ``support`` (None if it drops)."""
        raise NotImplementedError

    def slack(self, w):
        """f - w^H F w; nonnegative iff the constraint holds."""
        return self.f - self.quad(w)

    def violation(self, w):
        return max(0.0, -self.slack(w))

    def describe(self):
        return self.kind


@dataclass(frozen=True, eq=False)
class PassbandConstraint(QuadraticConstraint):
    """Mainlobe floor at one angle: sum_m |a^H w_m|^2 >= threshold.

    Normalized with F = -(I_M (x) a a^H), f = -threshold; F is NSD.
    """

    angle_deg: float
    steering: np.ndarray
    threshold: float
    M: int
    N: int

    kind = "passband"

    def __post_init__(self):
        object.__setattr__(self, "steering", np.asarray(self.steering, dtype=complex))
        if not self.threshold > 0:
            raise ConfigurationError(
                f"passband threshold must be > 0, got {self.threshold}"
            )

    @property
    def f(self):
        return -self.threshold

    def response(self, w):
        coef = user_blocks(w, self.M, self.N) @ np.conj(self.steering)
        return float(np.vdot(coef, coef).real)

    def quad(self, w):
        return -self.response(w)

    def f_action(self, w):
        coef = user_blocks(w, self.M, self.N) @ np.conj(self.steering)
        return -np.outer(coef, self.steering).reshape(-1)

    def dense_f_matrix(self):
        block = np.outer(self.steering, np.conj(self.steering))
        return -np.kron(np.eye(self.M), block)

    def restrict(self, support):
        return replace(self, steering=self.steering[list(support)], N=len(support))

    def describe(self):
        return f"passband(theta={self.angle_deg:g} deg)"


@dataclass(frozen=True, eq=False)
class StopbandConstraint(QuadraticConstraint):
    """Sidelobe ceiling at one angle: sum_m |a^H w_m|^2 <= threshold.

    F = I_M (x) a a^H is PSD with rank M.
    """

    angle_deg: float
    steering: np.ndarray
    threshold: float
    M: int
    N: int

    kind = "stopband"

    def __post_init__(self):
        object.__setattr__(self, "steering", np.asarray(self.steering, dtype=complex))
        if not self.threshold > 0:
            raise ConfigurationError(
                f"stopband threshold must be > 0, got {self.threshold}"
            )

    @property
    def f(self):
        return self.threshold

    def response(self, w):
        coef = user_blocks(w, self.M, self.N) @ np.conj(self.steering)
        return float(np.vdot(coef, coef).real)

    def quad(self, w):
        return self.response(w)

    def f_action(self, w):
        coef = user_blocks(w, self.M, self.N) @ np.conj(self.steering)
        return np.outer(coef, self.steering).reshape(-1)

    def dense_f_matrix(self):
        block = np.outer(self.steering, np.conj(self.steering))
        return np.kron(np.eye(self.M), block)

    def restrict(self, support):
        return replace(self, steering=self.steering[list(support)], N=len(support))

    def describe(self):
        return f"stopband(theta={self.angle_deg:g} deg)"


@dataclass(frozen=True, eq=False)
class AntennaPowerConstraint(QuadraticConstraint):
    """Per-antenna radiated power: sum_m |w_m(n)|^2 <= limit.

    F is the 0/1 diagonal selector of antenna group n.
    """

    antenna: int
    limit: float
    M: int
    N: int

    kind = "antenna_power"

    def __post_init__(self):
        if not 0 <= self.antenna < self.N:
            raise ConfigurationError(
                f"antenna index {self.antenna} outside 0..{self.N - 1}"
            )
        if not self.limit > 0:
            raise ConfigurationError(
                f"antenna power limit must be > 0, got {self.limit}"
            )

    @property
    def f(self):
        return self.limit

    def group(self, w):
        return np.asarray(w)[self.antenna :: self.N]

    def quad(self, w):
        g = self.group(w)
        return float(np.vdot(g, g).real)

    def f_action(self, w):
        out = np.zeros(self.M * self.N, dtype=complex)
        out[self.antenna :: self.N] = np.asarray(w)[self.antenna :: self.N]
        return out

    def dense_f_matrix(self):
        F = np.zeros((self.M * self.N, self.M * self.N), dtype=complex)
        idx = np.arange(self.antenna, self.M * self.N, self.N)
        F[idx, idx] = 1.0
        return F

    def restrict(self, support):
        support = list(support)
        if self.antenna not in support:
            return None
        return replace(self, antenna=support.index(self.antenna), N=len(support))

    def describe(self):
        return f"antenna_power(n={self.antenna})"


@dataclass(frozen=True, eq=False)
class SinrConstraint(QuadraticConstraint):
    """Downlink SINR floor for one user.

    |h^H w_m|^2 - gamma * sum_{j != m} |h^H w_j|^2 >= gamma * sigma^2,
    normalized with an indefinite F (negative on the served user's block,
    +gamma on the interfering blocks, all along the channel direction).
    """

    user: int
    h: np.ndarray
    gamma: float
    noise_variance: float
    M: int
    N: int

    kind = "sinr"

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=complex))
        if not 0 <= self.user < self.M:
            raise ConfigurationError(f"user index {self.user} outside 0..{self.M - 1}")
        if not self.gamma > 0:
            raise ConfigurationError(f"SINR target must be > 0, got {self.gamma}")
        if not self.noise_variance > 0:
            raise ConfigurationError(
                f"noise variance must be > 0, got {self.noise_variance}"
            )

    @property
    def f(self):
        return -self.gamma * self.noise_variance

    def _coef(self, w):
        return user_blocks(w, self.M, self.N) @ np.conj(self.h)

    def signal_and_interference(self, w):
        coef = self._coef(w)
        power = np.abs(coef) ** 2
        signal = float(power[self.user])
        return signal, float(power.sum() - power[self.user])

    def sinr(self, w):
        signal, interference = self.signal_and_interference(w)
        return signal / (interference + self.noise_variance)

    def quad(self, w):
        signal, interference = self.signal_and_interference(w)
        return -(signal - self.gamma * interference)

    def f_action(self, w):
        coef = self._coef(w)
        scale = np.full(self.M, self.gamma)
        scale[self.user] = -1.0
        return np.outer(scale * coef, self.h).reshape(-1)

    def dense_f_matrix(self):
        scale = np.full(self.M, self.gamma)
        scale[self.user] = -1.0
        block = np.outer(self.h, np.conj(self.h))
        return np.kron(np.diag(scale), block)

    def restrict(self, support):
        return replace(self, h=self.h[list(support)], N=len(support))

    def describe(self):
        return f"sinr(m={self.user})"


def build_passband_constraint(steering, threshold, M, angle_deg=float("nan")):
    return PassbandConstraint(angle_deg, steering, threshold, M, len(steering))


def build_stopband_constraint(steering, threshold, M, angle_deg=float("nan")):
    return StopbandConstraint(angle_deg, steering, threshold, M, len(steering))


def build_power_constraint(antenna, limit, M, N):
    return AntennaPowerConstraint(antenna, limit, M, N)


def build_sinr_constraint(h, gamma, noise_variance, user, M):
    return SinrConstraint(user, h, gamma, noise_variance, M, len(h))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """The assembled constraint family plus everything needed to evaluate it.

    Constraint order is fixed (passband grid, stopband grid, antenna powers,
    SINRs) so that run logs, dual variables, and seeds are reproducible.
    """

    constraints: tuple
    eta: float
    M: int
    N: int
    geometry: ArrayGeometry = None
    grids: AngleGrids = None
    channels: tuple = ()
    support: tuple = None
    scenario: object = None

    @property
    def L(self):
        return len(self.constraints)

    @property
    def size(self):
        return self.M * self.N

    def constraints_of_kind(self, kind):
        return [c for c in self.constraints if c.kind == kind]

    def slacks(self, w):
        return np.array([c.slack(w) for c in self.constraints])

    def max_violation(self, w):
        if not self.constraints:
            return 0.0
        return max(c.violation(w) for c in self.constraints)

    def worst_violations(self, w, count=5):
        pairs = [(c.describe(), c.violation(w)) for c in self.constraints]
        pairs.sort(key=lambda p: -p[1])
        return pairs[:count]

    def restrict(self, support):
        """The same problem on the antenna subset ``support`` (sorted indices)."""
        support = tuple(sorted(set(int(n) for n in support)))
        if not support:
            raise ConfigurationError("empty antenna support")
        if support[0] < 0 or support[-1] >= self.N:
            raise ConfigurationError(
                f"support {support} outside antenna range 0..{self.N - 1}"
            )
        reduced = []
        for c in self.constraints:
            rc = c.restrict(support)
            if rc is not None:
                reduced.append(rc)
        channels = tuple(
            replace(ch, h=ch.h[list(support)]) for ch in self.channels
        )
        return ProblemInstance(
            constraints=tuple(reduced),
            eta=self.eta,
            M=self.M,
            N=len(support),
            geometry=self.geometry,
            grids=self.grids,
            channels=channels,
            support=support,
            scenario=self.scenario,
        )


def _build_channels(scenario, geometry):
    channels = []
    for m, angle in enumerate(scenario.user_angles_deg):
        if scenario.channel_model == "los":
            h = los_channel(geometry, angle, scenario.channel_gain)
        elif scenario.channel_model == "rayleigh":
            h = rayleigh_channel(geometry, seed=[scenario.seed, 101, m])
        else:
            raise ConfigurationError(
                f"unknown channel model {scenario.channel_model!r}"
            )
        channels.append(
            UserChannel(
                index=m,
                h=h,
                noise_variance=scenario.noise_variance[m],
                sinr_target=scenario.sinr_target[m],
            )
        )
    return tuple(channels)


def assemble(scenario):
    """Build the full constraint family from a scenario.

    Order: passband grid, stopband grid, antenna powers 0..N-1, SINRs 0..M-1.
    """
    geometry = scenario.geometry
    N = geometry.num_antennas
    M = len(scenario.user_angles_deg)
    grids = build_grids(
        scenario.mainlobe_region,
        scenario.stopband_regions,
        scenario.mainlobe_step_deg,
        scenario.stopband_step_deg,
    )
    channels = _build_channels(scenario, geometry)

    constraints = []
    for theta in grids.mainlobe:
        constraints.append(
            PassbandConstraint(
                theta, steering_vector(geometry, theta),
                scenario.mainlobe_threshold, M, N,
            )
        )
    for theta in grids.stopband:
        constraints.append(
            StopbandConstraint(
                theta, steering_vector(geometry, theta),
                scenario.stopband_threshold, M, N,
            )
        )
    for n in range(N):
        constraints.append(
            AntennaPowerConstraint(n, scenario.antenna_power_limit_w[n], M, N)
        )
    for ch in channels:
        constraints.append(
            SinrConstraint(ch.index, ch.h, ch.sinr_target, ch.noise_variance, M, N)
        )

    return ProblemInstance(
        constraints=tuple(constraints),
        eta=scenario.admm.eta,
        M=M,
        N=N,
        geometry=geometry,
        grids=grids,
        channels=channels,
        scenario=scenario,
    )
