"""Fixed-step closed-loop runner, trajectory logs, metrics and stability-bound checks.

The loop is zero-order hold: at every sample the surface is evaluated, the
controller produces u (advancing its adaptive state once), u is held constant
and the plant integrates through ``substeps`` RK4 steps to the next sample.
Everything is deterministic; identical scenarios produce bit-identical logs.

The log carries the two Lyapunov-style columns for delta-adaptive runs on
plants with a declared uncertainty bound:

    V      = sgn(s)*delta_surface(s, phi) + (rho/2)*(mu - gain)**2
    Vprime = |s| + gain/k        (0 when k = 0; the bound is then undefined)

Both columns are 0 for the switching baselines, whose stability certificates
use different machinery; the verifiers below recompute what they need from
the s and gain columns.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .controllers import DeltaAdaptiveSMC
from .core import ultimate_band
from .errors import (
    ControllabilityError,
    InsufficientDataError,
    ParameterError,
    SimulationDiverged,
)

CSV_PRECISION_ENV = "SMCSIM_CSV_PRECISION"


@dataclass(frozen=True)
class IntegrationSettings:
    dt: float = 1e-4
    substeps: int = 1
    t_end: float = 30.0

    def __post_init__(self):
        if not (isinstance(self.dt, float) and math.isfinite(self.dt) and self.dt > 0.0):
            raise ParameterError(f"dt must be positive and finite, got {self.dt!r}")
        if not (isinstance(self.substeps, int) and self.substeps >= 1):
            raise ParameterError(f"substeps must be an integer >= 1, got {self.substeps!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= self.dt):
            raise ParameterError(f"t_end must be finite and >= dt, got {self.t_end!r}")


@dataclass
class Scenario:
    name: str
    plant: object
    controller: object
    x0: tuple
    settings: IntegrationSettings
    config: Optional[dict] = None

    def __post_init__(self):
        self.x0 = tuple(float(v) for v in self.x0)
        if len(self.x0) != self.plant.n_states:
            raise ParameterError(
                f"x0 has {len(self.x0)} entries, plant '{self.plant.kind}' has "
                f"{self.plant.n_states} states"
            )
        for v in self.x0:
            if not math.isfinite(v):
                raise ParameterError(f"x0 entries must be finite, got {self.x0!r}")


@dataclass
class TrajectoryLog:
    t: np.ndarray
    x: np.ndarray
    s: np.ndarray
    u: np.ndarray
    gain: np.ndarray
    gain_rate: np.ndarray
    delta_f: np.ndarray
    V: np.ndarray
    Vprime: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def dt(self):
        return self.meta["dt"]

    def columns(self):
        names = ["t"] + [f"x{i}" for i in range(self.x.shape[1])]
        names += ["s", "u", "gain", "gain_rate", "delta_f", "V", "Vprime"]
        return names

    def as_matrix(self):
        cols = [self.t] + [self.x[:, i] for i in range(self.x.shape[1])]
        cols += [self.s, self.u, self.gain, self.gain_rate, self.delta_f, self.V, self.Vprime]
        return np.column_stack(cols)


def row_count(t_end: float, dt: float) -> int:
    """floor(t_end/dt) + 1, robust to the quotient sitting one ulp below an
    integer (30/1e-4 evaluates below 300000 in binary)."""
    q = t_end / dt
    return int(math.floor(q * (1.0 + 1e-12))) + 1


def _rk4(f, x, t, u, h):
    k1 = f(x, t, u)
    th = t + 0.5 * h
    x2 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k1))
    k2 = f(x2, th, u)
    x3 = tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k2))
    k3 = f(x3, th, u)
    x4 = tuple(xi + h * ki for xi, ki in zip(x, k3))
    k4 = f(x4, t + h, u)
    return tuple(
        xi + h * (a + 2.0 * b + 2.0 * c + d) / 6.0
        for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
    )


def run_scenario(scenario: Scenario) -> TrajectoryLog:
    """Simulate the closed loop and return the sampled trajectory.

    Raises SimulationDiverged when the state leaves the finite range and
    ControllabilityError when the surface reports g = 0.
    """
    plant = scenario.plant
    controller = scenario.controller
    controller.reset()
    st = scenario.settings
    dt, substeps = st.dt, st.substeps
    n = row_count(st.t_end, dt)
    n_states = plant.n_states

    t_arr = np.empty(n)
    x_arr = np.empty((n, n_states))
    s_arr = np.empty(n)
    u_arr = np.empty(n)
    gain_arr = np.empty(n)
    rate_arr = np.empty(n)
    df_arr = np.empty(n)
    v_arr = np.zeros(n)
    vp_arr = np.zeros(n)

    lyap = None
    if isinstance(controller, DeltaAdaptiveSMC) and plant.true_bound is not None:
        p = controller.params
        lyap = (p.phi, p.rho, p.k, plant.true_bound)

    surface = plant.surface
    step = controller.step
    uncertainty = plant.uncertainty
    deriv = plant.deriv
    isfinite = math.isfinite
    h_sub = dt / substeps

    x = scenario.x0
    for i in range(n):
        t = i * dt
        s, hdrift, g = surface(x, t)
        if g == 0.0:
            raise ControllabilityError(f"surface reported g = 0 at t = {t:.6g} s")
        u, gain, rate = step(s, hdrift, g, dt)
        t_arr[i] = t
        for j in range(n_states):
            x_arr[i, j] = x[j]
        s_arr[i] = s
        u_arr[i] = u
        gain_arr[i] = gain
        rate_arr[i] = rate
        df_arr[i] = uncertainty(x, t)
        if lyap is not None:
            phi, rho, k, mu = lyap
            a = abs(s)
            e_gain = mu - gain
            v_arr[i] = a * (a - phi) / (a + phi) + 0.5 * rho * e_gain * e_gain
            if k > 0.0:
                vp_arr[i] = a + gain / k
        if not (isfinite(s) and isfinite(u)):
            raise SimulationDiverged(t)
        if i + 1 < n:
            for j in range(substeps):
                x = _rk4(deriv, x, t + j * h_sub, u, h_sub)
            for v in x:
                if not isfinite(v):
                    raise SimulationDiverged((i + 1) * dt)

    meta = {
        "scenario": scenario.name,
        "controller": controller.kind,
        "plant": plant.kind,
        "dt": dt,
        "substeps": substeps,
        "t_end": st.t_end,
        "integrator": "rk4 plant substeps, euler adaptive states, zero-order-hold control",
        "package_version": __version__,
    }
    return TrajectoryLog(
        t_arr, x_arr, s_arr, u_arr, gain_arr, rate_arr, df_arr, v_arr, vp_arr, meta
    )


def write_csv(log: TrajectoryLog, path, precision: Optional[int] = None):
    """Serialize the log; floats use ``precision`` significant digits
    (default 17, overridable via the SMCSIM_CSV_PRECISION variable)."""
    if precision is None:
        precision = int(os.environ.get(CSV_PRECISION_ENV, "17"))
    if precision < 1:
        raise ParameterError(f"precision must be >= 1, got {precision!r}")
    np.savetxt(
        path,
        log.as_matrix(),
        fmt=f"%.{precision}g",
        delimiter=",",
        header=",".join(log.columns()),
        comments="",
    )


# ---------------------------------------------------------------------------
# Metrics


@dataclass
class RunMetrics:
    reach_time_to_band: Optional[float]
    steady_band_mean: float
    steady_band_max: float
    chattering_index: float
    max_gain: float
    overshoot_into_band: Optional[float]
    ultimate_bound_satisfied: Optional[bool] = None

    def as_dict(self):
        return {
            "reach_time_to_band": self.reach_time_to_band,
            "steady_band_mean": self.steady_band_mean,
            "steady_band_max": self.steady_band_max,
            "chattering_index": self.chattering_index,
            "max_gain": self.max_gain,
            "overshoot_into_band": self.overshoot_into_band,
            "ultimate_bound_satisfied": self.ultimate_bound_satisfied,
        }


def steady_window(n: int) -> int:
    """First row index of the final-25% window used by the steady metrics."""
    w = int(round(0.25 * (n - 1))) + 1
    if w < 2:
        raise InsufficientDataError("log too short for a final-25% window")
    return n - w


def compute_metrics(log: TrajectoryLog, phi: Optional[float]) -> RunMetrics:
    """Reach/steady/chattering statistics of one run.

    reach_time_to_band is the first sample time from which |s| stays within
    2*eta for at least 0.5 s; the chattering index is the total variation of
    u per second over the final quarter of the horizon. phi supplies the band
    yardstick; without one (controllers with no layer width) the band-relative
    fields are None.
    """
    n = len(log)
    dt = log.dt
    i0 = steady_window(n)
    a = np.abs(log.s)

    reach = None
    overshoot = None
    if phi is not None:
        eta = ultimate_band(phi)
        sustain = int(round(0.5 / dt))
        if sustain < 1 or sustain > n - 1:
            raise InsufficientDataError("horizon too short to certify a 0.5 s band dwell")
        ok = (a <= 2.0 * eta).astype(np.int64)
        csum = np.concatenate(([0], np.cumsum(ok)))
        width = sustain + 1
        full = csum[width:] - csum[:-width] == width
        hits = np.flatnonzero(full)
        reach = float(hits[0] * dt) if hits.size else None

        inside = np.flatnonzero(a < eta)
        overshoot = float(np.max(a[inside[0]:])) if inside.size else None

    du = np.abs(np.diff(log.u[i0:]))
    chat = float(du.sum() / ((n - i0 - 1) * dt))

    return RunMetrics(
        reach_time_to_band=reach,
        steady_band_mean=float(np.mean(a[i0:])),
        steady_band_max=float(np.max(a[i0:])),
        chattering_index=chat,
        max_gain=float(np.max(log.gain)),
        overshoot_into_band=overshoot,
    )


# ---------------------------------------------------------------------------
# Lyapunov diagnostics and stability-bound verification


@dataclass
class LyapunovTrace:
    """Interior-row Lyapunov diagnostics: discrete V-dot against the
    certificate -k*|s|*shape(s), with a truncation-based slack."""

    rows: np.ndarray
    V: np.ndarray
    vdot: np.ndarray
    bound: np.ndarray
    slack: np.ndarray
    checked: np.ndarray
    violations: np.ndarray
    isolated_violations: np.ndarray


def lyapunov_value(s, gain, mu, rho, phi):
    a = np.abs(np.asarray(s, dtype=float))
    return a * (a - phi) / (a + phi) + 0.5 * rho * (mu - np.asarray(gain, dtype=float)) ** 2


def lyapunov_trace(log: TrajectoryLog, mu, rho, phi, k) -> LyapunovTrace:
    """Check discrete V-dot <= -k*|s|*shape(s) + slack on rows with |s| >= eta.

    V-dot uses central differences; the slack, 10*|second difference|/dt +
    1e-9, scales with the local truncation of that estimate and swells near
    switching instants, where a discrete derivative cannot certify the
    continuous inequality. Violating rows are additionally classified by
    whether |s| crosses eta within one sample.
    """
    n = len(log)
    if n < 3:
        raise InsufficientDataError("need at least 3 rows for central differences")
    dt = log.dt
    V = lyapunov_value(log.s, log.gain, mu, rho, phi)
    a = np.abs(log.s)
    eta = ultimate_band(phi)

    vdot = (V[2:] - V[:-2]) / (2.0 * dt)
    slack = 10.0 * np.abs(V[2:] - 2.0 * V[1:-1] + V[:-2]) / dt + 1e-9
    t_mid = a[1:-1] + phi
    shape_mid = 1.0 - 2.0 * phi * phi / (t_mid * t_mid)
    bound = -k * a[1:-1] * shape_mid

    rows = np.arange(1, n - 1)
    checked = a[1:-1] >= eta
    bad = checked & (vdot > bound + slack)

    crossing = (a[:-1] - eta) * (a[1:] - eta) <= 0.0
    near = crossing[:-1] | crossing[1:]  # within one sample of an eta-crossing
    violations = rows[bad]
    isolated = rows[bad & ~near]
    return LyapunovTrace(rows, V, vdot, bound, slack, checked, violations, isolated)


@dataclass
class UltimateBoundCheck:
    applicable: bool
    holds: Optional[bool]
    T: Optional[float]
    sigma: float
    v0: float
    b: float
    max_vprime_after: Optional[float]
    first_violation: Optional[float]
    reason: str = ""


def verify_ultimate_bound(log: TrajectoryLog, k, rho, mu, b, tol=0.05) -> UltimateBoundCheck:
    """Check |s| + gain/k <= b*(1+tol) for all logged t >= T.

    ``applicable`` reports whether the certificate's own preconditions hold
    (v0 > sigma/k and sigma/k < b < v0); the inequality is still measured
    whenever the T formula is defined, since the certificate may hold outside
    its sufficient conditions.
    """
    if k <= 0.0 or rho <= 0.0:
        return UltimateBoundCheck(False, None, None, math.nan, math.nan, b,
                                  None, None, "k and rho must be positive")
    sigma = mu + 1.0 / (k * rho)
    floor = sigma / k
    v0 = float(abs(log.s[0]) + log.gain[0] / k)
    applicable = v0 > floor and floor < b < v0
    reason = "" if applicable else (
        f"initial level v0 = {v0:.6g} does not satisfy v0 > sigma/k = {floor:.6g} "
        f"with sigma/k < b < v0"
    )
    ratio = (v0 - floor) / (b - floor) if b != floor else math.inf
    if not (math.isfinite(ratio) and ratio > 0.0):
        return UltimateBoundCheck(applicable, None, None, sigma, v0, b, None, None,
                                  reason or "reach-time formula undefined for this b")
    T = math.log(ratio) / k if ratio >= 1.0 else 0.0
    vprime = np.abs(log.s) + log.gain / k
    after = vprime[log.t >= T]
    if after.size == 0:
        return UltimateBoundCheck(applicable, None, T, sigma, v0, b, None, None,
                                  reason or "horizon ends before T")
    limit = b * (1.0 + tol)
    bad = np.flatnonzero(after > limit)
    t_after = log.t[log.t >= T]
    first = float(t_after[bad[0]]) if bad.size else None
    return UltimateBoundCheck(applicable, bad.size == 0, T, sigma, v0, b,
                              float(np.max(after)), first, reason)


@dataclass
class ExcursionBoundCheck:
    applicable: bool
    holds: Optional[bool]
    entry_time: Optional[float]
    max_excursion: Optional[float]
    delta: float
    reason: str = ""


def verify_band_excursion(log: TrajectoryLog, m, delta, phi, tol=0.05) -> ExcursionBoundCheck:
    """Check max |s(t)| < delta*(1+tol) after the first entry into |s| < eta."""
    if not (math.isfinite(m) and math.isfinite(delta)):
        return ExcursionBoundCheck(False, None, None, None, delta,
                                   "no feasible oscillator stiffness m")
    eta = ultimate_band(phi)
    a = np.abs(log.s)
    inside = np.flatnonzero(a < eta)
    if inside.size == 0:
        return ExcursionBoundCheck(False, None, None, None, delta,
                                   "trajectory never reached the band within the horizon")
    i1 = int(inside[0])
    exc = float(np.max(a[i1:]))
    return ExcursionBoundCheck(True, exc < delta * (1.0 + tol), float(log.t[i1]), exc, delta)


# ---------------------------------------------------------------------------
# Worst-case oscillator oracle


def worst_case_run(s0, mu_hat0, mu, m, eta, dt=1e-4, t_end=None):
    """Integrate the worst-case affine pair with RK4:

        s_dot      = -mu_hat + mu
        mu_hat_dot = m*(s + eta)

    whose exact solution is core.worst_case_response (an oscillation of
    frequency sqrt(m) centred on s = -eta). Defaults to one full period.
    Returns (t, s, mu_hat) arrays.
    """
    if m <= 0.0 or not math.isfinite(m):
        raise ParameterError(f"m must be positive and finite, got {m!r}")
    if t_end is None:
        t_end = 2.0 * math.pi / math.sqrt(m)
    n = row_count(t_end, dt)
    t = np.empty(n)
    s_arr = np.empty(n)
    g_arr = np.empty(n)
    s, g = float(s0), float(mu_hat0)

    def f(state, _t, _u):
        sv, gv = state
        return (-gv + mu, m * (sv + eta))

    state = (s, g)
    for i in range(n):
        t[i] = i * dt
        s_arr[i], g_arr[i] = state
        if i + 1 < n:
            state = _rk4(f, state, i * dt, 0.0, dt)
    return t, s_arr, g_arr


def certificate_summary(mu, rho, phi, k, v0=None, b=None):
    """Convenience bundle of sigma, T, b, m, delta for reports.

    When v0 is supplied and the reach-time formula is defined, b defaults to
    the midpoint of (sigma/k, v0).
    """
    from .core import CertificateBounds, overshoot_bound

    sigma = mu + 1.0 / (k * rho) if k > 0.0 and rho > 0.0 else math.nan
    T = math.nan
    if v0 is not None and math.isfinite(sigma) and k > 0.0:
        floor = sigma / k
        if b is None:
            b = 0.5 * (floor + v0)
        ratio = (v0 - floor) / (b - floor) if b != floor else math.nan
        if math.isfinite(ratio) and ratio > 0.0:
            T = math.log(ratio) / k
    ob = overshoot_bound(mu, rho, phi)
    return CertificateBounds(sigma=sigma, T=T, b=b if b is not None else math.nan,
                             m=ob.m, delta_overshoot=ob.delta), ob
