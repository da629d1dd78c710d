"""Plant models, sliding surfaces and bounded disturbance signals.

Plants expose three methods used by the runner:

    deriv(x, t, u)    -> tuple of state derivatives (the true plant, with
                         uncertainty injected in the actuated channel only)
    surface(x, t)     -> SurfaceEval(s, h, g) with h, g from the NOMINAL
                         model; controllers never see the uncertainty
    uncertainty(x, t) -> the matched disturbance entering the s-dynamics,
                         logged by the harness for diagnostics

``true_bound`` is the declared bound on that disturbance when one exists
(simulator-side knowledge, hidden from controllers); ``None`` for the
tracking plant whose matched uncertainty is state-dependent.

All signals are deterministic closed forms of t, so repeated evaluation is
bit-identical.
"""

import csv
import math
from typing import NamedTuple

from .errors import DomainError, ParameterError


class SurfaceEval(NamedTuple):
    s: float
    h: float
    g: float


def _check_finite(name, values):
    vals = values if isinstance(values, (list, tuple)) else [values]
    for v in vals:
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ParameterError(f"{name} must be finite numbers, got {values!r}")


# ---------------------------------------------------------------------------
# Disturbance signals


class MultiSineSignal:
    """Sum of sines: sum_i a_i*sin(w_i*t + p_i), with declared bound mu."""

    kind = "smooth_multi_sine"

    def __init__(self, amplitudes, frequencies, phases, bound):
        if not (len(amplitudes) == len(frequencies) == len(phases)) or not amplitudes:
            raise ParameterError("amplitudes, frequencies and phases must have equal nonzero length")
        _check_finite("amplitudes", amplitudes)
        _check_finite("frequencies", frequencies)
        _check_finite("phases", phases)
        _check_finite("bound", bound)
        if bound <= 0.0:
            raise ParameterError(f"bound must be positive, got {bound!r}")
        self.terms = tuple(zip(amplitudes, frequencies, phases))
        self.bound = bound

    def value(self, t: float) -> float:
        total = 0.0
        for a, w, p in self.terms:
            total += a * math.sin(w * t + p)
        return total


class SquareSignal:
    """Square wave flipping sign every half_period, with a piecewise-constant
    amplitude schedule [(start_time, amplitude), ...].

    Edges land on integer multiples of half_period, which the presets align
    with the integration grid so no event detection is needed.
    """

    kind = "square_sequence"

    def __init__(self, half_period, amplitudes, bound):
        _check_finite("half_period", half_period)
        if half_period <= 0.0:
            raise ParameterError(f"half_period must be positive, got {half_period!r}")
        if not amplitudes:
            raise ParameterError("amplitude schedule must be nonempty")
        starts = [t0 for t0, _ in amplitudes]
        _check_finite("amplitude schedule times", starts)
        _check_finite("amplitude schedule values", [a for _, a in amplitudes])
        if starts != sorted(starts) or starts[0] != 0.0:
            raise ParameterError("amplitude schedule must be sorted and start at t = 0")
        _check_finite("bound", bound)
        if bound <= 0.0:
            raise ParameterError(f"bound must be positive, got {bound!r}")
        self.half_period = half_period
        self.schedule = tuple(amplitudes)
        self.bound = bound

    def value(self, t: float) -> float:
        amp = self.schedule[0][1]
        for t0, a in self.schedule:
            if t >= t0:
                amp = a
            else:
                break
        return amp if int(t // self.half_period) % 2 == 0 else -amp


class TableSignal:
    """Linear interpolation through a (t, value) table; t outside the table
    is a domain error."""

    kind = "custom_table"

    def __init__(self, times, values, bound):
        if len(times) != len(values) or len(times) < 2:
            raise ParameterError("table needs at least two (t, value) rows of equal length")
        _check_finite("table times", list(times))
        _check_finite("table values", list(values))
        if list(times) != sorted(times):
            raise ParameterError("table times must be strictly increasing")
        _check_finite("bound", bound)
        if bound <= 0.0:
            raise ParameterError(f"bound must be positive, got {bound!r}")
        self.times = tuple(times)
        self.values = tuple(values)
        self.bound = bound

    @classmethod
    def from_csv(cls, path, bound):
        times, values = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                times.append(float(row[0]))
                values.append(float(row[1]))
        return cls(times, values, bound)

    def value(self, t: float) -> float:
        ts = self.times
        if t < ts[0] or t > ts[-1]:
            raise DomainError(f"t = {t!r} outside table horizon [{ts[0]}, {ts[-1]}]")
        lo, hi = 0, len(ts) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        w = (t - ts[lo]) / (ts[hi] - ts[lo])
        v_lo = self.values[lo]
        return v_lo + (self.values[hi] - v_lo) * w


def verify_signal_bound(signal, t_end, samples=100_000):
    """Densely sample [0, t_end] and check |value| never exceeds the bound
    (a 1e-12 relative allowance absorbs interpolation rounding)."""
    step = t_end / (samples - 1)
    worst = 0.0
    for i in range(samples):
        v = abs(signal.value(i * step))
        if v > worst:
            worst = v
    if worst > signal.bound * (1.0 + 1e-12):
        raise ParameterError(
            f"signal exceeds its declared bound: max |value| = {worst!r} > {signal.bound!r}"
        )
    return worst


# ---------------------------------------------------------------------------
# Reference trajectory


class SineReference:
    """Reference y_d = amplitude*sin(omega*t) with analytic derivatives."""

    def __init__(self, amplitude, omega):
        _check_finite("amplitude", amplitude)
        _check_finite("omega", omega)
        self.amplitude = amplitude
        self.omega = omega

    def value(self, t):
        return self.amplitude * math.sin(self.omega * t)

    def rate(self, t):
        return self.amplitude * self.omega * math.cos(self.omega * t)

    def accel(self, t):
        return -self.amplitude * self.omega * self.omega * math.sin(self.omega * t)


# ---------------------------------------------------------------------------
# Plants


class RegulationPlant:
    """Scalar plant x_dot = df(t) + u regulated to the surface s = x."""

    kind = "regulation"
    n_states = 1

    def __init__(self, signal):
        self.signal = signal

    @property
    def true_bound(self):
        return self.signal.bound

    def deriv(self, x, t, u):
        return (self.signal.value(t) + u,)

    def surface(self, x, t) -> SurfaceEval:
        return SurfaceEval(x[0], 0.0, 1.0)

    def uncertainty(self, x, t):
        return self.signal.value(t)


class LinearPlant:
    """Scalar plant x_dot = a*x + b*u + df(t) with surface s = x.

    Generic matched-uncertainty case with nonzero nominal drift h = a*x and
    input gain g = b (b = 0 is rejected: the channel must stay controllable).
    """

    kind = "linear"
    n_states = 1

    def __init__(self, a, b, signal):
        _check_finite("a", a)
        _check_finite("b", b)
        if b == 0.0:
            raise ParameterError("input gain b must be nonzero")
        self.a = a
        self.b = b
        self.signal = signal

    @property
    def true_bound(self):
        return self.signal.bound

    def deriv(self, x, t, u):
        return (self.a * x[0] + self.b * u + self.signal.value(t),)

    def surface(self, x, t) -> SurfaceEval:
        return SurfaceEval(x[0], self.a * x[0], self.b)

    def uncertainty(self, x, t):
        return self.signal.value(t)


class TrackingPlant:
    """Second-order plant with multiplicative and additive uncertainty.

        x1_dot = x2
        x2_dot = x1*dx1(t)*x2 + sin(x1*dx1(t)) + d(t) + u

    where dx1(t) = 1 + mult(t). The surface s = (x2 - yd_dot) + lam*(x1 - yd)
    tracks the reference; h and g come from the nominal model (dx1 = 1, d = 0).
    Both uncertainties enter only the actuated x2 channel, so the matching
    condition holds structurally.
    """

    kind = "tracking"
    n_states = 2

    def __init__(self, mult_signal, add_signal, reference, lam):
        _check_finite("lambda", lam)
        if lam <= 0.0:
            raise ParameterError(f"lambda must be positive, got {lam!r}")
        self.mult = mult_signal
        self.add = add_signal
        self.reference = reference
        self.lam = lam

    # The matched uncertainty depends on the state, so no constant bound is
    # declared; the bound verifiers report not-applicable for this plant.
    true_bound = None

    def deriv(self, x, t, u):
        x1, x2 = x
        dx1 = 1.0 + self.mult.value(t)
        return (x2, x1 * dx1 * x2 + math.sin(x1 * dx1) + self.add.value(t) + u)

    def surface(self, x, t) -> SurfaceEval:
        x1, x2 = x
        r = self.reference
        e = x1 - r.value(t)
        e_rate = x2 - r.rate(t)
        s = e_rate + self.lam * e
        h = x1 * x2 + math.sin(x1) - r.accel(t) + self.lam * e_rate
        return SurfaceEval(s, h, 1.0)

    def uncertainty(self, x, t):
        x1, x2 = x
        dx1 = 1.0 + self.mult.value(t)
        nominal = x1 * x2 + math.sin(x1)
        return (x1 * dx1 * x2 + math.sin(x1 * dx1)) - nominal + self.add.value(t)
