import numpy as np
import pytest

from trisplit.integrator import SplitSystem


def fit_slope(h_list, values):
    """Least-squares slope of log|values| against log h."""
    h = np.asarray(h_list, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    return float(np.polyfit(np.log(h), np.log(v), 1)[0])


def momentum_flip(x):
    x = np.asarray(x)
    d = x.shape[0] // 2
    out = x.copy()
    out[d:] = -out[d:]
    return out


def pendulum_system():
    """Nonlinear pendulum q' = p, p' = -sin q on states (q, p)."""
    def drift(t, x):
        return np.array([x[0] + t * x[1], x[1]])

    def kick(t, x):
        return np.array([x[0], x[1] - t * np.sin(x[0])])

    def commutator(x):
        # [A, B](q, p) = (-sin q, p cos q) for A = drift, B = kick
        return np.array([-np.sin(x[0]), x[1] * np.cos(x[0])])

    return SplitSystem(flow_a=drift, flow_b=kick, commutator=commutator)


class CountingSystem:
    """Wrap a SplitSystem, counting flow and commutator invocations."""

    def __init__(self, inner: SplitSystem):
        self.calls_a = 0
        self.calls_b = 0
        self.calls_comm = 0

        def flow_a(t, x):
            self.calls_a += 1
            return inner.flow_a(t, x)

        def flow_b(t, x):
            self.calls_b += 1
            return inner.flow_b(t, x)

        commutator = None
        if inner.commutator is not None:
            def commutator(x):
                self.calls_comm += 1
                return inner.commutator(x)

        self.system = SplitSystem(
            flow_a=flow_a,
            flow_b=flow_b,
            commutator=commutator,
            supports_negative_time_a=inner.supports_negative_time_a,
            supports_negative_time_b=inner.supports_negative_time_b,
        )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
