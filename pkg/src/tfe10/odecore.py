"""Stiff initial-value integration for first-order real systems.

The stepper is a variable-order BDF method (orders 1-5, modified Newton,
Jacobian reuse) driven step by step so that this module owns the trajectory
record, the step budget, non-finite detection and event location.  Dense
output is the stepper's per-step interpolant; events are refined on it by
bracketed root iteration down to a 1e-12 time tolerance.

Conventions:
  * state vectors are 1-D float arrays of fixed dimension,
  * an event fires on a sign change of g(t, y) consistent with its
    direction; a terminal event truncates the trajectory at t*,
  * error control is the stepper's mixed absolute/relative RMS norm,
    |err_i| <= atol + rtol * |y_i| per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import BDF
from scipy.optimize import brentq

from .errors import (
    MaxStepsExceeded,
    NonFiniteEntry,
    NonFiniteState,
    NoSignChange,
    StepSizeUnderflow,
)

EVENT_TIME_TOL = 1e-12


@dataclass(frozen=True)
class OdeProblem:
    """A first-order system y' = rhs(t, y) of fixed dimension.

    rhs must be deterministic and side-effect free.  jac, when given, is the
    analytic Jacobian d(rhs)/dy used by the implicit stepper; otherwise the
    stepper falls back to internal finite differences.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    jac: Callable[[float, np.ndarray], np.ndarray] | None = None
    stiff: bool = True


@dataclass(frozen=True)
class EventSpec:
    name: str
    g: Callable[[float, np.ndarray], float]
    direction: int = 0  # +1 rising, -1 falling, 0 either
    terminal: bool = False
    event_tol: float = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-13
    atol: float = 1e-13
    max_step: float = np.inf
    first_step: float | None = None
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not 0.0 < self.rtol <= 1e-2:
            raise ValueError(f"rtol must lie in (0, 1e-2], got {self.rtol}")
        if np.any(np.asarray(self.atol) <= 0.0):
            raise ValueError("atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class EventRecord:
    t: float
    name: str
    state: np.ndarray


@dataclass
class Trajectory:
    """Dense-output result of one integration.

    Node times are strictly monotone; eval() reproduces node states bitwise
    at node times and interpolates with the per-step dense output elsewhere.
    """

    t: np.ndarray
    y: np.ndarray  # shape (n_nodes, dimension)
    events: list[EventRecord] = field(default_factory=list)
    terminated_by: str | None = None
    n_steps: int = 0
    config: IntegratorConfig | None = None
    _segments: list = field(default_factory=list, repr=False)

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]

    def eval(self, t):
        """Interpolated state at time(s) t inside the covered span."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = min(self.t[0], self.t[-1]), max(self.t[0], self.t[-1])
        if np.any(t_arr < lo - 1e-12 * max(1.0, abs(lo))) or np.any(
            t_arr > hi + 1e-12 * max(1.0, abs(hi))
        ):
            raise ValueError("evaluation time outside trajectory span")
        out = np.empty((t_arr.size, self.y.shape[1]))
        increasing = self.t[-1] >= self.t[0]
        tt = self.t if increasing else self.t[::-1]
        for i, ti in enumerate(t_arr):
            # bitwise node reproduction
            j = np.searchsorted(tt, ti)
            jj = j if increasing else self.t.size - 1 - j
            if j < tt.size and tt[j] == ti:
                out[i] = self.y[jj if increasing else self.t.size - 1 - j]
                continue
            k = int(np.clip(j - 1 if increasing else self.t.size - 1 - j, 0,
                            len(self._segments) - 1))
            out[i] = self._segments[k](ti)
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    __call__ = eval

    def segment_index(self, t: float) -> int:
        increasing = self.t[-1] >= self.t[0]
        tt = self.t if increasing else self.t[::-1]
        j = int(np.searchsorted(tt, t))
        k = j - 1 if increasing else self.t.size - 1 - j
        return int(np.clip(k, 0, len(self._segments) - 1))


def _crosses(g_old: float, g_new: float, direction: int) -> bool:
    if direction >= 1:
        return g_old < 0.0 <= g_new
    if direction <= -1:
        return g_old > 0.0 >= g_new
    return (g_old < 0.0 <= g_new) or (g_old > 0.0 >= g_new)


def _refine_event(event: EventSpec, dense, t_lo: float, t_hi: float):
    def h(s):
        return event.g(s, dense(s))

    a, b = (t_lo, t_hi) if t_lo <= t_hi else (t_hi, t_lo)
    ga, gb = h(a), h(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if ga * gb > 0.0:
        # crossing sits on a node boundary; take the closer endpoint
        return a if abs(ga) < abs(gb) else b
    return brentq(h, a, b, xtol=EVENT_TIME_TOL, rtol=8.881784197001252e-16)


def integrate(
    problem: OdeProblem,
    span: tuple[float, float],
    y0,
    config: IntegratorConfig | None = None,
    events: tuple[EventSpec, ...] | list[EventSpec] = (),
) -> Trajectory:
    """Integrate problem over span from y0, recording a dense trajectory.

    Raises StepSizeUnderflow / MaxStepsExceeded / NonFiniteState with the
    last accepted time (and the partial trajectory) on failure.  A terminal
    event truncates the span at the refined event time.
    """
    cfg = config or IntegratorConfig()
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise ValueError("integration span must be non-degenerate")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (problem.dimension,):
        raise ValueError(
            f"initial state has shape {y0.shape}, expected ({problem.dimension},)"
        )
    if not np.all(np.isfinite(y0)):
        raise NonFiniteState("initial state is not finite", t_last=t0)

    solver = BDF(
        problem.rhs,
        t0,
        y0,
        t_bound=t1,
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step,
        first_step=cfg.first_step,
        jac=problem.jac,
    )

    ts = [t0]
    ys = [y0.copy()]
    segments: list = []
    recorded: list[EventRecord] = []
    g_prev = [ev.g(t0, y0) for ev in events]
    n_steps = 0
    terminated_by = None

    def partial() -> Trajectory:
        return Trajectory(
            t=np.asarray(ts),
            y=np.asarray(ys),
            events=recorded,
            terminated_by=terminated_by,
            n_steps=n_steps,
            config=cfg,
            _segments=segments,
        )

    while solver.status == "running":
        if n_steps >= cfg.max_steps:
            raise MaxStepsExceeded(
                f"exceeded {cfg.max_steps} steps at t={ts[-1]}",
                t_last=ts[-1],
                partial=partial(),
            )
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(
                f"stepper failed at t={ts[-1]}: {message}",
                t_last=ts[-1],
                partial=partial(),
            )
        n_steps += 1
        t_new, y_new = solver.t, solver.y.copy()
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(
                f"non-finite state on accepted step at t={t_new}",
                t_last=ts[-1],
                partial=partial(),
            )
        dense = solver.dense_output()
        segments.append(dense)

        hit_terminal = False
        t_stop, y_stop = t_new, y_new
        for i, ev in enumerate(events):
            g_new = ev.g(t_new, y_new)
            if _crosses(g_prev[i], g_new, ev.direction):
                t_star = _refine_event(ev, dense, ts[-1], t_new)
                y_star = dense(t_star)
                recorded.append(EventRecord(t=t_star, name=ev.name, state=y_star))
                if ev.terminal and not hit_terminal:
                    hit_terminal = True
                    t_stop, y_stop = t_star, y_star
                    terminated_by = ev.name
            g_prev[i] = g_new

        if hit_terminal:
            # drop events refined past the truncation point
            recorded[:] = [r for r in recorded if (r.t - t_stop) * np.sign(t1 - t0) <= 1e-15]
            ts.append(t_stop)
            ys.append(np.asarray(y_stop))
            break
        ts.append(t_new)
        ys.append(y_new)

    return partial()


def locate_event(trajectory: Trajectory, event: EventSpec, t_lo=None, t_hi=None):
    """First directional zero of event.g along the trajectory segment.

    Returns (t*, state) with |g(t*, state)| <= event.event_tol; raises
    NoSignChange when g does not cross in the requested direction.
    """
    t = trajectory.t
    increasing = t[-1] >= t[0]
    sel = np.ones(t.size, dtype=bool)
    if t_lo is not None:
        sel &= t >= t_lo if increasing else t <= t_lo
    if t_hi is not None:
        sel &= t <= t_hi if increasing else t >= t_hi
    idx = np.nonzero(sel)[0]
    if idx.size < 2:
        raise NoSignChange("segment holds fewer than two nodes")

    g_vals = [event.g(t[k], trajectory.y[k]) for k in idx]
    for a, b, ga, gb in zip(idx[:-1], idx[1:], g_vals[:-1], g_vals[1:]):
        if _crosses(ga, gb, event.direction):
            seg = trajectory._segments[min(a, len(trajectory._segments) - 1)]
            t_star = _refine_event(event, seg, t[a], t[b])
            y_star = seg(t_star)
            if abs(event.g(t_star, y_star)) > event.event_tol:
                raise NoSignChange(
                    f"refined event residual exceeds tol {event.event_tol}"
                )
            return float(t_star), np.asarray(y_star)
    raise NoSignChange(f"event '{event.name}' does not change sign on the segment")


def jacobian_fd(
    problem: OdeProblem | Callable[[float, np.ndarray], np.ndarray],
    t: float,
    state,
    scale: float | None = None,
    method: str = "forward",
) -> np.ndarray:
    """Finite-difference Jacobian of the rhs at (t, state).

    Per-column step h_j = scale * (1 + |y_j|).  method is "forward"
    (default scale ~ sqrt(eps)) or "central" (default scale ~ eps^(1/3)).
    """
    rhs = problem.rhs if isinstance(problem, OdeProblem) else problem
    y = np.asarray(state, dtype=float)
    if scale is None:
        scale = 1.4901161193847656e-08 if method == "forward" else 6.055454452393343e-06
    n = y.size
    jac = np.empty((n, n))
    f0 = np.asarray(rhs(t, y)) if method == "forward" else None
    for j in range(n):
        h = scale * (1.0 + abs(y[j]))
        yp = y.copy()
        yp[j] += h
        if method == "forward":
            jac[:, j] = (np.asarray(rhs(t, yp)) - f0) / h
        else:
            ym = y.copy()
            ym[j] -= h
            jac[:, j] = (np.asarray(rhs(t, yp)) - np.asarray(rhs(t, ym))) / (2.0 * h)
    if not np.all(np.isfinite(jac)):
        raise NonFiniteEntry("finite-difference Jacobian has non-finite entries")
    return jac


def reduce_scalar_ode(
    order: int,
    top_derivative: Callable[[float, np.ndarray], float],
    jac_top: Callable[[float, np.ndarray], np.ndarray] | None = None,
    stiff: bool = True,
) -> OdeProblem:
    """Companion-form reduction of a scalar ODE y^(order) = top(t, y-stack).

    Component i of the first-order system holds the i-th derivative;
    top_derivative receives (t, stack) with stack = (y, y', ..., y^(order-1)).
    jac_top, when given, is the gradient row d(top)/d(stack) used to build
    the companion Jacobian.
    """
    if order < 1:
        raise ValueError("order must be >= 1")

    def rhs(t, y):
        dy = np.empty_like(y)
        dy[:-1] = y[1:]
        dy[-1] = top_derivative(t, y)
        return dy

    jac = None
    if jac_top is not None:

        def jac(t, y):
            m = np.zeros((order, order))
            idx = np.arange(order - 1)
            m[idx, idx + 1] = 1.0
            m[-1, :] = jac_top(t, y)
            return m

    return OdeProblem(dimension=order, rhs=rhs, jac=jac, stiff=stiff)
