"""Oscillatory structure of similarity profiles near the interface.

Writing a profile as f(y) = (y0-y)^mu * phi(eta), eta = ln(y0-y), mu = 9/n,
the oscillatory component phi satisfies a ninth-order autonomous ODE

    sum_{k=0..9} a_k phi^(9-k) + lambda0 |phi|^(-n) phi = 0,

whose coefficients a_k are the elementary symmetric polynomials of
{mu - i : i = 0..8}.  This module finds its stable sign-changing limit
cycle, the constant states +-phi0 that exist for n in (9/8, 9/7), the
small-n rescaled system with binomial coefficients, and the heteroclinic
bifurcation point n_h where the cycle is destroyed.

Conditioning.  The cycle amplitude collapses like lambda0^(1/n) (n/9)^(9/n)
(about 1e-23 at n = 1/2) and the eta-frequency grows like 9/n, so raw
phi-integrations are hopeless at tight tolerances.  All integrations here
use the exactly equivalent normal form

    u(tau) = phi(eta) / A,   tau = (9/n) eta,   A = lambda0^(1/n) (n/9)^(9/n),

in which the equation reads sum_k b_k u^(9-k) + |u|^(-n) u = 0 with
b_k = e_k({1 - i n/9}) -> C(9,k) as n -> 0, the cycle is O(1) in value and
derivatives for every n, and lambda0 has scaled out entirely.  The
|.|^(-n) regularization delta is applied to u, i.e. at the oscillation
scale, and the value used is recorded on every result.  For n below
`small_n_switch` the binomial (rescaled psi) coefficients replace the
exact b_k and phi-amplitudes are reported in log10 only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import odecore
from .errors import (
    EscapedToEquilibrium,
    InconsistentBracket,
    IntegrationError,
    NoConvergence,
    NoRealEquilibrium,
    UndecidedRegion,
)
from .odecore import EventSpec, IntegratorConfig, OdeProblem

CONVERGES_TO_CYCLE = "ConvergesToCycle"
HETEROCLINIC_TO_OPPOSITE = "HeteroclinicToOpposite"
UNDECIDED = "Undecided"


# --------------------------------------------------------------- parameters


@dataclass(frozen=True)
class InterfaceOscillatorParams:
    """(n, lambda0, regularization) defining the interface oscillation ODE."""

    n: float
    lambda0: float = 1.0
    reg_delta: float = 1e-10

    def __post_init__(self):
        if self.n <= 0.0:
            raise ValueError("n must be positive")
        if self.lambda0 <= 0.0:
            raise ValueError("lambda0 must be positive")
        if self.reg_delta <= 0.0:
            raise ValueError("reg_delta must be positive")

    @property
    def mu(self) -> float:
        return 9.0 / self.n


@dataclass(frozen=True)
class CycleConfig:
    cycle_tol: float = 1e-6
    classify_cycle_tol: float = 1e-4
    rtol: float = 1e-10
    atol: float = 1e-10
    integration_delta: float = 1e-4  # regularization of |u|^(-n)u at unit scale
    rescaled_integration_delta: float = 1e-8  # same, for the small-n route
    transient_returns: int = 10
    max_periods: float = 4000.0  # integration budget, in estimated periods
    chunk_periods: float = 16.0
    cycle_samples: int = 512
    small_n_switch: float = 0.3
    classify_escape_amp: float = 50.0  # |u| beyond any bounded orbit, eq units
    r_eq: float = 0.05
    dwell_span: float = 50.0  # in eta-units


@dataclass(frozen=True)
class EulerCoefficients:
    """a_k = e_k({mu - i : i=0..8}); a_0 = 1, a_1 = 9(mu-4), a_9 = prod(mu-i)."""

    mu: float
    a: np.ndarray  # length 10, a[k] multiplies phi^(9-k)


@dataclass(frozen=True)
class EquilibriumPair:
    phi0: float
    n_low: float = 9.0 / 8.0
    n_high: float = 9.0 / 7.0


@dataclass
class LimitCycle:
    n: float
    lambda0: float
    variable: str  # "eta" (samples are (eta, phi)) or "s" (samples are (s, psi))
    period: float
    log10_amplitude: float  # log10 of max |phi| over one period
    samples: np.ndarray  # shape (m, 2)
    poincare_residual: float
    n_returns: int
    amplitude: float | None = None  # max |phi|; None when it would underflow
    log10_scale: float = 0.0  # log10 factor mapping sampled values to phi
    effective_delta: float = 1e-4

    def sign_changing(self) -> bool:
        vals = self.samples[:, 1]
        return bool(vals.min() < 0.0 < vals.max())


@dataclass
class HeteroclinicResult:
    n_h: float
    bracket: tuple[float, float]
    classifications: list[tuple[float, str]]
    lambda0: float
    tol: float


# ------------------------------------------------------------- coefficients


def _esp(roots: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials of the roots, stable recurrence."""
    m = roots.size
    e = np.zeros(m + 1)
    e[0] = 1.0
    for i, r in enumerate(roots):
        for j in range(min(i + 1, m), 0, -1):
            e[j] += r * e[j - 1]
    return e


def euler_coefficients(mu: float) -> EulerCoefficients:
    """Elementary symmetric polynomials of {mu - i, i=0..8} (the coefficients
    of x^(9-k) in prod(mu - i + x))."""
    if not np.isfinite(mu):
        raise ValueError("mu must be finite")
    return EulerCoefficients(mu=mu, a=_esp(mu - np.arange(9.0)))


def _normal_coefficients(n: float) -> np.ndarray:
    """b_k = a_k (n/9)^k = e_k({1 - i n / 9}), the exact normal-form row."""
    return _esp(1.0 - np.arange(9.0) * (n / 9.0))


_BINOMIAL_ROW = np.array([math.comb(9, k) for k in range(10)], dtype=float)


def _regularized_sign_power(u, n, delta):
    """u * (u^2 + delta^2)^(-n/2), the smoothed |u|^(-n) u."""
    return u * (u * u + delta * delta) ** (-0.5 * n)


def _regularized_sign_power_deriv(u, n, delta):
    w = u * u + delta * delta
    return w ** (-0.5 * n) * (1.0 - n * u * u / w)


def _oscillation_problem(coeffs: np.ndarray, n: float, lam: float,
                         delta: float) -> OdeProblem:
    """Dimension-9 system for sum coeffs_k u^(9-k) + lam |u|^(-n) u = 0."""
    c = coeffs[:0:-1].copy()  # (c9, c8, ..., c1) against (u, u', ..., u^(8))

    def rhs(t, y):
        dy = np.empty_like(y)
        dy[:-1] = y[1:]
        dy[-1] = -(c @ y) - lam * _regularized_sign_power(y[0], n, delta)
        return dy

    def jac(t, y):
        m = np.zeros((9, 9))
        idx = np.arange(8)
        m[idx, idx + 1] = 1.0
        m[-1, :] = -c
        m[-1, 0] -= lam * _regularized_sign_power_deriv(y[0], n, delta)
        return m

    return OdeProblem(dimension=9, rhs=rhs, jac=jac, stiff=True)


def eqlc_problem(params: InterfaceOscillatorParams) -> OdeProblem:
    """The interface oscillation ODE for phi(eta) in original variables."""
    a = euler_coefficients(params.mu).a
    return _oscillation_problem(a, params.n, params.lambda0, params.reg_delta)


def rescaled_problem(n: float, lambda0: float, reg_delta: float = 1e-10) -> OdeProblem:
    """Small-n system for psi(s): sum C(9,k) psi^(9-k) = -lambda0 psi |psi|^(-n).

    The map back is phi(eta) = (n/9)^(9/n) psi(9 eta / n), applied in log10
    form only (the factor underflows below n ~ 0.064)."""
    return _oscillation_problem(_BINOMIAL_ROW, n, lambda0, reg_delta)


def equilibrium(params: InterfaceOscillatorParams) -> EquilibriumPair:
    """Constant states +-phi0 with phi0 = (-lambda0 / prod(mu-i))^(1/n).

    Requires prod(mu - i) < 0; in the regime of interest this means
    mu in (7, 8), i.e. n in (9/8, 9/7)."""
    a9 = euler_coefficients(params.mu).a[9]
    if a9 >= 0.0:
        raise NoRealEquilibrium(
            f"prod(mu - i) = {a9:.6g} >= 0 at n = {params.n}; "
            "equilibria exist only for n in (9/8, 9/7)"
        )
    phi0 = (params.lambda0 / -a9) ** (1.0 / params.n)
    return EquilibriumPair(phi0=phi0)


@dataclass(frozen=True)
class LinearLimitModes:
    """Roots of (nu+1)^9 + lambda0 = 0 and the generic stable mode."""

    lambda0: float
    roots: np.ndarray  # 9 complex roots
    decay_rate: float  # lambda0^(1/9) cos(pi/9) - 1
    frequency: float  # lambda0^(1/9) sin(pi/9)


def linear_limit_modes(lambda0: float) -> LinearLimitModes:
    if lambda0 <= 0.0:
        raise ValueError("lambda0 must be positive")
    r = lambda0 ** (1.0 / 9.0)
    m = np.arange(9)
    roots = -1.0 + r * np.exp(1j * np.pi * (2 * m + 1) / 9.0)
    return LinearLimitModes(
        lambda0=lambda0,
        roots=roots,
        decay_rate=r * np.cos(np.pi / 9.0) - 1.0,
        frequency=r * np.sin(np.pi / 9.0),
    )


# ------------------------------------------------------------- cycle search


def log10_amplitude_scale(n: float, lambda0: float) -> float:
    """log10 of A = lambda0^(1/n) (n/9)^(9/n), the phi amplitude scale."""
    return math.log10(lambda0) / n + (9.0 / n) * math.log10(n / 9.0)


def expected_period_tau(lam_hat: float = 1.0) -> float:
    """Linear-limit period estimate 2 pi / (lam^(1/9) sin(pi/9)) in tau."""
    return 2.0 * np.pi / (lam_hat ** (1.0 / 9.0) * np.sin(np.pi / 9.0))


class _ReturnTracker:
    """Rolling record of Poincare returns (u = 0, u' > 0)."""

    def __init__(self):
        self.times: list[float] = []
        self.states: list[np.ndarray] = []
        self.amplitudes: list[float] = []  # max |u| over interval ending here

    def add_chunk(self, traj, sample_count=128):
        for rec in traj.events:
            t_i = rec.t
            if self.times and t_i <= self.times[-1]:
                continue
            if self.times and self.times[-1] >= traj.t[0]:
                tt = np.linspace(self.times[-1], t_i, sample_count)
                amp = float(np.max(np.abs(traj.eval(tt)[:, 0])))
            else:
                amp = np.nan  # interval straddles a discarded chunk
            self.times.append(float(t_i))
            self.states.append(np.asarray(rec.state))
            self.amplitudes.append(amp)

    def converged(self, tol, transient, amp_floor) -> bool:
        if len(self.times) < max(transient, 0) + 4:
            return False
        t = np.asarray(self.times[-4:])
        periods = np.diff(t)
        amps = np.asarray(self.amplitudes[-3:])
        if np.any(~np.isfinite(amps)) or np.any(amps <= amp_floor):
            return False
        p_spread = (periods.max() - periods.min()) / periods.mean()
        a_spread = (amps.max() - amps.min()) / amps.mean()
        return bool(p_spread < tol and a_spread < tol)


class _DwellDetector:
    """Continuous residence inside a state-space ball around a constant state.

    Distances are measured componentwise against derivative weights
    max(1, rate^j), so a ball of radius r means every derivative sits within
    r of the equilibrium at its own natural scale.
    """

    def __init__(self, position: float, sign: float, rate: float, dim: int,
                 radius: float, dwell_span: float):
        self.target = np.zeros(dim)
        self.target[0] = sign * position
        self.weights = np.maximum(1.0, rate ** np.arange(dim))
        self.radius = radius
        self.dwell_span = dwell_span
        self.sign = sign
        self._entered_at: float | None = None

    def update(self, traj) -> float | None:
        """Feed one chunk; returns the dwell-completion time if reached."""
        d = np.max(np.abs(traj.y - self.target) / self.weights, axis=1)
        inside = d < self.radius
        for k in range(traj.t.size):
            if inside[k]:
                if self._entered_at is None:
                    self._entered_at = float(traj.t[k])
                elif traj.t[k] - self._entered_at >= self.dwell_span:
                    return float(traj.t[k])
            else:
                self._entered_at = None
        return None


def _run_to_cycle(problem, y0, config, t_estimate, cycle_tol, amp_floor,
                  dwell_detectors=(), escape_amp=1e6):
    """Integrate until Poincare returns settle, a dwell detector fires, or
    |u| exceeds escape_amp.  Returns a dict describing the outcome.

    Once a few return amplitudes are known, atol is retuned to
    amp * rtol so that cycles far from unit amplitude are resolved to the
    same relative accuracy."""
    section = EventSpec("poincare", lambda t, y: y[0], direction=+1)
    icfg = IntegratorConfig(rtol=config.rtol, atol=config.atol)
    tracker = _ReturnTracker()
    t = 0.0
    state = np.asarray(y0, dtype=float)
    budget = config.max_periods * t_estimate
    chunk = config.chunk_periods * t_estimate
    atol_tuned = False
    u_min = np.inf

    while t < budget:
        try:
            traj = odecore.integrate(problem, (t, min(t + chunk, budget)),
                                     state, icfg, events=[section])
        except IntegrationError as exc:
            return {"outcome": "integration_failed", "tracker": tracker,
                    "t": getattr(exc, "t_last", t), "error": str(exc),
                    "atol": icfg.atol, "u_min": u_min}
        tracker.add_chunk(traj)
        u_min = min(u_min, float(np.min(traj.y[:, 0])))

        for det in dwell_detectors:
            t_dwell = det.update(traj)
            if t_dwell is not None:
                return {"outcome": "equilibrium", "sign": det.sign,
                        "tracker": tracker, "t": t_dwell, "atol": icfg.atol,
                        "u_min": u_min}

        if float(np.max(np.abs(traj.y[:, 0]))) > escape_amp:
            return {"outcome": "escape", "tracker": tracker, "t": traj.t_final,
                    "atol": icfg.atol, "u_min": u_min}

        if tracker.converged(cycle_tol, config.transient_returns, amp_floor):
            return {"outcome": "cycle", "tracker": tracker, "t": traj.t_final,
                    "atol": icfg.atol, "u_min": u_min}

        if not atol_tuned:
            fin = [a for a in tracker.amplitudes if np.isfinite(a) and a > 0]
            if len(fin) >= 3:
                amp_ref = float(np.median(fin[-3:]))
                atol_new = max(amp_ref * config.rtol, 1e-280)
                if not 0.1 < atol_new / icfg.atol < 10.0:
                    icfg = IntegratorConfig(rtol=config.rtol, atol=atol_new)
                atol_tuned = True

        t = traj.t_final
        state = traj.y_final

    return {"outcome": "budget", "tracker": tracker, "t": t, "atol": icfg.atol,
            "u_min": u_min}


def _final_period(problem, tracker, config, atol=None):
    """Clean single-period sampling from the last converged return.

    The section event is armed only after a half-period dead leg: the start
    state sits exactly on the section (within the event refinement
    tolerance), so an armed event could fire immediately at period zero."""
    section = EventSpec("poincare", lambda t, y: y[0], direction=+1,
                        terminal=True)
    icfg = IntegratorConfig(rtol=config.rtol, atol=atol or config.atol)
    t_k = tracker.times[-1]
    state_k = tracker.states[-1]
    t_guess = tracker.times[-1] - tracker.times[-2]
    leg1 = odecore.integrate(problem, (t_k, t_k + 0.5 * t_guess), state_k, icfg)
    leg2 = odecore.integrate(problem, (leg1.t_final, t_k + 1.6 * t_guess),
                             leg1.y_final, icfg, events=[section])
    if leg2.terminated_by != "poincare":
        raise NoConvergence("lost the cycle while extracting the final period")
    period = leg2.t_final - t_k
    grid = np.linspace(t_k, leg2.t_final, config.cycle_samples)
    vals = np.concatenate([
        leg1.eval(grid[grid <= leg1.t_final])[:, 0],
        leg2.eval(grid[grid > leg1.t_final])[:, 0],
    ])
    scale = float(np.max(np.abs(state_k)))
    residual = float(np.max(np.abs(leg2.y_final - state_k)) / scale)
    return float(period), grid - t_k, vals, residual


def find_limit_cycle(
    params: InterfaceOscillatorParams,
    init=None,
    config: CycleConfig | None = None,
) -> LimitCycle:
    """Converged stable limit cycle of the interface oscillation ODE.

    For n >= config.small_n_switch the exact normal form is integrated and
    samples are (eta, phi); below the switch the binomial (rescaled)
    coefficients are used, samples are (s, psi), and the phi-amplitude is
    reported in log10 via the amplitude-scale map.

    init, when given, is a normal-form state (unit oscillation scale, tau
    derivatives); the default is u = 1 with zero derivatives, i.e. generic
    O(1) data at the oscillation scale.
    """
    cfg = config or CycleConfig()
    n, lam0 = params.n, params.lambda0
    log10_A = log10_amplitude_scale(n, lam0)
    exact = n >= cfg.small_n_switch
    coeffs = _normal_coefficients(n) if exact else _BINOMIAL_ROW
    delta = cfg.integration_delta if exact else cfg.rescaled_integration_delta

    problem = _oscillation_problem(coeffs, n, 1.0, delta)
    if init is None:
        y0 = np.zeros(9)
        y0[0] = 1.0
    else:
        y0 = np.asarray(init, dtype=float)
    t_est = expected_period_tau()

    detectors = []
    if exact and 9.0 / 8.0 < n < 9.0 / 7.0:
        # constant states in normal-form units: u0 = (-1/b9)^(1/n)
        u_eq = (-1.0 / coeffs[9]) ** (1.0 / n)
        detectors = [
            _DwellDetector(u_eq, s, 1.0, 9, cfg.r_eq * u_eq,
                           cfg.dwell_span * 9.0 / n)
            for s in (+1.0, -1.0)
        ]

    amp_floor = 10.0 * delta
    result = _run_to_cycle(problem, y0, cfg, t_est, cfg.cycle_tol, amp_floor,
                           detectors)
    if result["outcome"] == "equilibrium":
        raise EscapedToEquilibrium(
            f"trajectory settled at the constant state of sign {result['sign']:+.0f} "
            f"near tau={result['t']:.4g}"
        )
    if result["outcome"] != "cycle":
        n_ret = len(result["tracker"].times)
        raise NoConvergence(
            f"no converged cycle at n={n}: {result['outcome']} after "
            f"{n_ret} returns (tau={result['t']:.6g})",
            diagnostics={"outcome": result["outcome"], "returns": n_ret,
                         "t_last": result["t"], "error": result.get("error")},
        )

    period_tau, grid_tau, vals, residual = _final_period(
        problem, result["tracker"], cfg, atol=result.get("atol"))
    amp_u = float(np.max(np.abs(vals)))
    log10_amp = math.log10(amp_u) + log10_A

    if exact:
        A = 10.0 ** log10_A
        samples = np.column_stack([grid_tau * (n / 9.0), vals * A])
        return LimitCycle(
            n=n, lambda0=lam0, variable="eta",
            period=period_tau * (n / 9.0),
            log10_amplitude=log10_amp,
            samples=samples,
            poincare_residual=residual,
            n_returns=len(result["tracker"].times),
            amplitude=amp_u * A,
            log10_scale=0.0,
            effective_delta=delta,
        )

    # rescaled route: psi = lambda0^(1/n) u, s = tau
    psi_scale = lam0 ** (1.0 / n)
    samples = np.column_stack([grid_tau, vals * psi_scale])
    return LimitCycle(
        n=n, lambda0=lam0, variable="s",
        period=period_tau,
        log10_amplitude=log10_amp,
        samples=samples,
        poincare_residual=residual,
        n_returns=len(result["tracker"].times),
        amplitude=None,
        log10_scale=(9.0 / n) * math.log10(n / 9.0),
        effective_delta=delta,
    )


# ----------------------------------------------------------- classification


def _unstable_direction(problem: OdeProblem, state: np.ndarray) -> np.ndarray:
    """Real part of the most unstable eigendirection of the FD Jacobian;
    falls back to a pure first-component kick."""
    try:
        jac = odecore.jacobian_fd(problem, 0.0, state, method="central")
        eigvals, eigvecs = np.linalg.eig(jac)
        k = int(np.argmax(eigvals.real))
        v = np.real(eigvecs[:, k])
        norm = np.max(np.abs(v))
        if norm == 0.0 or not np.all(np.isfinite(v)):
            raise np.linalg.LinAlgError("degenerate eigenvector")
        return v / norm
    except np.linalg.LinAlgError:
        v = np.zeros(state.size)
        v[0] = 1.0
        return v


def classify_trajectory(
    params: InterfaceOscillatorParams,
    perturbation: float = 1e-3,
    config: CycleConfig | None = None,
) -> tuple[str, dict]:
    """Fate of a trajectory released off the +phi0 constant state.

    Returns (outcome, details) with outcome one of ConvergesToCycle,
    HeteroclinicToOpposite, Undecided.  The run uses u = phi/phi0 units
    (tau time), so the equilibria sit at +-1 and the detection ball has
    radius r_eq.  A trajectory that enters the -phi0 ball and dwells there,
    or that escapes once the cycle is destroyed, classifies as heteroclinic.
    Budget exhaustion is reported as Undecided, never silently defaulted.
    """
    if perturbation == 0.0:
        raise ValueError("perturbation must be nonzero")
    cfg = config or CycleConfig()
    n = params.n
    if not 9.0 / 8.0 < n < 9.0 / 7.0:
        raise NoRealEquilibrium(
            f"classification needs the constant states: n={n} outside (9/8, 9/7)"
        )
    b = _normal_coefficients(n)
    lam_hat = -b[9]  # equilibria of the classification units sit at +-1
    problem = _oscillation_problem(b, n, lam_hat, cfg.integration_delta)

    eq_state = np.zeros(9)
    eq_state[0] = 1.0
    direction = _unstable_direction(problem, eq_state)
    # take the inward branch of the unstable manifold: outward kicks run off
    # to |phi| = inf along the large-amplitude growth modes for mu < 8.
    # A negative perturbation releases off -phi0; the rhs is odd, so that
    # run is the exact mirror image and is computed in canonical orientation.
    if direction[0] > 0.0:
        direction = -direction
    y0 = eq_state + abs(perturbation) * direction

    t_est = expected_period_tau(lam_hat)
    detector = _DwellDetector(1.0, -1.0, 1.0, 9, cfg.r_eq,
                              cfg.dwell_span * 9.0 / n)
    result = _run_to_cycle(problem, y0, cfg, t_est, cfg.classify_cycle_tol,
                           10.0 * cfg.integration_delta, [detector],
                           escape_amp=cfg.classify_escape_amp)

    details = {
        "n": n,
        "returns": len(result["tracker"].times),
        "t_last": result["t"],
        "raw": result["outcome"],
        "u_min": result.get("u_min"),
    }
    if result["outcome"] == "cycle":
        return CONVERGES_TO_CYCLE, details
    if result["outcome"] == "equilibrium":
        return HETEROCLINIC_TO_OPPOSITE, details
    if result["outcome"] == "escape" and result.get("u_min", np.inf) < -0.5:
        # cycle destroyed: the excursion crossed past -phi0 and ran off
        return HETEROCLINIC_TO_OPPOSITE, details
    return UNDECIDED, details


def locate_heteroclinic(
    lambda0: float,
    bracket: tuple[float, float] = (9.0 / 8.0 + 1e-3, 9.0 / 7.0 - 1e-3),
    tol: float = 5e-3,
    config: CycleConfig | None = None,
    perturbation: float = 1e-3,
) -> HeteroclinicResult:
    """Bisection for the heteroclinic bifurcation point n_h of the cycle.

    classify_trajectory must differ at the bracket ends; every classification
    is logged.  n_h is the midpoint of the final bracket."""
    cfg = config or CycleConfig()
    n_lo, n_hi = bracket
    if not n_lo < n_hi:
        raise ValueError("bracket must satisfy n_low < n_high")
    log: list[tuple[float, str]] = []

    def classify(n):
        params = InterfaceOscillatorParams(n=n, lambda0=lambda0)
        outcome, _ = classify_trajectory(params, perturbation, cfg)
        if outcome == UNDECIDED:
            # one escalation with a 4x budget before giving up
            bigger = replace(cfg, max_periods=4.0 * cfg.max_periods)
            outcome, _ = classify_trajectory(params, perturbation, bigger)
        log.append((n, outcome))
        if outcome == UNDECIDED:
            raise UndecidedRegion(f"classification undecided at n={n}")
        return outcome

    lo_out = classify(n_lo)
    hi_out = classify(n_hi)
    if lo_out == hi_out:
        raise InconsistentBracket(
            f"both bracket ends classify as {lo_out}; no bifurcation inside"
        )

    while n_hi - n_lo > tol:
        mid = 0.5 * (n_lo + n_hi)
        if classify(mid) == lo_out:
            n_lo = mid
        else:
            n_hi = mid

    return HeteroclinicResult(
        n_h=0.5 * (n_lo + n_hi),
        bracket=(n_lo, n_hi),
        classifications=log,
        lambda0=lambda0,
        tol=tol,
    )
