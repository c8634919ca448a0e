"""Closed-form small-n laws, WKBJ phases, spectra and the operator gap bound.

Conventions: all complex powers use the principal branch; formulas are
evaluated for positive similarity coordinates (y, Y, X > 0), where the
principal branch matches the derivations.  Angle 4*pi/9 (80 degrees) is the
slow-decay WKBJ direction of the tenth-order kernel; tan(4*pi/9) is the
phase-ratio root selected by the far-field matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, OutOfValidity

THETA = 4.0 * np.pi / 9.0
COS_THETA = np.cos(THETA)
SEC_THETA = 1.0 / COS_THETA

# lambda^10 - 35 lambda^8 + 90 lambda^6 + 42 lambda^4 - 75 lambda^2 + 9
DEGREE10_COEFFS = np.array([1.0, 0.0, -35.0, 0.0, 90.0, 0.0, 42.0, 0.0,
                            -75.0, 0.0, 9.0])
# lambda^6 - 33 lambda^4 + 27 lambda^2 - 3 (the factor carrying tan(4 pi/9))
SEXTIC_COEFFS = np.array([1.0, 0.0, -33.0, 0.0, 27.0, 0.0, -3.0])


def _relative_poly_residual(coeffs: np.ndarray, x: float) -> float:
    """|p(x)| divided by the largest monomial magnitude."""
    powers = x ** np.arange(coeffs.size - 1, -1, -1, dtype=float)
    terms = coeffs * powers
    return abs(terms.sum()) / np.max(np.abs(terms))


def sextic_residual(x: float) -> float:
    return _relative_poly_residual(SEXTIC_COEFFS, x)


def degree10_residual(x: float) -> float:
    return _relative_poly_residual(DEGREE10_COEFFS, x)


def lambda_root(tol: float = 1e-8) -> float:
    """tan(4 pi / 9), the phase-ratio root of the characteristic equation.

    Validates that the value zeroes both the sextic factor and the full
    degree-10 polynomial to `tol` relative residual.  (sqrt(3) also zeroes
    the degree-10 polynomial through its quadratic factor, but not the
    sextic; the matching selects this root.)"""
    lam = np.tan(THETA)
    r6 = sextic_residual(lam)
    r10 = degree10_residual(lam)
    if r6 > tol or r10 > tol:
        raise ArithmeticError(
            f"characteristic residuals {r6:.2e}/{r10:.2e} exceed {tol:.0e}"
        )
    return float(lam)


# ------------------------------------------------------------ interface law


def interface_similarity(n: float) -> float:
    """Small-n free-boundary asymptote y0 ~ 10 (sec(4pi/9)/n)^(9/10)."""
    if n <= 0.0:
        raise ValueError("n must be positive")
    return 10.0 * (SEC_THETA / n) ** 0.9


def interface_position(n: float, t: float) -> float:
    """Physical interface x0(t) ~ y0(n) t^(1/10) (small-n asymptote)."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    return interface_similarity(n) * t**0.1


# -------------------------------------------------------------- WKBJ phases


@dataclass(frozen=True)
class ComplexPhase:
    value: complex
    derivative: complex
    branch: str = "principal"


def wkbj_eigen_phase(y: float, sign: int = +1) -> ComplexPhase:
    """Far-field phase phi_pm(y) = (9/10^(10/9)) e^(pm 4 pi i/9) y^(10/9).

    The derivative satisfies the eikonal identity 10 (phi')^9 = y exactly
    (e^(pm 4 pi i) = 1)."""
    if y <= 0.0:
        raise ValueError("y must be positive")
    direction = np.exp(1j * np.sign(sign) * THETA)
    value = 9.0 * 10.0 ** (-10.0 / 9.0) * direction * y ** (10.0 / 9.0)
    derivative = 10.0 ** (-1.0 / 9.0) * direction * y ** (1.0 / 9.0)
    return ComplexPhase(value=complex(value), derivative=complex(derivative))


def farfield_envelope(y: float, alpha: float, kplus: complex,
                      kminus: complex | None = None) -> float:
    """Real far-field tail: the conjugate pair of WKBJ branches combined.

    f(y) = 2 |k| y^(5(2 alpha - 1)/9) e^(-Re phi) cos(Im phi - arg k).
    kminus defaults to conj(kplus) and must equal it for a real result."""
    if kminus is None:
        kminus = np.conj(kplus)
    if abs(kminus - np.conj(kplus)) > 1e-12 * max(1.0, abs(kplus)):
        raise ValueError("kminus must be the complex conjugate of kplus")
    phase = wkbj_eigen_phase(y, +1).value
    algebraic = y ** (5.0 * (2.0 * alpha - 1.0) / 9.0)
    return float(2.0 * np.real(kplus * algebraic * np.exp(-phase)))


# ------------------------------------------------- Hamilton-Jacobi potential


@dataclass(frozen=True)
class HJPotential:
    X: float
    t: float
    Phi: float
    valid: bool = True


def _hj_log_argument(X: float, t: float) -> float:
    return 1.0 - COS_THETA * (X**10 / (1e10 * t)) ** (1.0 / 9.0)


def hj_potential(X: float, t: float) -> HJPotential:
    """Slow outer phase Phi = -9 ln(1 - cos(4pi/9) (X^10 / (10^10 t))^(1/9)).

    Diverges to +inf at the interface, where the log argument reaches 0."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    arg = _hj_log_argument(X, t)
    if arg <= 0.0:
        raise OutOfValidity(
            f"log argument {arg:.3g} <= 0 at X={X}, t={t}: beyond the interface"
        )
    return HJPotential(X=X, t=t, Phi=float(-9.0 * np.log(arg)), valid=True)


def hj_residual(X: float, t: float, h: float = 1e-4) -> float:
    """Central-difference residual of the potential equation

        Phi_t = -sec^9(4pi/9) e^(-Phi) (Phi_X)^10

    evaluated with steps h in X and t; validates the closed form at O(h^2)."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    for XX, tt in ((X - h, t), (X + h, t), (X, t - h), (X, t + h)):
        if tt <= 0.0 or _hj_log_argument(XX, tt) <= 0.0:
            raise OutOfValidity("finite-difference stencil leaves the validity region")
    phi_t = (hj_potential(X, t + h).Phi - hj_potential(X, t - h).Phi) / (2.0 * h)
    phi_x = (hj_potential(X + h, t).Phi - hj_potential(X - h, t).Phi) / (2.0 * h)
    phi = hj_potential(X, t).Phi
    return float(abs(phi_t + SEC_THETA**9 * np.exp(-phi) * phi_x**10))


def outer_phase_b(Y: float, sign: int = +1) -> complex:
    """Outer eigenfunction phase b(Y) = (1 pm i lambda) 9 ln(1 - cos(4pi/9)(Y/10)^(10/9)).

    Im b / Re b = pm lambda by construction; b -> -inf at the support edge."""
    if Y <= 0.0:
        raise ValueError("Y must be positive")
    arg = 1.0 - COS_THETA * (Y / 10.0) ** (10.0 / 9.0)
    if arg <= 0.0:
        raise OutOfValidity(f"log argument {arg:.3g} <= 0 at Y={Y}")
    lam = np.tan(THETA)
    return complex((1.0 + 1j * np.sign(sign) * lam) * 9.0 * np.log(arg))


# ------------------------------------------------------------------ spectra


@dataclass(frozen=True)
class SpectralModel:
    """Rescaled linear operators: B = Delta^5 + y.grad/10 + (N/10) Id and its
    n-perturbed analogue with drift (1 - alpha n)/10 and shift alpha."""

    N: int = 1
    k: int = 0
    a_shift: float = 0.321

    def lambda_k(self, k: int) -> float:
        return -k / 10.0

    def alpha_k(self, n: float, k: int | None = None) -> float:
        kk = self.k if k is None else k
        return self.N / (10.0 + self.N * n) + kk / 10.0


@dataclass(frozen=True)
class SpectrumTable:
    n: float
    k_values: np.ndarray
    sigma_B: np.ndarray  # -k/10
    alpha: np.ndarray  # predictor alpha_k(n) per row
    sigma_Bn: np.ndarray  # spectrum of B_n at the model's own alpha


def spectrum(model: SpectralModel, n: float, K: int = 3) -> SpectrumTable:
    """sigma(B) = {-k/10} and sigma(B_n) = {-k(1 - alpha n)/10 + alpha} for
    k = 0..K, with alpha = alpha_{model.k}(n).  At n = 0 the perturbed
    spectrum is sigma(B) shifted by alpha."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    ks = np.arange(K + 1)
    alpha_model = model.alpha_k(n)
    if abs(model.a_shift) > 0:
        gaps = np.abs((-ks * (1 - alpha_model * n) / 10.0 + alpha_model)
                      - (alpha_model + model.a_shift))
        if np.any(gaps < 1e-12):
            raise ValueError("a_shift collides with the perturbed spectrum")
    return SpectrumTable(
        n=n,
        k_values=ks,
        sigma_B=-ks / 10.0,
        alpha=np.array([model.alpha_k(n, int(k)) for k in ks]),
        sigma_Bn=-ks * (1.0 - alpha_model * n) / 10.0 + alpha_model,
    )


# --------------------------------------------------------- operator gap


@dataclass(frozen=True)
class KatoGap:
    measured: float
    bound: float
    n: float
    k: int
    N: int


def kato_gap(u_samples, n: float, k: int, N: int = 1,
             grid=None) -> KatoGap:
    """Operator-difference norm against its first-derivative bound.

    On the unit interval, ((B_n + aI) - (B + aI)) u =
    -(alpha_k(n) n / 10) y u' + (alpha_k(n) - alpha_k(0)) u, which needs only
    first derivatives of u.  measured is its L2 norm; bound is
    n alpha_k(n) ||y u'|| + |alpha_k(n) - alpha_k(0)| ||u||, and
    measured <= bound holds by the triangle inequality."""
    u = np.asarray(u_samples, dtype=float)
    if u.ndim != 1 or u.size < 32:
        raise GridTooCoarse("need at least 32 samples on the unit interval")
    y = np.linspace(0.0, 1.0, u.size) if grid is None else np.asarray(grid)
    if y.shape != u.shape:
        raise ValueError("grid and samples must have matching shapes")

    model = SpectralModel(N=N)
    alpha_n = model.alpha_k(n, k)
    alpha_0 = model.alpha_k(0.0, k)
    du = np.gradient(u, y)

    def l2(v):
        return float(np.sqrt(np.trapezoid(v * v, y)))

    diff = -(alpha_n * n / 10.0) * y * du + (alpha_n - alpha_0) * u
    measured = l2(diff)
    bound = n * alpha_n * l2(y * du) + abs(alpha_n - alpha_0) * l2(u)
    if measured > bound * (1.0 + 1e-10):
        raise ArithmeticError(
            f"measured gap {measured} exceeds its bound {bound}"
        )
    return KatoGap(measured=measured, bound=bound, n=n, k=k, N=N)


def epsilon_schedule(n: float) -> tuple[float, float]:
    """Regularization schedule eps(n) = exp(-1/sqrt(n)) with its decay
    product n |ln eps(n)| = sqrt(n), which vanishes as n -> 0."""
    if n <= 0.0:
        raise ValueError("n must be positive")
    eps = float(np.exp(-1.0 / np.sqrt(n)))
    return eps, float(np.sqrt(n))
