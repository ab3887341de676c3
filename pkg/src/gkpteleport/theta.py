"""Jacobi theta functions theta3/theta4 for complex argument and lattice parameter.

The lattice-sum convention used throughout is

    theta3{z | tau} = sum_l exp(i*pi*tau*l^2) * exp(2i*l*z),      Im(tau) > 0,
    theta4{z | tau} = theta3{z + pi/2 | tau},

with the nome written as omega = exp(i*pi*tau).  Three evaluation routes are
provided: the direct series (reference), a modular-transform route for small
Im(tau), and a finite Gaussian-comb decomposition valid when the real part of
the nome phase is a rational multiple of pi (weak damping).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidWindow, NonconvergentParameters, NotCoprime, ToleranceUnreachable

DEFAULT_TOL = 1e-14
DEFAULT_MAX_TERMS = 1_000_000
#: Im(tau) below which the auto dispatcher takes the modular route.
MODULAR_REGIME_THRESHOLD = 0.5

__all__ = [
    "ThetaArgs",
    "RationalAngle",
    "theta3_series",
    "theta3_modular",
    "theta3",
    "theta4",
    "theta3_rational",
    "theta_pair",
]


@dataclass(frozen=True)
class ThetaArgs:
    """Argument z and lattice parameter tau of a theta evaluation."""

    z: complex
    tau: complex

    def __post_init__(self):
        if not complex(self.tau).imag > 0:
            raise NonconvergentParameters(
                f"Im(tau) must be positive for convergence, got tau={self.tau}"
            )

    @property
    def nome(self) -> complex:
        return cmath.exp(1j * math.pi * self.tau)


@dataclass(frozen=True)
class RationalAngle:
    """Coprime integer pair (u, v) encoding a rotation with tan(theta_r) = u/v."""

    u: int
    v: int

    def __post_init__(self):
        if self.v <= 0:
            raise NotCoprime(f"denominator must be positive, got v={self.v}")
        if math.gcd(abs(self.u), self.v) != 1:
            raise NotCoprime(f"(u, v)=({self.u}, {self.v}) share a common factor")

    @property
    def theta_r(self) -> float:
        return math.atan2(self.u, self.v)

    def beta_prime(self, beta: float) -> float:
        """Effective damping (1 + u^2/v^2) * beta / 2 of the rational decomposition."""
        return 0.5 * (1.0 + (self.u / self.v) ** 2) * beta

    @property
    def hypot(self) -> float:
        return math.hypot(self.u, self.v)


def theta3_series(args: ThetaArgs, tol: float = DEFAULT_TOL,
                  max_terms: int = DEFAULT_MAX_TERMS) -> complex:
    """Direct symmetric summation of the theta3 lattice series.

    Terms are added in +-l pairs and summation stops once the pair magnitude
    stays below ``tol`` relative to the running sum for 3 consecutive l (theta
    terms are not monotone in magnitude for complex z, so a single small term
    is not a safe stopping signal).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = complex(args.z)
    tau = complex(args.tau)
    total = 1.0 + 0.0j
    largest = 1.0
    small_streak = 0
    for ell in range(1, max_terms + 1):
        a = 1j * math.pi * tau * ell * ell
        pair = cmath.exp(a + 2j * ell * z) + cmath.exp(a - 2j * ell * z)
        total += pair
        mag = abs(pair)
        largest = max(largest, mag)
        # the absolute floor keeps the rule meaningful near zeros of theta,
        # where |total| can be arbitrarily small compared to the terms
        if mag <= max(tol * abs(total), 1e-16 * largest):
            small_streak += 1
            if small_streak >= 3:
                return total
        else:
            small_streak = 0
    raise ToleranceUnreachable(
        f"theta3 series did not reach tol={tol} within {max_terms} terms"
    )


def _reduce(z: complex, tau: complex, threshold: float):
    """Shift (z, tau) into a rapidly convergent region, tracking the log factor.

    Uses the exact invariances z -> z + pi, tau -> tau + 2, the nome-sign shift
    tau -> tau +- 1 (z shifted by pi/2), the quasi-periodicity z -> z + n*pi*tau,
    and the modular inversion tau -> -1/tau.  Returns (z', tau', log_factor) with
    theta3{z|tau} = exp(log_factor) * theta3{z'|tau'}.
    """
    log_factor = 0.0 + 0.0j
    for _ in range(256):
        # real part of tau into [-1/2, 1/2]
        shift = round(tau.real / 2.0)
        tau -= 2.0 * shift
        if abs(tau.real) > 0.5:
            step = math.copysign(1.0, tau.real)
            tau -= step
            z += step * math.pi / 2.0
        # argument into the fundamental cell
        z -= math.pi * round(z.real / math.pi)
        n = round(z.imag / (math.pi * tau.imag))
        if n:
            z0 = z - n * math.pi * tau
            log_factor += -1j * math.pi * tau * n * n - 2j * n * z0
            z = z0
        if tau.imag >= threshold:
            return z, tau, log_factor
        # modular inversion at least doubles Im(tau) once |Re(tau)| <= 1/2
        log_factor += -1j * z * z / (math.pi * tau) - 0.5 * cmath.log(-1j * tau)
        z, tau = z / tau, -1.0 / tau
    raise ToleranceUnreachable(f"tau reduction did not terminate for tau={tau}")


def theta3_modular(args: ThetaArgs, tol: float = DEFAULT_TOL,
                   threshold: float = MODULAR_REGIME_THRESHOLD) -> complex:
    """Evaluate theta3 through at least one modular inversion.

    The reduced series converges rapidly even for Im(tau) << 1, where the
    direct series would need O(1/sqrt(Im tau)) terms.
    """
    z, tau, log_factor = _reduce(complex(args.z), complex(args.tau), threshold)
    # one mandatory inversion so this route is genuinely independent of the
    # plain series wherever both converge
    log_factor += -1j * z * z / (math.pi * tau) - 0.5 * cmath.log(-1j * tau)
    z, tau = z / tau, -1.0 / tau
    if tau.imag < threshold:
        z, tau, extra = _reduce(z, tau, threshold)
        log_factor += extra
    return cmath.exp(log_factor) * theta3_series(ThetaArgs(z, tau), tol)


def theta3(args: ThetaArgs, tol: float = DEFAULT_TOL,
           threshold: float = MODULAR_REGIME_THRESHOLD) -> complex:
    """theta3 with automatic series/modular regime selection."""
    if complex(args.tau).imag >= threshold:
        z, tau, log_factor = _reduce(complex(args.z), complex(args.tau), threshold)
        return cmath.exp(log_factor) * theta3_series(ThetaArgs(z, tau), tol)
    return theta3_modular(args, tol, threshold)


def theta4(args: ThetaArgs, tol: float = DEFAULT_TOL,
           threshold: float = MODULAR_REGIME_THRESHOLD) -> complex:
    """theta4{z|tau} = theta3{z + pi/2 | tau}."""
    return theta3(ThetaArgs(complex(args.z) + math.pi / 2.0, args.tau), tol, threshold)


def theta_pair(z, tau: complex, log_prefactor=0.0, tol: float = DEFAULT_TOL,
               max_terms: int = DEFAULT_MAX_TERMS):
    """exp(log_prefactor) * (theta3{z|tau}, theta4{z|tau}) in one series pass.

    ``z`` and ``log_prefactor`` may be scalars or broadcastable arrays; ``tau``
    is a scalar.  Folding the prefactor into every term keeps the evaluation
    overflow-safe when a decaying prefactor multiplies a growing theta value.
    The truncation length is a tail bound from the term envelope
    exp(-pi*Im(tau)*l^2 + 2*l*|Im z|), so accuracy is relative to the largest
    retained term.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise NonconvergentParameters(f"Im(tau) must be positive, got tau={tau}")
    scalar = np.ndim(z) == 0 and np.ndim(log_prefactor) == 0
    shape = np.broadcast_shapes(np.shape(z), np.shape(log_prefactor))
    z = np.broadcast_to(np.asarray(z, dtype=complex), shape)
    pref = np.broadcast_to(np.asarray(log_prefactor, dtype=complex), shape)
    im_tau = tau.imag
    m = float(np.max(np.abs(z.imag))) if z.size else 0.0
    budget = math.log(1.0 / tol) + 4.0
    terms = int(m / (math.pi * im_tau) + math.sqrt(budget / (math.pi * im_tau))) + 3
    if terms > max_terms:
        raise ToleranceUnreachable(
            f"theta pair needs {terms} terms (cap {max_terms}) at Im(tau)={im_tau}"
        )
    s3 = np.exp(pref)
    s4 = s3.copy()
    for ell in range(1, terms + 1):
        a = 1j * math.pi * tau * ell * ell
        t = np.exp(pref + (a + 2j * ell * z)) + np.exp(pref + (a - 2j * ell * z))
        s3 += t
        if ell % 2:
            s4 -= t
        else:
            s4 += t
    if scalar:
        return complex(s3), complex(s4)
    return s3, s4


def theta3_rational(k: float, angle: RationalAngle, beta: float,
                    ell_window: int = 8, sign_theta4: bool = False) -> complex:
    """Finite Gaussian-comb value of theta3 (or theta4) for a rational-tangent angle.

    Valid in the weak-damping regime: the nome phase becomes pi*u/(2v) times a
    perfect square plus a Gaussian decay with effective damping beta', and the
    series collapses to 2v residue phases times a comb of Gaussians centred at
    z = -l*pi/(2v).  The argument is taken at its zero-damping value
    z = -(pi*k/2) * sqrt(u^2+v^2)/v, so agreement with the exact series is
    O(beta^2) in the exponent.

    Parameters
    ----------
    k : dimensionless measurement outcome (q_m in units of sqrt(pi))
    angle : rational rotation tan(theta_r) = u/v
    beta : damping strength, > 0
    ell_window : number of Gaussian peaks kept on each side of the nearest peak
    sign_theta4 : evaluate the theta4 variant (alternating residue signs)
    """
    if ell_window < 1:
        raise InvalidWindow(f"ell_window must be >= 1, got {ell_window}")
    if beta <= 0:
        raise ValueError("beta must be positive")
    u, v = angle.u, angle.v
    bp = angle.beta_prime(beta)
    z = -(math.pi * k / 2.0) * angle.hypot / v
    spacing = math.pi / (2.0 * v)
    ell_near = round(-z / spacing)
    total = 0.0 + 0.0j
    for n in range(2 * v):
        residue_phase = cmath.exp(1j * math.pi * n * n * u / (2.0 * v))
        if sign_theta4 and n % 2:
            residue_phase = -residue_phase
        comb = 0.0 + 0.0j
        for ell in range(ell_near - ell_window, ell_near + ell_window + 1):
            x = z + ell * spacing
            comb += cmath.exp(1j * math.pi * ell * n / v) * math.exp(
                -x * x / (math.pi * bp)
            )
        total += residue_phase * comb
    return total / (2.0 * v * math.sqrt(bp))
