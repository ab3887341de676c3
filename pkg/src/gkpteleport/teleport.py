"""Output coefficients of the GKP gate-teleportation circuit.

A damped sensor-state pair is entangled, one mode is rotated by theta_r in
quadrature space and measured in q.  The unmeasured mode collapses to
C_plus |+~> + C_minus |-~>, with both coefficients functions of the
dimensionless outcome k = q_m / sqrt(pi) and of zeta = theta_r + i*beta.

Three independent evaluation routes are implemented:

* ``coefficients_theta``   -- closed form: a common prefactor times
  theta3/theta4 at z = -(k*pi/2)*sec(zeta) with lattice parameter tan(zeta)/2;
* ``coefficients_lattice`` -- direct Gaussian-damped sum over the position comb;
* ``coefficients_mehler``  -- truncated Fock-space double sum over harmonic
  oscillator wavefunctions (the derivation form, kept as an oracle).

The first two are exactly equal; the third converges to them as the Fock
cutoff grows.  Each of the first two has a trigonometric pole (theta route at
theta_r near pi/2, lattice route near 0); ``coefficients`` dispatches to
whichever route is well conditioned.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateState, InvalidWindow, SingularRotation, TailNotConverged
from .theta import theta_pair

SQRT_PI = math.sqrt(math.pi)
#: |cos zeta| (theta route) or |sin zeta| (lattice route) below this is a pole.
SINGULARITY_TOL = 1e-9

__all__ = [
    "ProtocolParams",
    "MeasurementOutcome",
    "OutputCoefficients",
    "BlochPoint",
    "coefficients_theta",
    "coefficients_lattice",
    "coefficients_mehler",
    "coefficients",
    "coefficient_arrays",
    "bloch_angles",
    "prob_density",
    "hermite_functions",
    "wrap_angle",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol knobs: damping strength beta and applied rotation theta_r.

    theta_r is stored reduced modulo 2*pi; beta must be strictly positive
    (zero damping collapses the outcome distribution onto delta peaks and is
    handled analytically by the classification module instead).
    """

    beta: float
    theta_r: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "theta_r", self.theta_r % (2.0 * math.pi))

    @property
    def zeta(self) -> complex:
        return complex(self.theta_r, self.beta)


@dataclass(frozen=True)
class MeasurementOutcome:
    """Homodyne position outcome q_m with its dimensionless rescaling k."""

    q_m: float
    k: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", self.q_m / SQRT_PI)

    @classmethod
    def from_k(cls, k: float) -> "MeasurementOutcome":
        out = cls(k * SQRT_PI)
        object.__setattr__(out, "k", float(k))
        return out


@dataclass(frozen=True)
class OutputCoefficients:
    """Unnormalized amplitudes of |+~> and |-~> for one measurement outcome."""

    c_plus: complex
    c_minus: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2

    @property
    def ratio(self) -> complex:
        return self.c_minus / self.c_plus


@dataclass(frozen=True)
class BlochPoint:
    """Bloch-sphere coordinates theta in [0, pi], phi in (-pi, pi]."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta out of range: {self.theta}")
        if not -math.pi < self.phi <= math.pi:
            raise ValueError(f"phi out of range: {self.phi}")

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "BlochPoint":
        theta = min(max(theta, 0.0), math.pi)
        phi = 0.0 if theta in (0.0, math.pi) else wrap_angle(phi)
        return cls(theta, phi)

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def angle_to(self, other: "BlochPoint") -> float:
        """Great-circle angle between two Bloch points."""
        c = float(np.dot(self.unit_vector(), other.unit_vector()))
        return math.acos(min(1.0, max(-1.0, c)))


def wrap_angle(phi: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    return math.pi - (math.pi - phi) % (2.0 * math.pi)


def _theta_route_parts(k, params: ProtocolParams):
    zeta = params.zeta
    cos_z = cmath.cos(zeta)
    if abs(cos_z) <= SINGULARITY_TOL:
        raise SingularRotation(
            "theta",
            f"|cos(zeta)|={abs(cos_z):.3e} at theta_r={params.theta_r}, "
            f"beta={params.beta}; use the lattice route near theta_r = pi/2",
        )
    tan_z = cmath.tan(zeta)
    z = -(np.asarray(k) * (math.pi / 2.0)) / cos_z
    log_pref = 1j * (math.pi / 2.0) * np.asarray(k) ** 2 * tan_z - 0.5 * cmath.log(
        2.0 * (1.0 + cmath.exp(2j * zeta))
    )
    return z, tan_z / 2.0, log_pref


def coefficients_theta(outcome: MeasurementOutcome, params: ProtocolParams,
                       tol: float = 1e-14) -> OutputCoefficients:
    """Closed-form route: prefactor times theta3/theta4.

    The common prefactor is kept because it is not a pure phase (zeta is
    complex) and its magnitude shapes the outcome probability density.  It is
    folded into the series exponents so that a decaying prefactor times a
    growing theta value never overflows.
    """
    z, tau, log_pref = _theta_route_parts(outcome.k, params)
    c_plus, c_minus = theta_pair(complex(z), tau, complex(log_pref), tol)
    return OutputCoefficients(c_plus, c_minus)


def _lattice_route_parts(params: ProtocolParams):
    zeta = params.zeta
    sin_z = cmath.sin(zeta)
    if abs(sin_z) <= SINGULARITY_TOL:
        raise SingularRotation(
            "lattice",
            f"|sin(zeta)|={abs(sin_z):.3e} at theta_r={params.theta_r}, "
            f"beta={params.beta}; use the theta route near theta_r = 0",
        )
    cot = cmath.cos(zeta) / sin_z
    csc = 1.0 / sin_z
    log_pref = -0.5 * cmath.log(1.0 - cmath.exp(2j * zeta))
    return cot, csc, log_pref


def _lattice_window(k_max: float, cot: complex, csc: complex, tol: float) -> int:
    # term envelope exp(-(pi/2)|Im cot| (x - x0)^2) around x0 = k*Im(csc)/Im(cot)
    x0 = k_max * abs(csc.imag) / abs(cot.imag)
    spread = math.sqrt(2.0 * (math.log(1.0 / tol) + 4.0) / (math.pi * abs(cot.imag)))
    return int((x0 + spread + 1.0) / 2.0) + 2


def coefficients_lattice(outcome: MeasurementOutcome, params: ProtocolParams,
                         j_window: int | None = None,
                         tol: float = 1e-14) -> OutputCoefficients:
    """Direct Gaussian-damped sum over the position comb x = (2j+s)*sqrt(pi).

    The quadratic prefactor phase is folded into each term, which keeps every
    exponent's real part non-positive.  When ``j_window`` is given it is used
    as-is and the first omitted term is checked against the retained sum; a
    tail above 1e-14 of the sum's scale raises TailNotConverged.
    """
    cot, csc, log_pref = _lattice_route_parts(params)
    k = outcome.k
    auto = j_window is None
    J = _lattice_window(abs(k), cot, csc, tol) if auto else int(j_window)
    if J < 1:
        raise TailNotConverged(f"j_window must be >= 1, got {J}")
    out = []
    for s in (0, 1):
        total = 0.0 + 0.0j
        largest = 0.0
        for j in range(-J, J + 1):
            x = 2 * j + s
            term = cmath.exp(
                log_pref
                - 1j * (math.pi / 2.0) * cot * (k * k + x * x)
                + 1j * math.pi * x * k * csc
            )
            total += term
            largest = max(largest, abs(term))
        if not auto:
            edge = 0.0
            for x in (2 * (J + 1) + s, -2 * (J + 1) + s):
                e = (
                    log_pref
                    - 1j * (math.pi / 2.0) * cot * (k * k + x * x)
                    + 1j * math.pi * x * k * csc
                )
                edge = max(edge, math.exp(e.real))
            if edge > 1e-14 * max(abs(total), largest):
                raise TailNotConverged(
                    f"lattice tail {edge:.3e} exceeds 1e-14 of the sum scale "
                    f"with j_window={J}"
                )
        out.append(total)
    return OutputCoefficients(out[0], out[1])


def hermite_functions(x: float, n_max: int) -> np.ndarray:
    """Harmonic oscillator wavefunctions psi_0..psi_n_max at position x.

    Uses the normalized three-term recurrence, so no factorials appear.  Far
    outside the classical turning point psi_0 underflows; the recurrence is
    then run in a rescaled frame and values are written back as soon as they
    are representable (anything below ~1e-280 is reported as 0.0, which is far
    under double rounding error for every downstream sum).
    """
    out = np.zeros(n_max + 1)
    half_x_sq = 0.5 * x * x
    # exponent carried separately until exp(-x^2/2 + scale) is representable
    scale = max(0.0, half_x_sq - 600.0)
    p_prev = math.pi ** -0.25 * math.exp(scale - half_x_sq)
    out[0] = p_prev if scale == 0.0 else 0.0
    if n_max == 0:
        return out
    p_cur = math.sqrt(2.0) * x * p_prev
    out[1] = p_cur if scale == 0.0 else 0.0
    for n in range(1, n_max):
        p_next = math.sqrt(2.0 / (n + 1)) * x * p_cur - math.sqrt(n / (n + 1)) * p_prev
        p_prev, p_cur = p_cur, p_next
        if scale > 0.0:
            m = max(abs(p_cur), abs(p_prev))
            if m > 1e250:
                drop = min(scale, math.log(m))
                f = math.exp(-drop)
                p_cur *= f
                p_prev *= f
                scale -= drop
            if scale < 650.0:
                val = p_cur * math.exp(-scale)
                out[n + 1] = val if abs(val) > 1e-280 else 0.0
            # else: still too small to represent; leave 0.0
        else:
            out[n + 1] = p_cur
    return out


def coefficients_mehler(outcome: MeasurementOutcome, params: ProtocolParams,
                        n_max: int = 400,
                        j_window: int | None = None) -> OutputCoefficients:
    """Fock-space double sum oracle: sum_j sum_n psi_n((2j+s)sqrt(pi)) w^n psi_n(q_m).

    ``w = exp(i*theta_r - beta)``, so the n-tail decays like exp(-beta*n); the
    cutoff must satisfy beta*n_max >> 1 for small beta.  The default comb
    window covers every lattice point inside the classical turning region of
    n_max (points beyond it contribute at the underflow level).
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if j_window is None:
        j_window = math.ceil(math.sqrt(2.0 * n_max + 1.0) / (2.0 * SQRT_PI)) + 2
    w = cmath.exp(1j * params.theta_r - params.beta)
    wn = w ** np.arange(n_max + 1)
    psi_q = hermite_functions(outcome.q_m, n_max)
    out = []
    for s in (0, 1):
        comb = np.zeros(n_max + 1)
        for j in range(-j_window, j_window + 1):
            comb += hermite_functions((2 * j + s) * SQRT_PI, n_max)
        out.append(complex(np.sum(comb * wn * psi_q)))
    return OutputCoefficients(out[0], out[1])


def _prefer_theta(params: ProtocolParams) -> bool:
    zeta = params.zeta
    return abs(cmath.cos(zeta)) >= abs(cmath.sin(zeta))


def coefficients(outcome: MeasurementOutcome, params: ProtocolParams,
                 tol: float = 1e-14) -> OutputCoefficients:
    """Route dispatcher: theta route away from theta_r = pi/2, lattice near it.

    The poles of sec/tan (theta route) and cot/csc (lattice route) are
    artifacts of the respective closed forms, not of the physics; the two
    routes together cover every theta_r for any beta > 0.
    """
    if _prefer_theta(params):
        return coefficients_theta(outcome, params, tol)
    return coefficients_lattice(outcome, params, tol=tol)


def coefficient_arrays(k, params: ProtocolParams, tol: float = 1e-14):
    """Vectorized dispatcher over an array of dimensionless outcomes k.

    Returns (c_plus, c_minus) arrays; used by the grid pushforward.
    """
    k = np.asarray(k, dtype=float)
    if _prefer_theta(params):
        z, tau, log_pref = _theta_route_parts(k, params)
        return theta_pair(z, tau, log_pref, tol)
    cot, csc, log_pref = _lattice_route_parts(params)
    J = _lattice_window(float(np.max(np.abs(k))) if k.size else 0.0, cot, csc, tol)
    out = []
    for s in (0, 1):
        total = np.zeros(k.shape, dtype=complex)
        for j in range(-J, J + 1):
            x = 2 * j + s
            total += np.exp(
                log_pref
                - 1j * (math.pi / 2.0) * cot * (k * k + x * x)
                + 1j * math.pi * x * k * csc
            )
        out.append(total)
    return out[0], out[1]


def bloch_angles(coeffs: OutputCoefficients) -> BlochPoint:
    """Bloch coordinates of the heralded output state.

    theta = 2*atan(|C-|/|C+|); phi is the phase of C- relative to C+, computed
    with two-argument phase extraction per coefficient so every quadrant is
    resolved.  At the poles phi is canonicalized to 0.
    """
    ap = abs(coeffs.c_plus)
    am = abs(coeffs.c_minus)
    if ap == 0.0 and am == 0.0:
        raise DegenerateState("both coefficients vanish")
    theta = 2.0 * math.atan2(am, ap)
    if am == 0.0 or ap == 0.0:
        return BlochPoint(0.0 if am == 0.0 else math.pi, 0.0)
    phi = wrap_angle(cmath.phase(coeffs.c_minus) - cmath.phase(coeffs.c_plus))
    return BlochPoint(theta, phi)


def prob_density(outcome: MeasurementOutcome, params: ProtocolParams,
                 tol: float = 1e-14) -> float:
    """Unnormalized outcome density |C+|^2 + |C-|^2 (normalized on the grid)."""
    return coefficients(outcome, params, tol).norm_sq
