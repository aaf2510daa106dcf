"""Area fractions of LOS coverage: closed forms and deterministic quadrature.

All lengths are meters and all intensities are per meter.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from scipy import integrate

logger = logging.getLogger(__name__)


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


class IntegrandForm(str, Enum):
    """Which per-RSU integrand the relay formula integrates.

    ``PROOF`` is the RSU-miss-and-relay-miss probability. ``PRINTED`` is the
    printed display, whose integrand tends to -1 and is only meaningful after
    truncation at the cutoff.
    """

    PROOF = "proof"
    PRINTED = "printed"


class GammaVariant(str, Enum):
    AS_PRINTED = "as_printed"
    THEOREM1_CONSISTENT = "theorem1_consistent"


@dataclass(frozen=True)
class QuadratureSettings:
    """Truncation and tolerances for the relay integral.

    The x integral is cut at ``x_cutoff_multiplier * gamma``; tolerances apply
    to the dimensionless integral (x measured in units of gamma).
    """

    x_cutoff_multiplier: float = 12.0
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.x_cutoff_multiplier > 0:
            raise ValueError(f"x_cutoff_multiplier: must be positive, got {self.x_cutoff_multiplier}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol: must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol: must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions: must be at least 1, got {self.max_subdivisions}")


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class AreaFraction:
    """A mean area fraction with the method that produced it."""

    value: float
    method: Method
    error_bound: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"value: area fraction must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class GainRatio:
    """Relay gain nu(RSU+relay) / nu(RSU); ``value`` is None when undefined."""

    value: float | None
    std_error: float | None = None
    note: str = ""

    @property
    def defined(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class RelayIntegral:
    """The per-line integral I (meters) and its quadrature error estimate."""

    value: float
    error: float


def _check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"{name}: must be a finite nonnegative number, got {value}")


def linear_fraction(mu: float, gamma: float) -> float:
    """Fraction of a single road covered by its RSUs' LOS segments."""
    _check_nonnegative(mu=mu, gamma=gamma)
    return -math.expm1(-2.0 * mu * gamma)


def road_area_fraction(lambda_l: float, eta: float) -> AreaFraction:
    """Area fraction of the roads themselves, an upper bound for any LOS coverage."""
    _check_nonnegative(lambda_l=lambda_l, eta=eta)
    return AreaFraction(-math.expm1(-lambda_l * eta), Method.CLOSED_FORM)


def theorem1_area_fraction(lambda_l: float, mu: float, gamma: float, eta: float) -> AreaFraction:
    """Mean area fraction of RSU-only coverage."""
    _check_nonnegative(lambda_l=lambda_l, eta=eta)
    value = -math.expm1(-lambda_l * eta * linear_fraction(mu, gamma))
    return AreaFraction(value, Method.CLOSED_FORM)


def additive_rsu_fraction(lambda_l: float, mu: float, gamma: float, eta: float) -> float:
    """Road-by-road sum of RSU coverage, ignoring overlap between roads.

    Not clamped: it exceeds the exact fraction and can exceed 1.
    """
    _check_nonnegative(lambda_l=lambda_l, eta=eta)
    return eta * lambda_l * linear_fraction(mu, gamma)


def additive_error_gamma(
    lambda_l: float,
    mu: float,
    gamma: float,
    eta: float,
    variant: GammaVariant = GammaVariant.THEOREM1_CONSISTENT,
) -> float:
    """Absolute gap between the exact RSU fraction and the additive approximation.

    ``AS_PRINTED`` keeps the doubled exponent ``2 lambda_l eta`` of the printed
    error formula; ``THEOREM1_CONSISTENT`` uses the RSU closed form.
    """
    additive = additive_rsu_fraction(lambda_l, mu, gamma, eta)
    if GammaVariant(variant) is GammaVariant.AS_PRINTED:
        exact = -math.expm1(-2.0 * additive)
    else:
        exact = theorem1_area_fraction(lambda_l, mu, gamma, eta).value
    return abs(exact - additive)


def _miss_mass(p: float, q: float) -> float:
    """Integral of ``1 - exp(-|u|)`` over ``[p, q]``, piecewise by the sign of u."""
    length = q - p
    if p >= 0:
        return length + math.exp(-p) * math.expm1(-length)
    if q <= 0:
        return length + math.exp(q) * math.expm1(-length)
    return length + math.expm1(p) + math.expm1(-q)


def _relay_miss(xi: float, a: float, b: float) -> float:
    """Probability that a relay uniform on ``[xi - a, xi + b]`` misses the foot point.

    Lengths are in units of gamma; a relay at ``y`` misses with probability
    ``1 - exp(-|y|)``.
    """
    if a + b <= 0:
        return -math.expm1(-abs(xi))
    return _miss_mass(xi - a, xi + b) / (a + b)


def _quad(func, a: float, b: float, settings: QuadratureSettings) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod quadrature that fails loudly instead of warning."""
    result = integrate.quad(
        func,
        a,
        b,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        full_output=1,
    )
    if len(result) > 3:
        value, error, info, message = result[:4]
        raise QuadratureError(
            f"Quadrature did not converge on [{a}, {b}]: {message.strip()}",
            achieved_error=error,
            subdivisions=info.get("last", settings.max_subdivisions),
        )
    value, error, _ = result
    return value, error


def _expected_relay_miss(xi: float, settings: QuadratureSettings, rsu_must_miss: bool) -> float:
    """E over (W, V) of the relay miss probability for an RSU at ``xi >= 0``.

    With ``w = -ln u`` and ``v = -ln t`` the exponential weights become uniform
    on (0, 1]. The RSU misses the foot point iff ``w < xi``, i.e. ``u > exp(-xi)``.
    """
    lower = math.exp(-xi) if rsu_must_miss else 0.0

    def over_v(u: float) -> float:
        a = -math.log(u)
        return _quad(lambda t: _relay_miss(xi, a, -math.log(t)), 0.0, 1.0, settings)[0]

    if lower >= 1.0:
        return 0.0
    return _quad(over_v, lower, 1.0, settings)[0]


@lru_cache(maxsize=None)
def _dimensionless_integral(settings: QuadratureSettings, form: IntegrandForm) -> tuple[float, float]:
    """Half-line integral of the per-RSU integrand over ``[0, K]`` in units of gamma.

    For the proof form the returned error also bounds the truncated tail
    beyond ``K``; the printed form has no finite tail.
    """
    if form is IntegrandForm.PROOF:
        def integrand(xi: float) -> float:
            return 1.0 - _expected_relay_miss(xi, settings, rsu_must_miss=True)
    else:
        def integrand(xi: float) -> float:
            return math.exp(-xi) - _expected_relay_miss(xi, settings, rsu_must_miss=False)

    cutoff = settings.x_cutoff_multiplier
    value, error = _quad(integrand, 0.0, cutoff, settings)
    if form is IntegrandForm.PROOF:
        # tail past K: at most e^-K from the RSU plus (K + 1) e^-K from its relay
        error += (cutoff + 2.0) * math.exp(-cutoff)
    logger.debug("Relay integral (%s, K=%g): %.12g +/- %.3g", form.value, settings.x_cutoff_multiplier, value, error)
    return value, error


def relay_miss_integral(
    gamma: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
    form: IntegrandForm = IntegrandForm.PROOF,
) -> RelayIntegral:
    """The integral I over a line of (1 - P(RSU at x and its relay both miss)).

    The integrand is even in x because W and V are identically distributed,
    and it scales with gamma, so one dimensionless half-line quadrature serves
    every gamma.
    """
    _check_nonnegative(gamma=gamma)
    if gamma == 0:
        return RelayIntegral(0.0, 0.0)
    value, error = _dimensionless_integral(settings, IntegrandForm(form))
    return RelayIntegral(2.0 * gamma * value, 2.0 * gamma * error)


def theorem2_area_fraction(
    lambda_l: float,
    mu: float,
    gamma: float,
    eta: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> AreaFraction:
    """Mean area fraction of RSU-plus-relay coverage by quadrature.

    Raises:
        QuadratureError: if an adaptive stage exhausts ``max_subdivisions``.
    """
    _check_nonnegative(lambda_l=lambda_l, mu=mu, gamma=gamma, eta=eta)
    if lambda_l * eta == 0 or mu * gamma == 0:
        return AreaFraction(0.0, Method.QUADRATURE)

    integral = relay_miss_integral(gamma, settings)
    per_line = -math.expm1(-mu * integral.value)
    value = -math.expm1(-lambda_l * eta * per_line)
    # first-order propagation of the error on I
    sensitivity = math.exp(-lambda_l * eta * per_line) * lambda_l * eta * mu * math.exp(-mu * integral.value)
    fraction = AreaFraction(value, Method.QUADRATURE, sensitivity * integral.error)

    lower = theorem1_area_fraction(lambda_l, mu, gamma, eta).value
    upper = road_area_fraction(lambda_l, eta).value
    if not lower - fraction.error_bound <= value <= upper + fraction.error_bound:
        logger.warning("Relay fraction %.6g outside [%.6g, %.6g]", value, lower, upper)
    return fraction


def theorem2_printed_display(
    lambda_l: float,
    mu: float,
    gamma: float,
    eta: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """The printed relay formula with its x integral truncated at the cutoff.

    Kept for comparison only; the result depends on the cutoff and is not an
    area fraction in general.
    """
    _check_nonnegative(lambda_l=lambda_l, mu=mu, gamma=gamma, eta=eta)
    integral = relay_miss_integral(gamma, settings, IntegrandForm.PRINTED)
    return -math.expm1(-lambda_l * eta * -math.expm1(-mu * integral.value))


def relay_gain_ratio(
    lambda_l: float,
    mu: float,
    gamma: float,
    eta: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> GainRatio:
    """nu(RSU+relay) / nu(RSU) from the closed form and the quadrature."""
    base = theorem1_area_fraction(lambda_l, mu, gamma, eta)
    if base.value == 0:
        return GainRatio(None, note="undefined ratio: RSU coverage is zero")
    relay = theorem2_area_fraction(lambda_l, mu, gamma, eta, settings)
    return GainRatio(relay.value / base.value, relay.error_bound / base.value)


class QuadratureError(Exception):
    """Raised when adaptive quadrature does not reach the requested tolerance."""

    def __init__(self, message: str, achieved_error: float, subdivisions: int):
        super().__init__(f"{message} (achieved error {achieved_error:.3g}, {subdivisions} subdivisions)")
        self.achieved_error = achieved_error
        self.subdivisions = subdivisions
