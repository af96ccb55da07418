"""Decoy-state BB84 key rate with an infinite number of decoy intensities.

With infinitely many decoys the single-photon yield and error rate are known
exactly, so the lower bound on the secret key fraction per gate is

    R = q * (Q1 * (1 - H2(e1)) - Q_mu * f * H2(E_mu))

where all background (dark counts plus leaked data photons) enters through
the vacuum yield Y0.
"""

import math
from dataclasses import dataclass, field, replace

from . import units
from .errors import DegenerateChannelError, ModelError, NoKeyError
from .fiber import fiber_loss
from .leakage import ChannelAllocation, DetectorSpec, FilterSpec, noise_breakdown

ERROR_VACUUM = 0.5
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MU_TOLERANCE = 1e-4
DEFAULT_MU_INTERVAL = (0.01, 2.0)


@dataclass(frozen=True)
class QkdLinkParams:
    mu: float
    detector: DetectorSpec
    misalignment_error: float = 0.01
    fec_inefficiency: float = 1.22
    sift_factor: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not 0 <= self.misalignment_error < 0.5:
            raise ValueError(f"misalignment error must be in [0, 0.5), got {self.misalignment_error}")
        if not self.fec_inefficiency >= 1:
            raise ValueError(f"fec inefficiency must be >= 1, got {self.fec_inefficiency}")
        if not 0 < self.sift_factor <= 1:
            raise ValueError(f"sift factor must be in (0, 1], got {self.sift_factor}")


@dataclass(frozen=True)
class KeyRateResult:
    eta_total: float
    Y0: float
    mu: float
    Q_mu: float
    E_mu: float
    Y1: float
    e1: float
    Q1: float
    R_raw: float
    R_per_gate: float
    R_bps: float


def binary_entropy(x):
    if not 0 <= x <= 1:
        raise ValueError(f"binary entropy needs x in [0, 1], got {x}")
    if x == 0 or x == 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def channel_transmittance(fiber, length_km, det, extra_loss_db=0.0):
    """End-to-end probability that a photon sent by Alice clicks Bob's detector."""
    return det.efficiency * units.db_to_linear(fiber_loss(fiber, length_km) + extra_loss_db)


def _check_channel(eta, Y0):
    if not 0 < eta <= 1:
        raise ValueError(f"transmittance must be in (0, 1], got {eta}")
    if not 0 <= Y0 < 1:
        raise ValueError(f"background yield must be in [0, 1), got {Y0}")


def gains_and_qber(params, eta, Y0):
    """Return ``(Q_mu, E_mu, Y1, e1, Q1)`` for a Poissonian source."""
    _check_channel(eta, Y0)
    mu = params.mu
    e_d = params.misalignment_error
    signal = -math.expm1(-eta * mu)
    # exact photon-number sum of 1 - (1 - Y0)(1 - eta)^n, not Y0 + signal
    Q_mu = Y0 + (1.0 - Y0) * signal
    if Q_mu == 0:
        raise DegenerateChannelError("overall gain is zero")
    E_mu = (ERROR_VACUUM * Y0 + e_d * signal) / Q_mu
    Y1 = 1.0 - (1.0 - Y0) * (1.0 - eta)
    e1 = (ERROR_VACUUM * Y0 + e_d * eta) / Y1
    Q1 = Y1 * mu * math.exp(-mu)
    return Q_mu, E_mu, Y1, e1, Q1


def key_rate(params, eta, Y0):
    Q_mu, E_mu, Y1, e1, Q1 = gains_and_qber(params, eta, Y0)
    raw = params.sift_factor * (
        Q1 * (1.0 - binary_entropy(e1))
        - Q_mu * params.fec_inefficiency * binary_entropy(E_mu)
    )
    per_gate = max(0.0, raw)
    return KeyRateResult(
        eta_total=eta, Y0=Y0, mu=params.mu, Q_mu=Q_mu, E_mu=E_mu, Y1=Y1, e1=e1, Q1=Q1,
        R_raw=raw, R_per_gate=per_gate,
        R_bps=per_gate * params.detector.repetition_rate_hz,
    )


def _raw_rate(params, eta, Y0, mu):
    return key_rate(replace(params, mu=mu), eta, Y0).R_raw


def optimize_mu(params, eta, Y0, interval=DEFAULT_MU_INTERVAL, tol=MU_TOLERANCE):
    """Mean photon number maximizing the key rate over ``interval``.

    A coarse scan brackets the maximum of the unclamped rate, then a golden
    section search narrows it to ``tol``. Raises :class:`NoKeyError` if the
    best rate found is not positive.
    """
    lo, hi = (float(v) for v in interval)
    if not 0 < lo < hi <= 2:
        raise ValueError(f"mu search interval must lie within (0, 2], got {interval}")
    _check_channel(eta, Y0)

    n = 40
    grid = [lo + (hi - lo) * i / n for i in range(n + 1)]
    values = [_raw_rate(params, eta, Y0, m) for m in grid]
    k = max(range(n + 1), key=lambda i: values[i])
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, n)]

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = _raw_rate(params, eta, Y0, c)
    fd = _raw_rate(params, eta, Y0, d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = _raw_rate(params, eta, Y0, c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = _raw_rate(params, eta, Y0, d)
    mu = (a + b) / 2.0
    best = max((values[k], grid[k]), (_raw_rate(params, eta, Y0, mu), mu))
    if best[0] <= 0:
        raise NoKeyError(f"no positive key rate for mu in [{lo}, {hi}]")
    return best[1]


def best_key_rate(params, eta, Y0, interval=DEFAULT_MU_INTERVAL):
    """Key rate at the optimal mu; falls back to ``params.mu`` (and R = 0) without key."""
    try:
        mu = optimize_mu(params, eta, Y0, interval)
    except NoKeyError:
        return key_rate(params, eta, Y0)
    return key_rate(replace(params, mu=mu), eta, Y0)


@dataclass(frozen=True)
class CoexistenceLink:
    """Everything needed to evaluate the quantum channel at a given length.

    ``extra_path_loss_db`` is the unlisted receiver-side loss (fan-out,
    grating, filter insertion); it is paid by quantum and leaked photons alike.
    """

    fiber: object
    filter: FilterSpec
    qkd: QkdLinkParams
    allocation: ChannelAllocation = field(default_factory=ChannelAllocation)
    extra_path_loss_db: float = 0.0
    optimize_mu: bool = False
    mu_interval: tuple = DEFAULT_MU_INTERVAL

    @property
    def detector(self):
        return self.qkd.detector

    def noise(self, length_km, allocation=None):
        return noise_breakdown(
            self.allocation if allocation is None else allocation,
            self.fiber, self.filter, self.detector, length_km, self.extra_path_loss_db,
        )

    def transmittance(self, length_km):
        return channel_transmittance(
            self.fiber, length_km, self.detector,
            self.extra_path_loss_db + self.filter.insertion_loss_db,
        )

    def rate_for_background(self, eta, Y0):
        if self.optimize_mu:
            return best_key_rate(self.qkd, eta, Y0, self.mu_interval)
        return key_rate(self.qkd, eta, Y0)

    def evaluate(self, length_km, allocation=None):
        """Return ``(KeyRateResult, NoiseBreakdown)`` at ``length_km``."""
        noise = self.noise(length_km, allocation)
        eta = self.transmittance(length_km)
        return self.rate_for_background(eta, noise.total_per_gate_prob), noise


@dataclass(frozen=True)
class SweepPoint:
    x: float
    result: KeyRateResult | None
    noise: object | None
    status: str = "ok"


def _point(link, x, length_km, allocation=None):
    try:
        result, noise = link.evaluate(length_km, allocation)
    except ModelError as exc:
        return SweepPoint(x, None, None, exc.code)
    status = "ok" if result.R_per_gate > 0 else "no-key"
    return SweepPoint(x, result, noise, status)


def sweep_distance(link, lengths_km):
    """Key rate at each length, rescaling fiber loss and crosstalk each time."""
    lengths = [float(v) for v in lengths_km]
    if any(not v > 0 for v in lengths):
        raise ValueError("sweep lengths must be positive")
    if lengths != sorted(lengths):
        raise ValueError("sweep lengths must be ascending")
    return [_point(link, L, L) for L in lengths]


def sweep_wavelength(link, wavelengths_nm, length_km, make_allocation):
    """Key rate when the data channels sit at each wavelength in turn.

    ``make_allocation(wavelength_nm)`` builds the allocation for one point,
    e.g. ``lambda wl: side_cores_allocation([wl], -4.0)``.
    """
    return [_point(link, wl, length_km, make_allocation(wl)) for wl in wavelengths_nm]
