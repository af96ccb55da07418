"""Photon leakage from classical data channels into the quantum channel.

Each data channel leaks into the quantum core either through inter-core
crosstalk (other cores) or directly (same core, different wavelength), and
is then attenuated by the fiber, the receive filter and any extra receiver
path loss. The leaked photon flux is turned into a per-gate click
probability for a gated single-photon detector and added to its dark count
probability. Interferers are independent, so their contributions add.
"""

import math
from dataclasses import dataclass

from . import units
from .errors import SaturationError
from .fiber import CENTER_CORE, N_CORES, check_core, fiber_loss, xt_isolation

_OFFSET_EPS = 1e-9


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float
    gate_width_s: float
    repetition_rate_hz: float
    dark_count_prob_per_gate: float
    deadtime_s: float = 0.0  # kept for reference; no deadtime correction is applied

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"detector efficiency must be in (0, 1], got {self.efficiency}")
        if not self.gate_width_s > 0:
            raise ValueError(f"gate width must be > 0, got {self.gate_width_s}")
        if not self.repetition_rate_hz > 0:
            raise ValueError(f"repetition rate must be > 0, got {self.repetition_rate_hz}")
        if self.gate_width_s * self.repetition_rate_hz > 1:
            raise ValueError("gate width x repetition rate exceeds a duty cycle of 1")
        if not 0 <= self.dark_count_prob_per_gate < 1:
            raise ValueError(
                f"dark count probability must be in [0, 1), got {self.dark_count_prob_per_gate}"
            )
        if not self.deadtime_s >= 0:
            raise ValueError(f"deadtime must be >= 0, got {self.deadtime_s}")

    @property
    def dark_rate_hz(self):
        return self.dark_count_prob_per_gate * self.repetition_rate_hz


# InGaAs gated detector, 1 MHz gating
DETECTOR_ID210 = DetectorSpec(
    efficiency=0.1,
    gate_width_s=1e-9,
    repetition_rate_hz=1e6,
    dark_count_prob_per_gate=1.3e-5,
    deadtime_s=10e-6,
)

DETECTOR_PRESETS = {"detector-id210": DETECTOR_ID210}


@dataclass(frozen=True)
class FilterSpec:
    """Receive filter in front of the detector.

    ``rejection_curve`` holds ``(offset_nm, rejection_db)`` breakpoints; the
    rejection at a given offset is the value of the last breakpoint whose
    offset does not exceed ``|wavelength - center_nm|``. Rejection is on top
    of ``insertion_loss_db``, which every photon (quantum or leaked) pays.
    """

    center_nm: float = 1550.0
    rejection_curve: tuple = ((0.0, 0.0), (2.0, 30.0), (4.0, 55.0))
    insertion_loss_db: float = 0.0

    def __post_init__(self):
        units.check_wavelength(self.center_nm)
        curve = tuple((float(o), float(r)) for o, r in self.rejection_curve)
        if not curve or curve[0] != (0.0, 0.0):
            raise ValueError("rejection curve must start with (0 nm, 0 dB)")
        for (o1, r1), (o2, r2) in zip(curve, curve[1:]):
            if not o2 > o1:
                raise ValueError("rejection curve offsets must be strictly increasing")
            if r2 < r1:
                raise ValueError("rejection must be non-decreasing with offset")
        if any(r < 0 for _, r in curve):
            raise ValueError("rejection values must be >= 0 dB")
        if not self.insertion_loss_db >= 0:
            raise ValueError("insertion loss must be >= 0 dB")
        object.__setattr__(self, "rejection_curve", curve)

    @classmethod
    def stepped(cls, knee_db=30.0, plateau_db=55.0, knee_offset_nm=2.0,
                plateau_offset_nm=4.0, center_nm=1550.0, insertion_loss_db=0.0):
        return cls(
            center_nm=center_nm,
            rejection_curve=((0.0, 0.0), (knee_offset_nm, knee_db), (plateau_offset_nm, plateau_db)),
            insertion_loss_db=insertion_loss_db,
        )

    def rejection_db(self, wavelength_nm):
        offset = abs(wavelength_nm - self.center_nm)
        value = 0.0
        for o, r in self.rejection_curve:
            if o <= offset + _OFFSET_EPS:
                value = r
            else:
                break
        return value


@dataclass(frozen=True, order=True)
class DataChannel:
    core: int
    wavelength_nm: float
    launch_dbm: float

    def __post_init__(self):
        check_core(self.core)
        object.__setattr__(self, "wavelength_nm", units.check_wavelength(self.wavelength_nm))
        if not math.isfinite(self.launch_dbm):
            raise ValueError(f"launch power must be finite, got {self.launch_dbm}")

    @property
    def slot(self):
        return (self.core, self.wavelength_nm)


@dataclass(frozen=True)
class ChannelAllocation:
    quantum_core: int = CENTER_CORE
    quantum_wavelength_nm: float = 1550.0
    data_channels: tuple = ()

    def __post_init__(self):
        check_core(self.quantum_core)
        units.check_wavelength(self.quantum_wavelength_nm)
        chans = tuple(self.data_channels)
        seen = set()
        for i, ch in enumerate(chans):
            if ch.slot == (self.quantum_core, self.quantum_wavelength_nm):
                raise ValueError(
                    f"data_channels[{i}] occupies the quantum slot "
                    f"(core {self.quantum_core}, {self.quantum_wavelength_nm} nm)"
                )
            if ch.slot in seen:
                raise ValueError(f"data_channels[{i}] duplicates slot {ch.slot}")
            seen.add(ch.slot)
        object.__setattr__(self, "data_channels", chans)

    @property
    def quantum_slot(self):
        return (self.quantum_core, self.quantum_wavelength_nm)

    def with_channels(self, channels):
        return ChannelAllocation(self.quantum_core, self.quantum_wavelength_nm, tuple(channels))


def side_cores_allocation(wavelengths_nm, launch_dbm, quantum_core=CENTER_CORE,
                          quantum_wavelength_nm=1550.0):
    """Data on every core except the quantum core, at each listed wavelength."""
    chans = [
        DataChannel(core, wl, launch_dbm)
        for core in range(N_CORES) if core != quantum_core
        for wl in wavelengths_nm
    ]
    return ChannelAllocation(quantum_core, quantum_wavelength_nm, tuple(chans))


def all_cores_allocation(wavelengths_nm, launch_dbm, quantum_core=CENTER_CORE,
                         quantum_wavelength_nm=1550.0):
    """Side cores plus the quantum core itself at every non-quantum wavelength."""
    base = side_cores_allocation(wavelengths_nm, launch_dbm, quantum_core, quantum_wavelength_nm)
    in_core = [
        DataChannel(quantum_core, wl, launch_dbm)
        for wl in wavelengths_nm
        if abs(wl - quantum_wavelength_nm) > _OFFSET_EPS
    ]
    return base.with_channels(base.data_channels + tuple(in_core))


@dataclass(frozen=True)
class ChannelNoise:
    channel: DataChannel
    isolation_db: float | None  # None: in-core path or no path
    leaked_w: float
    detected_rate_hz: float
    per_gate_prob: float

    @property
    def leaked_dbm(self):
        return units.watts_to_dbm(self.leaked_w)


@dataclass(frozen=True)
class NoiseBreakdown:
    per_channel: tuple
    dark_prob: float
    dark_rate_hz: float
    total_per_gate_prob: float

    @property
    def leak_prob(self):
        return math.fsum(c.per_gate_prob for c in self.per_channel)

    @property
    def leak_rate_hz(self):
        return math.fsum(c.detected_rate_hz for c in self.per_channel)

    @property
    def total_rate_hz(self):
        return self.dark_rate_hz + self.leak_rate_hz


def _leak_path_db(ch, quantum_core, fiber, length_km):
    """Isolation on the leak path: 0 for the in-core path, None with no path."""
    if ch.core == quantum_core:
        return 0.0
    return xt_isolation(fiber, ch.core, quantum_core, length_km)


def leaked_power_at_detector(ch, quantum_core, quantum_wavelength_nm, fiber, filt,
                             length_km, extra_path_loss_db=0.0):
    """Power in watts that data channel ``ch`` delivers to the detector."""
    if ch.slot == (quantum_core, quantum_wavelength_nm):
        raise ValueError("a data channel cannot sit on the quantum slot")
    iso = _leak_path_db(ch, quantum_core, fiber, length_km)
    if iso is None:
        return 0.0
    loss = (
        fiber_loss(fiber, length_km) + iso + filt.insertion_loss_db
        + filt.rejection_db(ch.wavelength_nm) + extra_path_loss_db
    )
    return units.dbm_to_watts(ch.launch_dbm - loss)


def per_gate_probability(p_leak_w, wavelength_nm, det):
    return units.photon_flux(p_leak_w, wavelength_nm) * det.efficiency * det.gate_width_s


def detected_rate(p_leak_w, wavelength_nm, det):
    """Detector clicks per second caused by ``p_leak_w`` of leaked light."""
    return per_gate_probability(p_leak_w, wavelength_nm, det) * det.repetition_rate_hz


def noise_breakdown(alloc, fiber, filt, det, length_km, extra_path_loss_db=0.0):
    rows = []
    for ch in alloc.data_channels:
        iso = _leak_path_db(ch, alloc.quantum_core, fiber, length_km)
        p = leaked_power_at_detector(
            ch, alloc.quantum_core, alloc.quantum_wavelength_nm, fiber, filt,
            length_km, extra_path_loss_db,
        )
        prob = per_gate_probability(p, ch.wavelength_nm, det)
        rows.append(ChannelNoise(
            channel=ch,
            isolation_db=iso if ch.core != alloc.quantum_core else None,
            leaked_w=p,
            detected_rate_hz=prob * det.repetition_rate_hz,
            per_gate_prob=prob,
        ))
    total = det.dark_count_prob_per_gate + math.fsum(r.per_gate_prob for r in rows)
    if total >= 1:
        raise SaturationError(
            f"per-gate noise probability {total:.3g} >= 1; linear leakage model invalid"
        )
    return NoiseBreakdown(tuple(rows), det.dark_count_prob_per_gate, det.dark_rate_hz, total)
