"""Feasibility envelope for the classical data channels.

The 112 Gb/s PAM4 links stay below the HD-FEC threshold for every launch
power and wavelength inside a measured window, so feasibility is window
membership rather than a BER curve. A measured BER table can be supplied
through ``ber_lookup`` to tighten the check.
"""

from dataclasses import dataclass

HD_FEC_BER_LIMIT = 3.8e-3


@dataclass(frozen=True)
class ClassicalFeasibility:
    launch_window_dbm: tuple = (-10.0, -3.0)
    wavelength_window_nm: tuple = (1530.0, 1560.0)
    fec_ber_limit: float = HD_FEC_BER_LIMIT
    # optional callable (launch_dbm, wavelength_nm) -> BER
    ber_lookup: object = None

    def __post_init__(self):
        for name in ("launch_window_dbm", "wavelength_window_nm"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not lo < hi:
                raise ValueError(f"{name} must satisfy min < max, got ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))


def channel_feasible(ch, rules=ClassicalFeasibility()):
    """Return ``(ok, reason)``; ``reason`` is empty when the channel is feasible."""
    lo, hi = rules.launch_window_dbm
    if not lo <= ch.launch_dbm <= hi:
        side = "below" if ch.launch_dbm < lo else "above"
        return False, (
            f"launch power {ch.launch_dbm:g} dBm {side} validated window [{lo:g}, {hi:g}] dBm"
        )
    lo, hi = rules.wavelength_window_nm
    if not lo <= ch.wavelength_nm <= hi:
        return False, (
            f"wavelength {ch.wavelength_nm:g} nm outside validated spectrum [{lo:g}, {hi:g}] nm"
        )
    if rules.ber_lookup is not None:
        ber = rules.ber_lookup(ch.launch_dbm, ch.wavelength_nm)
        if ber >= rules.fec_ber_limit:
            return False, f"BER {ber:.3g} at or above FEC limit {rules.fec_ber_limit:.3g}"
    return True, ""
