"""Power, loss and photon-count conversions.

Internal arithmetic is done in watts; configuration and reports use dBm/dB.
"""

import math

PLANCK = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 2.99792458e8  # m/s

WAVELENGTH_MIN_NM = 1500.0
WAVELENGTH_MAX_NM = 1620.0


def _finite(x, name):
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a real number, got {x!r}") from None
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def check_wavelength(nm):
    """Validate a wavelength in nm against the C+L band window and return it."""
    nm = _finite(nm, "wavelength")
    if not WAVELENGTH_MIN_NM <= nm <= WAVELENGTH_MAX_NM:
        raise ValueError(
            f"wavelength {nm} nm outside {WAVELENGTH_MIN_NM:g}-{WAVELENGTH_MAX_NM:g} nm"
        )
    return nm


def dbm_to_watts(p_dbm):
    p_dbm = _finite(p_dbm, "power")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w):
    """Inverse of :func:`dbm_to_watts`. Zero power maps to ``-inf``."""
    p_w = _finite(p_w, "power")
    if p_w < 0:
        raise ValueError(f"power must be non-negative, got {p_w}")
    if p_w == 0:
        return -math.inf
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(db):
    """Attenuation in dB to the transmitted power fraction."""
    return 10.0 ** (-_finite(db, "loss") / 10.0)


def photon_flux(p_w, wavelength_nm):
    """Photons per second carried by ``p_w`` watts at ``wavelength_nm``."""
    p_w = _finite(p_w, "power")
    if p_w < 0:
        raise ValueError(f"power must be non-negative, got {p_w}")
    lam = check_wavelength(wavelength_nm) * 1e-9
    return p_w * lam / (PLANCK * SPEED_OF_LIGHT)


def combine_losses(losses):
    checked = []
    for i, loss in enumerate(losses):
        loss = _finite(loss, f"losses[{i}]")
        if loss < 0:
            raise ValueError(f"losses[{i}] is negative ({loss} dB)")
        checked.append(loss)
    # fsum is correctly rounded, so the result does not depend on ordering
    return math.fsum(checked)
