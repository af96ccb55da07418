"""Seven-core fiber description: core layout, attenuation and inter-core crosstalk.

Core 0 is the center core; cores 1..6 form the hexagonal ring around it.
Crosstalk is stored as a positive isolation in dB at a reference length and
leaked power is assumed to grow linearly with length (weak coupling), so the
isolation drops by 10*log10(L / L_ref).
"""

import enum
import math
from dataclasses import dataclass, field

N_CORES = 7
CENTER_CORE = 0
SIDE_CORES = (1, 2, 3, 4, 5, 6)


class FiberVariant(str, enum.Enum):
    TRENCH_ASSISTED = "trench-assisted"
    NON_TRENCH = "non-trench"
    SINGLE_MODE = "single-mode"


def check_core(core):
    if isinstance(core, bool) or not isinstance(core, int):
        raise ValueError(f"core index must be an integer, got {core!r}")
    if not 0 <= core < N_CORES:
        raise ValueError(f"core index {core} outside 0..{N_CORES - 1}")
    return core


def adjacency(a, b):
    """True when cores ``a`` and ``b`` are nearest neighbours in the 7-core layout."""
    check_core(a)
    check_core(b)
    if a == b:
        raise ValueError(f"adjacency of core {a} with itself is undefined")
    if a == CENTER_CORE or b == CENTER_CORE:
        return True
    return (a - b) % 6 in (1, 5)


def neighbours(core):
    return tuple(c for c in range(N_CORES) if c != core and adjacency(core, c))


@dataclass(frozen=True)
class FiberSpec:
    """Fiber parameters.

    ``xt_adjacent_db`` is read according to ``xt_aggregate``: when false it is
    the isolation of every adjacent core pair; when true it is the total
    crosstalk collected by a core from all its adjacent neighbours together,
    which is split evenly over those neighbours.

    ``isolation_matrix`` (7x7, dB at the reference length, ``None`` for no
    path) replaces the adjacency rule entirely when given.
    """

    variant: FiberVariant
    length_km: float
    attenuation_db_per_km: float
    xt_adjacent_db: float | None = None
    xt_reference_length_km: float | None = None
    chromatic_dispersion_ps_nm_km: float = 16.0
    xt_aggregate: bool = False
    isolation_matrix: tuple | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "variant", FiberVariant(self.variant))
        if not (math.isfinite(self.length_km) and self.length_km > 0):
            raise ValueError(f"length_km must be > 0, got {self.length_km}")
        if not (math.isfinite(self.attenuation_db_per_km) and self.attenuation_db_per_km >= 0):
            raise ValueError(
                f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km}"
            )
        if self.variant is FiberVariant.SINGLE_MODE:
            return
        if self.xt_reference_length_km is None or not self.xt_reference_length_km > 0:
            raise ValueError("xt_reference_length_km must be > 0 for multicore fibers")
        if self.isolation_matrix is None:
            if self.xt_adjacent_db is None or not self.xt_adjacent_db > 0:
                raise ValueError("xt_adjacent_db must be a positive isolation in dB")
        else:
            m = tuple(tuple(row) for row in self.isolation_matrix)
            if len(m) != N_CORES or any(len(row) != N_CORES for row in m):
                raise ValueError("isolation_matrix must be 7x7")
            for i, row in enumerate(m):
                for j, v in enumerate(row):
                    if i != j and v is not None and not v > 0:
                        raise ValueError(f"isolation_matrix[{i}][{j}] must be > 0 dB or null")
            object.__setattr__(self, "isolation_matrix", m)

    @property
    def multicore(self):
        return self.variant is not FiberVariant.SINGLE_MODE


def fiber_loss(fiber, length_km):
    if not length_km >= 0:
        raise ValueError(f"length must be >= 0, got {length_km}")
    return fiber.attenuation_db_per_km * length_km


def reference_isolation(fiber, src, dst):
    """Isolation src -> dst at the reference length, or ``None`` without a path."""
    check_core(src)
    check_core(dst)
    if src == dst:
        raise ValueError("crosstalk needs two distinct cores")
    if not fiber.multicore:
        return None
    if fiber.isolation_matrix is not None:
        return fiber.isolation_matrix[src][dst]
    if not adjacency(src, dst):
        return None
    if fiber.xt_aggregate:
        return fiber.xt_adjacent_db + 10.0 * math.log10(len(neighbours(dst)))
    return fiber.xt_adjacent_db


def xt_isolation(fiber, src, dst, length_km):
    """Isolation in dB from core ``src`` into ``dst`` after ``length_km``.

    Returns ``None`` when there is no coupling path (non-adjacent cores or a
    single-mode fiber).
    """
    if not (isinstance(length_km, (int, float)) and length_km > 0):
        raise ValueError(f"length must be > 0, got {length_km}")
    ref = reference_isolation(fiber, src, dst)
    if ref is None:
        return None
    return ref - 10.0 * math.log10(length_km / fiber.xt_reference_length_km)


# Refractive indices of the non-trench fiber (core 1.4639, cladding 1.4591) and
# its 41.1 um pitch / 150 um cladding are not used by the model.
NT_MCF_2018 = FiberSpec(
    variant=FiberVariant.NON_TRENCH,
    length_km=2.5,
    attenuation_db_per_km=0.2,
    xt_adjacent_db=45.0,
    xt_reference_length_km=2.5,
    chromatic_dispersion_ps_nm_km=16.0,
    xt_aggregate=True,
)

TA_MCF_2018 = FiberSpec(
    variant=FiberVariant.TRENCH_ASSISTED,
    length_km=2.5,
    attenuation_db_per_km=0.2,
    xt_adjacent_db=65.0,
    xt_reference_length_km=2.5,
    chromatic_dispersion_ps_nm_km=16.0,
    xt_aggregate=True,
)

# Standard single-mode fiber baseline (record 122 km QKD link context).
SMF_BASELINE = FiberSpec(
    variant=FiberVariant.SINGLE_MODE,
    length_km=122.0,
    attenuation_db_per_km=0.2,
    chromatic_dispersion_ps_nm_km=16.0,
)

FIBER_PRESETS = {
    "nt-mcf-2018": NT_MCF_2018,
    "ta-mcf-2018": TA_MCF_2018,
    "smf-baseline": SMF_BASELINE,
}
