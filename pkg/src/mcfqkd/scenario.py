"""Scenario documents: YAML (or JSON) in, fully resolved :class:`Scenario` out.

Every section may name a preset, give a full mapping, or give
``{preset: <name>, <field>: <override>, ...}``. Errors carry the dotted path
of the offending field. ``scenario_to_dict`` emits the resolved form, which
parses back to an identical Scenario.
"""

import dataclasses
import math
import re
from dataclasses import dataclass, field

import yaml

from . import calibration as calib
from .classical import ClassicalFeasibility, channel_feasible
from .errors import ScenarioError
from .fiber import FIBER_PRESETS, FiberSpec, FiberVariant
from .leakage import (
    DETECTOR_PRESETS,
    ChannelAllocation,
    DataChannel,
    DetectorSpec,
    FilterSpec,
    all_cores_allocation,
    side_cores_allocation,
)
from .planner import PlanningProblem, grid_candidates
from .qkd import DEFAULT_MU_INTERVAL, CoexistenceLink, QkdLinkParams

COMMANDS = ("leakage", "keyrate", "sweep-distance", "sweep-wavelength", "plan")
LAYOUTS = ("side-cores", "all-cores")
FORMATS = ("csv", "json")

# Eight measurement wavelengths across the validated band; 1552 nm sits next
# to the quantum channel, the others are on the filter plateau.
DEFAULT_WAVELENGTHS_NM = (1530.0, 1535.0, 1540.0, 1545.0, 1552.0, 1555.0, 1558.0, 1560.0)

_UNSET = object()


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads YAML 1.2 / JSON floats such as ``1e-09`` as numbers."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9_]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


@dataclass(frozen=True)
class Scenario:
    fiber: FiberSpec
    detector: DetectorSpec
    filter: FilterSpec
    qkd: QkdLinkParams
    optimize_mu: bool = False
    mu_interval: tuple = DEFAULT_MU_INTERVAL
    length_km: float = 2.5
    extra_path_loss_db: float = 0.0
    allocation: ChannelAllocation = field(default_factory=ChannelAllocation)
    layout: str | None = None
    layout_wavelengths_nm: tuple = ()
    layout_launch_dbm: float = -4.0
    classical: ClassicalFeasibility = field(default_factory=ClassicalFeasibility)
    min_key_rate_bps: float | None = None
    candidates: tuple | None = None
    distances_km: tuple = ()
    wavelengths_nm: tuple = ()
    launch_powers_dbm: tuple = ()
    output_format: str = "csv"
    output_path: str | None = None
    presets: tuple = ()  # (section, preset name) pairs, for report metadata

    def link(self, allocation=None):
        return CoexistenceLink(
            fiber=self.fiber,
            filter=self.filter,
            qkd=self.qkd,
            allocation=self.allocation if allocation is None else allocation,
            extra_path_loss_db=self.extra_path_loss_db,
            optimize_mu=self.optimize_mu,
            mu_interval=self.mu_interval,
        )

    def layout_allocation(self, wavelengths_nm):
        make = side_cores_allocation if self.layout == "side-cores" else all_cores_allocation
        return make(
            wavelengths_nm, self.layout_launch_dbm,
            self.allocation.quantum_core, self.allocation.quantum_wavelength_nm,
        )

    def planning_problem(self):
        return PlanningProblem(
            link=self.link(self.allocation.with_channels(())),
            length_km=self.length_km,
            candidates=self.candidates,
            min_key_rate_bps=self.min_key_rate_bps,
            rules=self.classical,
        )

    def require(self, command):
        """Raise ScenarioError if ``command`` lacks its required fields."""
        if command not in COMMANDS:
            raise ScenarioError("command", f"unknown command {command!r}")
        if command == "sweep-distance" and not self.distances_km:
            raise ScenarioError("sweep.distances_km", "required for sweep-distance")
        if command == "sweep-wavelength":
            if not self.wavelengths_nm:
                raise ScenarioError("sweep.wavelengths_nm", "required for sweep-wavelength")
            if self.layout is None:
                raise ScenarioError("allocation.layout", "required for sweep-wavelength")
        if command == "plan":
            if self.min_key_rate_bps is None:
                raise ScenarioError("planning.min_key_rate_bps", "required for plan")
            if not self.candidates:
                raise ScenarioError("planning.candidates", "required for plan")


# ---------------------------------------------------------------- helpers

def _num(value, path, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioError(path, "must be finite")
    if positive and not value > 0:
        raise ScenarioError(path, f"must be > 0, got {value:g}")
    if nonneg and not value >= 0:
        raise ScenarioError(path, f"must be >= 0, got {value:g}")
    return value


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    return value


def _mapping(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(doc, allowed, path):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ScenarioError(where, "unknown field")


def _num_list(value, path, *, positive=False, sort=True):
    if not isinstance(value, (list, tuple)):
        raise ScenarioError(path, "expected a list")
    out = tuple(_num(v, f"{path}[{i}]", positive=positive) for i, v in enumerate(value))
    if sort and list(out) != sorted(out):
        raise ScenarioError(path, "must be sorted ascending")
    if len(set(out)) != len(out):
        raise ScenarioError(path, "contains duplicates")
    return out


def _pair(value, path):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(path, "expected [min, max]")
    lo, hi = (_num(v, f"{path}[{i}]") for i, v in enumerate(value))
    if not lo < hi:
        raise ScenarioError(path, "min must be < max")
    return (lo, hi)


def _build(cls, kwargs, path):
    try:
        return cls(**kwargs)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(path, str(exc)) from None


def _with_preset(raw, presets, path, used):
    """Return (base field dict, overrides mapping) for a preset-capable section."""
    if isinstance(raw, str):
        raw = {"preset": raw}
    raw = dict(_mapping(raw, path))
    name = raw.pop("preset", None)
    if name is None:
        return {}, raw
    if name not in presets:
        raise ScenarioError(f"{path}.preset", f"unknown preset {name!r} (known: {', '.join(sorted(presets))})")
    used.append((path, name))
    return dataclasses.asdict(presets[name]), raw


# ---------------------------------------------------------------- sections

_FIBER_FIELDS = {f.name for f in dataclasses.fields(FiberSpec)}


def _parse_fiber(raw, used):
    base, over = _with_preset(raw, FIBER_PRESETS, "fiber", used)
    _check_keys(over, _FIBER_FIELDS, "fiber")
    spec = {**base, **over}
    if "variant" not in spec:
        raise ScenarioError("fiber.variant", "required (or name a preset)")
    try:
        spec["variant"] = FiberVariant(spec["variant"])
    except ValueError:
        raise ScenarioError("fiber.variant", f"unknown variant {spec['variant']!r}") from None
    for key in ("length_km", "attenuation_db_per_km", "xt_adjacent_db",
                "xt_reference_length_km", "chromatic_dispersion_ps_nm_km"):
        if spec.get(key) is not None:
            spec[key] = _num(spec[key], f"fiber.{key}")
    return _build(FiberSpec, spec, "fiber")


_DETECTOR_FIELDS = {f.name for f in dataclasses.fields(DetectorSpec)}


def _parse_detector(raw, used):
    if raw is None:
        raw = "detector-id210"
    base, over = _with_preset(raw, DETECTOR_PRESETS, "detector", used)
    _check_keys(over, _DETECTOR_FIELDS, "detector")
    spec = {**base, **{k: _num(v, f"detector.{k}") for k, v in over.items()}}
    missing = _DETECTOR_FIELDS - {"deadtime_s"} - set(spec)
    if missing:
        raise ScenarioError(f"detector.{sorted(missing)[0]}", "required (or name a preset)")
    return _build(DetectorSpec, spec, "detector")


def _parse_filter(raw, cal):
    raw = _mapping(raw, "filter")
    _check_keys(raw, {"center_nm", "rejection_curve", "knee_rejection_db", "plateau_rejection_db",
                      "knee_offset_nm", "plateau_offset_nm", "insertion_loss_db"}, "filter")
    center = _num(raw.get("center_nm", 1550.0), "filter.center_nm")
    il = _num(raw.get("insertion_loss_db", 0.0), "filter.insertion_loss_db", nonneg=True)
    if "rejection_curve" in raw:
        shorthand = {"knee_rejection_db", "plateau_rejection_db", "knee_offset_nm",
                     "plateau_offset_nm"} & set(raw)
        if shorthand:
            raise ScenarioError(f"filter.{sorted(shorthand)[0]}",
                                "cannot be combined with rejection_curve")
        curve_raw = raw["rejection_curve"]
        if not isinstance(curve_raw, (list, tuple)):
            raise ScenarioError("filter.rejection_curve", "expected a list of [offset_nm, dB]")
        curve = []
        for i, pt in enumerate(curve_raw):
            if not isinstance(pt, (list, tuple)) or len(pt) != 2:
                raise ScenarioError(f"filter.rejection_curve[{i}]", "expected [offset_nm, dB]")
            curve.append((_num(pt[0], f"filter.rejection_curve[{i}][0]"),
                          _num(pt[1], f"filter.rejection_curve[{i}][1]")))
        return _build(FilterSpec, {"center_nm": center, "rejection_curve": tuple(curve),
                                   "insertion_loss_db": il}, "filter")
    knee_default = cal["knee_rejection_db"] if cal else 30.0
    kwargs = {
        "knee_db": _num(raw.get("knee_rejection_db", knee_default), "filter.knee_rejection_db"),
        "plateau_db": _num(raw.get("plateau_rejection_db", 55.0), "filter.plateau_rejection_db"),
        "knee_offset_nm": _num(raw.get("knee_offset_nm", 2.0), "filter.knee_offset_nm"),
        "plateau_offset_nm": _num(raw.get("plateau_offset_nm", 4.0), "filter.plateau_offset_nm"),
        "center_nm": center,
        "insertion_loss_db": il,
    }
    try:
        return FilterSpec.stepped(**kwargs)
    except ValueError as exc:
        raise ScenarioError("filter", str(exc)) from None


def _parse_qkd(raw, detector, cal):
    raw = _mapping(raw, "qkd")
    _check_keys(raw, {"mu", "mu_interval", "misalignment_error", "fec_inefficiency",
                      "sift_factor"}, "qkd")
    mu = raw.get("mu", "optimize" if cal and cal["optimize_mu"] else 0.48)
    optimize = mu == "optimize"
    mu_value = 0.48 if optimize else _num(mu, "qkd.mu", positive=True)
    interval = _pair(raw.get("mu_interval", list(DEFAULT_MU_INTERVAL)), "qkd.mu_interval")
    if not (0 < interval[0] and interval[1] <= 2):
        raise ScenarioError("qkd.mu_interval", "must lie within (0, 2]")
    e_d_default = cal["misalignment_error"] if cal else 0.01
    params = _build(QkdLinkParams, {
        "mu": mu_value,
        "detector": detector,
        "misalignment_error": _num(raw.get("misalignment_error", e_d_default), "qkd.misalignment_error"),
        "fec_inefficiency": _num(raw.get("fec_inefficiency", 1.22), "qkd.fec_inefficiency"),
        "sift_factor": _num(raw.get("sift_factor", 1.0), "qkd.sift_factor"),
    }, "qkd")
    return params, optimize, interval


def _parse_channel(raw, path, default_launch=_UNSET):
    raw = _mapping(raw, path)
    _check_keys(raw, {"core", "wavelength_nm", "launch_dbm"}, path)
    for key in ("core", "wavelength_nm"):
        if key not in raw:
            raise ScenarioError(f"{path}.{key}", "required")
    if "launch_dbm" not in raw and default_launch is _UNSET:
        raise ScenarioError(f"{path}.launch_dbm", "required")
    return _build(DataChannel, {
        "core": _int(raw["core"], f"{path}.core"),
        "wavelength_nm": _num(raw["wavelength_nm"], f"{path}.wavelength_nm"),
        "launch_dbm": _num(raw.get("launch_dbm", default_launch), f"{path}.launch_dbm"),
    }, path)


def _parse_allocation(raw):
    raw = _mapping(raw, "allocation")
    _check_keys(raw, {"quantum", "layout", "wavelengths_nm", "launch_dbm", "data_channels"},
                "allocation")
    q = _mapping(raw.get("quantum"), "allocation.quantum")
    _check_keys(q, {"core", "wavelength_nm"}, "allocation.quantum")
    qcore = _int(q.get("core", 0), "allocation.quantum.core")
    qwl = _num(q.get("wavelength_nm", 1550.0), "allocation.quantum.wavelength_nm")
    layout = raw.get("layout")
    if layout is not None and layout not in LAYOUTS:
        raise ScenarioError("allocation.layout", f"expected one of {', '.join(LAYOUTS)}")
    launch = _num(raw.get("launch_dbm", -4.0), "allocation.launch_dbm")
    layout_wls = _num_list(raw.get("wavelengths_nm", []), "allocation.wavelengths_nm")
    if layout_wls and layout is None:
        raise ScenarioError("allocation.wavelengths_nm", "only meaningful with allocation.layout")

    chans = []
    if layout is not None and layout_wls:
        make = side_cores_allocation if layout == "side-cores" else all_cores_allocation
        try:
            chans.extend(make(layout_wls, launch, qcore, qwl).data_channels)
        except ValueError as exc:
            raise ScenarioError("allocation", str(exc)) from None
    explicit = raw.get("data_channels", [])
    if not isinstance(explicit, list):
        raise ScenarioError("allocation.data_channels", "expected a list")
    qslot = (qcore, qwl)
    taken = {ch.slot for ch in chans}
    for i, item in enumerate(explicit):
        path = f"allocation.data_channels[{i}]"
        ch = _parse_channel(item, path)
        if ch.slot == qslot:
            raise ScenarioError(path, f"occupies the quantum slot (core {qcore}, {qwl:g} nm)")
        if ch.slot in taken:
            raise ScenarioError(path, f"duplicates slot (core {ch.core}, {ch.wavelength_nm:g} nm)")
        taken.add(ch.slot)
        chans.append(ch)
    alloc = _build(ChannelAllocation, {"quantum_core": qcore, "quantum_wavelength_nm": qwl,
                                       "data_channels": tuple(chans)}, "allocation")
    return alloc, layout, layout_wls, launch


def _parse_classical(raw):
    raw = _mapping(raw, "classical")
    _check_keys(raw, {"launch_window_dbm", "wavelength_window_nm"}, "classical")
    kwargs = {}
    if "launch_window_dbm" in raw:
        kwargs["launch_window_dbm"] = _pair(raw["launch_window_dbm"], "classical.launch_window_dbm")
    if "wavelength_window_nm" in raw:
        kwargs["wavelength_window_nm"] = _pair(raw["wavelength_window_nm"],
                                               "classical.wavelength_window_nm")
    return ClassicalFeasibility(**kwargs)


def _parse_planning(raw, qslot, rules):
    if raw is None:
        return None, None
    raw = _mapping(raw, "planning")
    _check_keys(raw, {"min_key_rate_bps", "candidates"}, "planning")
    min_rate = None
    if "min_key_rate_bps" in raw:
        min_rate = _num(raw["min_key_rate_bps"], "planning.min_key_rate_bps", nonneg=True)
    cands_raw = raw.get("candidates")
    cands = None
    if isinstance(cands_raw, dict):
        _check_keys(cands_raw, {"cores", "wavelengths_nm", "launch_dbm"}, "planning.candidates")
        cores = cands_raw.get("cores", list(range(7)))
        if not isinstance(cores, list):
            raise ScenarioError("planning.candidates.cores", "expected a list")
        cores = [_int(c, f"planning.candidates.cores[{i}]") for i, c in enumerate(cores)]
        wls = _num_list(cands_raw.get("wavelengths_nm", list(DEFAULT_WAVELENGTHS_NM)),
                        "planning.candidates.wavelengths_nm")
        launch = _num(cands_raw.get("launch_dbm", -4.0), "planning.candidates.launch_dbm")
        try:
            cands = grid_candidates(wls, launch, qslot, cores)
        except ValueError as exc:
            raise ScenarioError("planning.candidates", str(exc)) from None
    elif isinstance(cands_raw, list):
        cands = tuple(_parse_channel(c, f"planning.candidates[{i}]") for i, c in enumerate(cands_raw))
    elif cands_raw is not None:
        raise ScenarioError("planning.candidates", "expected a grid mapping or a list of channels")
    if cands is not None:
        seen = set()
        for i, ch in enumerate(cands):
            if ch.slot == qslot:
                raise ScenarioError(f"planning.candidates[{i}]", "is the quantum slot")
            if ch.slot in seen:
                raise ScenarioError(f"planning.candidates[{i}]", "duplicates another candidate")
            seen.add(ch.slot)
            ok, reason = channel_feasible(ch, rules)
            if not ok:
                raise ScenarioError(f"planning.candidates[{i}]", f"infeasible: {reason}")
    return min_rate, cands


def _parse_sweep(raw):
    raw = _mapping(raw, "sweep")
    _check_keys(raw, {"distances_km", "wavelengths_nm", "launch_powers_dbm"}, "sweep")
    out = {}
    for key, positive in (("distances_km", True), ("wavelengths_nm", False),
                          ("launch_powers_dbm", False)):
        if key in raw:
            vals = _num_list(raw[key], f"sweep.{key}", positive=positive)
            if not vals:
                raise ScenarioError(f"sweep.{key}", "must not be empty")
            out[key] = vals
    return out


def _parse_output(raw):
    raw = _mapping(raw, "output")
    _check_keys(raw, {"format", "path"}, "output")
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ScenarioError("output.format", f"expected one of {', '.join(FORMATS)}")
    path = raw.get("path")
    if path is not None and not isinstance(path, str):
        raise ScenarioError("output.path", "expected a string")
    return fmt, path


# ---------------------------------------------------------------- public

TOP_LEVEL = {"calibration", "fiber", "detector", "filter", "link", "qkd", "allocation",
             "classical", "planning", "sweep", "output"}


def scenario_from_dict(doc):
    doc = _mapping(doc, "")
    _check_keys(doc, TOP_LEVEL, "")
    cal_name = doc.get("calibration")
    if cal_name not in (None, "committed"):
        raise ScenarioError("calibration", "expected 'committed' or null")
    cal = calib.load_calibration() if cal_name == "committed" else None

    used = []
    if "fiber" not in doc:
        raise ScenarioError("fiber", "required")
    fiber = _parse_fiber(doc["fiber"], used)
    detector = _parse_detector(doc.get("detector"), used)
    filt = _parse_filter(doc.get("filter"), cal)

    link = _mapping(doc.get("link"), "link")
    _check_keys(link, {"length_km", "extra_path_loss_db"}, "link")
    length = _num(link.get("length_km", fiber.length_km), "link.length_km", positive=True)
    extra_default = cal["extra_path_loss_db"] if cal else 0.0
    extra = _num(link.get("extra_path_loss_db", extra_default), "link.extra_path_loss_db", nonneg=True)

    qkd, optimize, interval = _parse_qkd(doc.get("qkd"), detector, cal)
    alloc, layout, layout_wls, launch = _parse_allocation(doc.get("allocation"))
    rules = _parse_classical(doc.get("classical"))
    min_rate, cands = _parse_planning(doc.get("planning"), alloc.quantum_slot, rules)
    sweep = _parse_sweep(doc.get("sweep"))
    fmt, path = _parse_output(doc.get("output"))

    return Scenario(
        fiber=fiber, detector=detector, filter=filt, qkd=qkd,
        optimize_mu=optimize, mu_interval=interval,
        length_km=length, extra_path_loss_db=extra,
        allocation=alloc, layout=layout, layout_wavelengths_nm=layout_wls,
        layout_launch_dbm=launch, classical=rules,
        min_key_rate_bps=min_rate, candidates=cands,
        distances_km=sweep.get("distances_km", ()),
        wavelengths_nm=sweep.get("wavelengths_nm", ()),
        launch_powers_dbm=sweep.get("launch_powers_dbm", ()),
        output_format=fmt, output_path=path, presets=tuple(used),
    )


def parse_scenario(text):
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ScenarioError("", f"malformed document: {exc}") from None
    return scenario_from_dict(doc)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _channel_dict(ch):
    return {"core": ch.core, "wavelength_nm": ch.wavelength_nm, "launch_dbm": ch.launch_dbm}


def scenario_to_dict(sc):
    """Resolved form of ``sc``; ``scenario_from_dict`` on it gives back ``sc``."""
    presets = dict(sc.presets)
    fiber = {"preset": presets["fiber"]} if "fiber" in presets else {}
    fiber.update(dataclasses.asdict(sc.fiber))
    fiber["variant"] = sc.fiber.variant.value
    if fiber["isolation_matrix"] is not None:
        fiber["isolation_matrix"] = [list(r) for r in fiber["isolation_matrix"]]
    detector = {"preset": presets["detector"]} if "detector" in presets else {}
    detector.update(dataclasses.asdict(sc.detector))

    # layout-generated channels are re-derived from the layout, so list only the rest
    generated = set()
    if sc.layout is not None and sc.layout_wavelengths_nm:
        generated = set(sc.layout_allocation(sc.layout_wavelengths_nm).data_channels)
    allocation = {
        "quantum": {"core": sc.allocation.quantum_core,
                    "wavelength_nm": sc.allocation.quantum_wavelength_nm},
        "launch_dbm": sc.layout_launch_dbm,
        "data_channels": [_channel_dict(c) for c in sc.allocation.data_channels if c not in generated],
    }
    if sc.layout is not None:
        allocation["layout"] = sc.layout
        allocation["wavelengths_nm"] = list(sc.layout_wavelengths_nm)

    doc = {
        "fiber": fiber,
        "detector": detector,
        "filter": {
            "center_nm": sc.filter.center_nm,
            "rejection_curve": [list(p) for p in sc.filter.rejection_curve],
            "insertion_loss_db": sc.filter.insertion_loss_db,
        },
        "link": {"length_km": sc.length_km, "extra_path_loss_db": sc.extra_path_loss_db},
        "qkd": {
            "mu": "optimize" if sc.optimize_mu else sc.qkd.mu,
            "mu_interval": list(sc.mu_interval),
            "misalignment_error": sc.qkd.misalignment_error,
            "fec_inefficiency": sc.qkd.fec_inefficiency,
            "sift_factor": sc.qkd.sift_factor,
        },
        "allocation": allocation,
        "classical": {
            "launch_window_dbm": list(sc.classical.launch_window_dbm),
            "wavelength_window_nm": list(sc.classical.wavelength_window_nm),
        },
        "output": {"format": sc.output_format, "path": sc.output_path},
    }
    if sc.min_key_rate_bps is not None or sc.candidates is not None:
        planning = {}
        if sc.min_key_rate_bps is not None:
            planning["min_key_rate_bps"] = sc.min_key_rate_bps
        if sc.candidates is not None:
            planning["candidates"] = [_channel_dict(c) for c in sc.candidates]
        doc["planning"] = planning
    sweep = {}
    for key in ("distances_km", "wavelengths_nm", "launch_powers_dbm"):
        if getattr(sc, key):
            sweep[key] = list(getattr(sc, key))
    if sweep:
        doc["sweep"] = sweep
    return doc


def dump_scenario(sc):
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False)
