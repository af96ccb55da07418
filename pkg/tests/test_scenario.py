import pytest
import yaml

from mcfqkd.calibration import load_calibration
from mcfqkd.errors import ScenarioError
from mcfqkd.fiber import NT_MCF_2018, SMF_BASELINE
from mcfqkd.leakage import DETECTOR_ID210
from mcfqkd.scenario import (
    DEFAULT_WAVELENGTHS_NM,
    dump_scenario,
    load_scenario,
    parse_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

MINIMAL = """
fiber: nt-mcf-2018
sweep:
  distances_km: [1, 2.5, 10]
"""


def test_minimal_defaults():
    sc = parse_scenario(MINIMAL)
    assert sc.fiber == NT_MCF_2018
    assert sc.detector == DETECTOR_ID210
    assert sc.length_km == NT_MCF_2018.length_km == 2.5
    assert sc.extra_path_loss_db == 0.0
    assert sc.qkd.mu == 0.48 and not sc.optimize_mu
    assert sc.qkd.misalignment_error == 0.01 and sc.qkd.fec_inefficiency == 1.22
    assert sc.filter.rejection_curve == ((0.0, 0.0), (2.0, 30.0), (4.0, 55.0))
    assert sc.allocation.quantum_slot == (0, 1550.0) and sc.allocation.data_channels == ()
    assert sc.distances_km == (1.0, 2.5, 10.0)
    assert sc.output_format == "csv" and sc.output_path is None
    assert sc.presets == (("fiber", "nt-mcf-2018"), ("detector", "detector-id210"))


def test_committed_calibration():
    cal = load_calibration()
    sc = parse_scenario("calibration: committed\n" + MINIMAL)
    assert sc.extra_path_loss_db == cal["extra_path_loss_db"]
    assert sc.filter.rejection_db(1552.0) == cal["knee_rejection_db"]
    assert sc.optimize_mu


def test_preset_override():
    sc = parse_scenario("fiber: {preset: smf-baseline, length_km: 50}\n")
    assert sc.fiber.length_km == 50 and sc.fiber.attenuation_db_per_km == SMF_BASELINE.attenuation_db_per_km


@pytest.mark.parametrize("text, path", [
    ("fiber: nope\n", "fiber.preset"),
    ("fiber: nt-mcf-2018\ndetector: nope\n", "detector.preset"),
    ("detector: detector-id210\n", "fiber"),
    ("fiber: nt-mcf-2018\nbogus: 1\n", "bogus"),
    ("fiber: {preset: nt-mcf-2018, length_km: -1}\n", "fiber"),
    ("fiber: nt-mcf-2018\nlink: {length_km: 0}\n", "link.length_km"),
    ("fiber: nt-mcf-2018\nqkd: {mu: -0.1}\n", "qkd.mu"),
    ("fiber: nt-mcf-2018\nqkd: {mu_interval: [0.1, 3]}\n", "qkd.mu_interval"),
    ("fiber: nt-mcf-2018\nsweep: {distances_km: [5, 1]}\n", "sweep.distances_km"),
    ("fiber: nt-mcf-2018\nsweep: {distances_km: []}\n", "sweep.distances_km"),
    ("fiber: nt-mcf-2018\noutput: {format: xml}\n", "output.format"),
    ("fiber: nt-mcf-2018\nallocation: {layout: ring}\n", "allocation.layout"),
    ("fiber: nt-mcf-2018\nallocation: {data_channels: [{core: 9, wavelength_nm: 1530, launch_dbm: -4}]}\n",
     "allocation.data_channels[0]"),
    ("fiber: nt-mcf-2018\nplanning: {candidates: [{core: 1, wavelength_nm: 1570, launch_dbm: -4}]}\n",
     "planning.candidates[0]"),
    ("fiber: [1, 2\n", ""),
])
def test_path_qualified_errors(text, path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.path == path


def test_quantum_slot_rejected():
    text = """
fiber: nt-mcf-2018
allocation:
  quantum: {core: 0, wavelength_nm: 1550}
  data_channels:
    - {core: 1, wavelength_nm: 1530, launch_dbm: -4}
    - {core: 0, wavelength_nm: 1550, launch_dbm: -4}
"""
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.path == "allocation.data_channels[1]"
    assert "quantum slot" in str(info.value)


def test_layout_expansion():
    sc = parse_scenario("fiber: ta-mcf-2018\nallocation: {layout: side-cores, wavelengths_nm: [1530, 1552]}\n")
    assert {ch.slot for ch in sc.allocation.data_channels} == {
        (c, wl) for c in range(1, 7) for wl in (1530.0, 1552.0)}


def test_grid_candidates_default_wavelengths():
    sc = parse_scenario("fiber: nt-mcf-2018\nplanning: {min_key_rate_bps: 100, candidates: {}}\n")
    assert len(sc.candidates) == 7 * len(DEFAULT_WAVELENGTHS_NM)
    assert (0, 1550.0) not in {ch.slot for ch in sc.candidates}


def test_require():
    sc = parse_scenario("fiber: nt-mcf-2018\n")
    sc.require("leakage")
    sc.require("keyrate")
    for cmd, path in (("sweep-distance", "sweep.distances_km"),
                      ("sweep-wavelength", "sweep.wavelengths_nm"),
                      ("plan", "planning.min_key_rate_bps")):
        with pytest.raises(ScenarioError) as info:
            sc.require(cmd)
        assert info.value.path == path


@pytest.mark.parametrize("name", ["example.yaml", "leakage_vs_power_nt.yaml", "key_rate_vs_wavelength_nt.yaml",
                                  "key_rate_vs_distance_nt.yaml", "plan_nt.yaml"])
def test_round_trip(name):
    sc = load_scenario(f"scenarios/{name}")
    assert scenario_from_dict(scenario_to_dict(sc)) == sc
    again = parse_scenario(dump_scenario(sc))
    assert again == sc
    assert dump_scenario(again) == dump_scenario(sc)


def test_round_trip_explicit_channels_and_curve():
    doc = {
        "fiber": {"variant": "trench-assisted", "length_km": 5, "attenuation_db_per_km": 0.25,
                  "xt_adjacent_db": 60, "xt_reference_length_km": 2.5},
        "filter": {"rejection_curve": [[0, 0], [1, 20], [3, 50]], "insertion_loss_db": 1.5},
        "qkd": {"mu": "optimize", "mu_interval": [0.1, 1.0], "sift_factor": 0.5},
        "allocation": {"quantum": {"core": 3, "wavelength_nm": 1550},
                       "layout": "all-cores", "wavelengths_nm": [1540],
                       "data_channels": [{"core": 3, "wavelength_nm": 1560, "launch_dbm": -6}]},
        "sweep": {"wavelengths_nm": [1530, 1545], "launch_powers_dbm": [-8, -4]},
        "output": {"format": "json", "path": "out.json"},
    }
    sc = scenario_from_dict(doc)
    assert scenario_from_dict(yaml.safe_load(dump_scenario(sc))) == sc


def test_exponent_floats():
    sc = parse_scenario("fiber: nt-mcf-2018\ndetector: {preset: detector-id210, gate_width_s: 2e-9}\n"
                        "planning: {min_key_rate_bps: 1.0e3}\n")
    assert sc.detector.gate_width_s == 2e-9 and sc.min_key_rate_bps == 1000.0
    with pytest.raises(ScenarioError):
        parse_scenario("fiber: nt-mcf-2018\nlink: {length_km: '2.5'}\n")
