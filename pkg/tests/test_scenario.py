import json

import pytest

from cslrate.errors import ScenarioError
from cslrate.models import Cube, Displacement, Sphere
from cslrate.scenario import load_scenario, load_stack, parse_stack, scenario_from_dict, stack_to_dict

from .conftest import LAMBDA, R_C

CUBE = {
    "params": {"lambda": LAMBDA, "r_c": R_C},
    "geometry": {"kind": "cube", "l": 1e-6, "density": 1e30},
    "displacement": {"dz": 1e-10},
}


def write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data, indent=2), encoding="utf-8")
    return path


def field_of(data):
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(data)
    return info.value.field


def test_load_cube_scenario(scenarios_dir):
    scenario = load_scenario(scenarios_dir / "cube.json")
    assert isinstance(scenario.geometry, Cube)
    assert scenario.geometry.l == 1e-6
    assert scenario.displacement == Displacement(0.0, 0.0, 1e-10)
    assert scenario.lattice.counts == (100, 100, 100)
    assert scenario.params.lam == LAMBDA
    assert scenario.stack is None


def test_defaults_are_filled_in():
    data = {"geometry": {"kind": "sphere", "r": 2e-7, "density": 1e30}, "displacement": {}}
    scenario = scenario_from_dict(data)
    assert isinstance(scenario.geometry, Sphere)
    assert scenario.displacement.is_zero
    assert scenario.params.r_c == pytest.approx(1e-7)
    assert scenario.lattice is None


def test_mass_density_is_converted():
    data = {**CUBE, "geometry": {"kind": "cube", "l": 1e-6, "density": 1.6749e3, "density_unit": "kg/m3"}}
    assert scenario_from_dict(data).geometry.density_n == pytest.approx(1e30)


def test_syntax_error_reports_line(tmp_path):
    path = write(tmp_path, '{\n  "params": {},\n  "geometry": {"kind": "cube",,}\n}\n')
    with pytest.raises(ScenarioError) as info:
        load_scenario(path)
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_top_level_must_be_object(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(write(tmp_path, "[1, 2]"))


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "absent.json")


@pytest.mark.parametrize("change, expected", [
    (lambda d: d.pop("geometry"), "geometry"),
    (lambda d: d["geometry"].update(kind="torus"), "geometry.kind"),
    (lambda d: d["geometry"].pop("l"), "geometry.l"),
    (lambda d: d["geometry"].update(l="big"), "geometry.l"),
    (lambda d: d["geometry"].update(l=-1e-6), "geometry"),
    (lambda d: d["geometry"].update(density_unit="g/cm3"), "geometry.density_unit"),
    (lambda d: d["displacement"].update(dz=True), "displacement.dz"),
    (lambda d: d.update(params={"lambda": 0.0}), "params"),
    (lambda d: d.update(lattice={"l": 1e-5}), "lattice"),
    (lambda d: d.update(lattice={"n_a": 2}), "lattice.l"),
])
def test_schema_errors_name_the_field(change, expected):
    data = json.loads(json.dumps(CUBE))
    change(data)
    assert field_of(data) == expected


def test_scenario_round_trip(scenarios_dir):
    scenario = load_scenario(scenarios_dir / "cube.json")
    again = scenario_from_dict(scenario.to_dict())
    assert again == scenario
    assert scenario.to_dict()["geometry"]["density_unit"] == "nucleons/m3"


def test_scenario_with_layers():
    rows = [{"thickness": 4e-7, "density": 5e3}, {"thickness": 6e-7, "density": 1e3}]
    scenario = scenario_from_dict({**CUBE, "layers": rows})
    assert scenario.stack.d == 1e-6
    assert [layer.density for layer in scenario.stack.layers] == [5e3, 1e3]
    assert scenario.stack.total_length == pytest.approx(1e-6)
    assert scenario.to_dict()["layers"] == rows


@pytest.mark.parametrize("geometry, rows", [
    ({"kind": "sphere", "r": 1e-6, "density": 1e30}, [{"thickness": 1e-6, "density": 1e3}]),
    ({"kind": "cuboid", "lx": 1e-6, "ly": 2e-6, "lz": 1e-6, "density": 1e30}, [{"thickness": 1e-6, "density": 1e3}]),
    ({"kind": "cube", "l": 1e-6, "density": 1e30}, [{"thickness": 3e-7, "density": 1e3}]),
    ({"kind": "cube", "l": 1e-6, "density": 1e30}, []),
    ({"kind": "cube", "l": 1e-6, "density": 1e30}, {"d": 1e-6, "layers": [{"thickness": 1e-6, "density": 1e3}]}),
])
def test_scenario_layers_must_fit_geometry(geometry, rows):
    assert field_of({**CUBE, "geometry": geometry, "layers": rows}) == "layers"


def test_scenario_layer_rows_are_validated():
    rows = [{"thickness": 5e-7, "density": 1e3}, {"thickness": 5e-7}]
    assert field_of({**CUBE, "layers": rows}) == "layers[1].density"


def test_stack_needs_exactly_one_form():
    both = {"d": 1e-6, "layers": [{"thickness": 1e-7, "density": 1e3}],
            "alternating": {"n_layers": 2, "l_o": 1e-7, "l_e": 1e-7, "rho_o": 1e3, "rho_e": 2e3}}
    with pytest.raises(ScenarioError) as info:
        parse_stack(both)
    assert info.value.field == "layers"
    with pytest.raises(ScenarioError):
        parse_stack({"d": 1e-6})


def test_stack_layer_count_must_be_integer():
    block = {"d": 1e-6, "alternating": {"n_layers": 2.5, "l_o": 1e-7, "l_e": 1e-7, "rho_o": 1e3, "rho_e": 2e3}}
    with pytest.raises(ScenarioError) as info:
        parse_stack(block, "layers")
    assert info.value.field == "layers.alternating.n_layers"


def test_stack_rejects_negative_density():
    with pytest.raises(ScenarioError) as info:
        parse_stack({"d": 1e-6, "layers": [{"thickness": 1e-7, "density": -1.0}]})
    assert info.value.field == "layers[0]"


def test_load_stack_with_notes(scenarios_dir):
    stack_file = load_stack(scenarios_dir / "ligo.json")
    assert len(stack_file.stack.layers) == 200_000
    assert stack_file.stack.d == 0.34
    assert "pairs" in stack_file.notes


def test_explicit_alternation_is_written_compactly(scenarios_dir):
    stack = load_stack(scenarios_dir / "cantilever.json").stack
    compact = stack_to_dict(stack)
    assert compact["alternating"]["n_layers"] == 47
    assert parse_stack(compact).layers == stack.layers


def test_single_layer_is_written_as_list(scenarios_dir):
    stack = load_stack(scenarios_dir / "uniform.json").stack
    assert stack_to_dict(stack) == {"d": 1.1e-4, "layers": [{"thickness": 1.739e-5, "density": 4.8e3}]}


def test_notes_must_be_object(tmp_path):
    path = write(tmp_path, {"d": 1e-6, "layers": [{"thickness": 1e-7, "density": 1e3}], "notes": "none"})
    with pytest.raises(ScenarioError) as info:
        load_stack(path)
    assert info.value.field == "notes"
