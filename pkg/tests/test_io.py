import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ecolab import (
    ParseError,
    Scenario,
    ScenarioValidationError,
    Trajectory,
    parse_scenario,
    read_csv,
    render_svg,
    scenario_digest,
    serialize_scenario,
    write_csv,
)
from ecolab.demos import DEMO_NAMES, demo_document
from ecolab.scenario_io import DiscreteBundle, EpidemicBundle, SelectionBundle

MINIMAL_COMMUNITY = {
    "kind": "community",
    "species": [
        {"id": "prey", "role": "producer", "growth_rate": 1.0},
        {"id": "pred", "role": "consumer", "growth_rate": 0.5},
    ],
    "interactions": [
        {
            "species_i": "pred",
            "species_j": "prey",
            "kind": "predation",
            "coeff_i": 0.2,
            "response": {"type": "linear", "rate": 0.1},
        }
    ],
    "initial_densities": {"prey": 30.0, "pred": 8.0},
    "horizon": 10.0,
}


def as_text(payload) -> str:
    return json.dumps(payload)


class TestParse:
    def test_minimal_community(self):
        scenario = parse_scenario(as_text(MINIMAL_COMMUNITY))
        assert isinstance(scenario, Scenario)
        assert scenario.species_ids == ("prey", "pred")
        assert scenario.integrator.method == "rk4_fixed"  # default applied
        assert scenario.integrator.extinction_epsilon == 1e-9

    def test_unknown_kind_names_valid_kinds(self):
        with pytest.raises(ParseError) as err:
            parse_scenario(as_text({"kind": "communty"}))
        message = str(err.value)
        assert "communty" in message
        for kind in ("community", "discrete", "epidemic", "selection"):
            assert kind in message

    def test_unknown_top_level_field(self):
        payload = dict(MINIMAL_COMMUNITY, extra_knob=1)
        with pytest.raises(ParseError, match="unknown field.*extra_knob"):
            parse_scenario(as_text(payload))

    def test_unknown_species_field_is_an_error(self):
        payload = json.loads(as_text(MINIMAL_COMMUNITY))
        payload["species"][0]["growthrate"] = 2.0
        with pytest.raises(ParseError, match="growthrate"):
            parse_scenario(as_text(payload))

    def test_syntax_error_reports_line_and_column(self):
        with pytest.raises(ParseError, match=r"line \d+, column \d+"):
            parse_scenario('{"kind": "community",}')

    def test_invariant_violation_delegated_to_validation(self):
        payload = json.loads(as_text(MINIMAL_COMMUNITY))
        payload["initial_densities"]["prey"] = -1.0
        with pytest.raises(ScenarioValidationError, match="negative density"):
            parse_scenario(as_text(payload))

    def test_continuum_sugar_expands(self):
        payload = {
            "kind": "community",
            "species": [
                {"id": "a", "role": "producer", "growth_rate": 1.0, "self_limitation": 1.0},
                {"id": "b", "role": "producer", "growth_rate": 1.0, "self_limitation": 1.0},
            ],
            "interactions": [
                {"species_i": "a", "species_j": "b", "kind": "continuum", "alpha": -0.5, "base_strength": 0.4}
            ],
            "initial_densities": {"a": 1.0, "b": 1.0},
            "horizon": 5.0,
        }
        scenario = parse_scenario(as_text(payload))
        entry = scenario.interactions[0]
        assert entry.kind.value == "parasitism"
        assert entry.continuum_alpha == -0.5

    def test_epidemic_document(self):
        payload = {
            "kind": "epidemic",
            "graph": {"generator": "complete", "n": 50},
            "model": "sis",
            "beta": 0.08,
            "gamma": 1.0,
            "initial_infected": [0],
            "horizon": 200.0,
        }
        bundle = parse_scenario(as_text(payload))
        assert isinstance(bundle, EpidemicBundle)
        assert bundle.model.graph.n_edges == 1225
        assert bundle.sample_dt == 1.0  # default
        assert bundle.model.seed == 0

    def test_epidemic_rejects_bad_generator(self):
        payload = {
            "kind": "epidemic",
            "graph": {"generator": "smallworld", "n": 10},
            "model": "sis",
            "beta": 0.1,
            "gamma": 1.0,
            "initial_infected": [0],
            "horizon": 10.0,
        }
        with pytest.raises(ParseError, match="smallworld"):
            parse_scenario(as_text(payload))

    def test_selection_document(self):
        payload = {
            "kind": "selection",
            "means": {"display": 1.0, "preference": 1.0, "fitness": 0.0},
            "covariance": {
                "v_display": 1.0,
                "v_preference": 1.0,
                "v_fitness": 0.0,
                "c_display_preference": 0.9,
            },
            "natural_gradient": {"type": "constant", "value": [-0.05, 0.0, 0.0]},
            "sexual_gradient": {
                "type": "linear",
                "intercept": [0.0, 0.0, 0.0],
                "matrix": [[0.0, 0.1, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            },
            "steps": 100,
        }
        bundle = parse_scenario(as_text(payload))
        assert isinstance(bundle, SelectionBundle)
        state = bundle.initial_state()
        assert state.g_matrix[0, 1] == 0.9
        assert state.sexual_gradient[0] == pytest.approx(0.1)

    def test_selection_rejects_non_psd(self):
        payload = {
            "kind": "selection",
            "means": {"display": 0.0, "preference": 0.0, "fitness": 0.0},
            "covariance": {
                "v_display": 1.0,
                "v_preference": 1.0,
                "v_fitness": 1.0,
                "c_display_preference": 2.0,
            },
            "natural_gradient": {"type": "constant", "value": [0.0, 0.0, 0.0]},
            "sexual_gradient": {"type": "constant", "value": [0.0, 0.0, 0.0]},
        }
        with pytest.raises(ParseError, match="positive semi-definite"):
            parse_scenario(as_text(payload))

    def test_discrete_document(self):
        payload = {
            "kind": "discrete",
            "map": "nicholson_bailey",
            "params": {"growth_factor": 2.0, "search_efficiency": 0.1, "conversion": 1.0},
            "initial": {"host": 14.0, "parasitoid": 7.0},
            "generations": 50,
        }
        bundle = parse_scenario(as_text(payload))
        assert isinstance(bundle, DiscreteBundle)
        assert bundle.params.growth_factor == 2.0

    def test_schema_version_checked(self):
        payload = dict(MINIMAL_COMMUNITY, schema_version=99)
        with pytest.raises(ParseError, match="schema_version"):
            parse_scenario(as_text(payload))


class TestRoundTrip:
    @pytest.mark.parametrize("name", [n for n in DEMO_NAMES if n != "mimicry"])
    def test_demo_documents_round_trip(self, name):
        document = demo_document(name)
        text = serialize_scenario(document)
        reparsed = parse_scenario(text)
        assert reparsed == document
        assert serialize_scenario(reparsed) == text

    def test_round_trip_general_community(self):
        scenario = parse_scenario(as_text(MINIMAL_COMMUNITY))
        assert parse_scenario(serialize_scenario(scenario)) == scenario

    def test_digest_stable_and_content_addressed(self):
        a = demo_document("lv-classic")
        b = demo_document("lv-classic")
        assert scenario_digest(a) == scenario_digest(b)
        assert len(scenario_digest(a)) == 64
        assert scenario_digest(a) != scenario_digest(demo_document("food-chain"))


class TestCsv:
    def test_header_and_initial_row(self):
        traj = Trajectory(("prey", "pred"), [0.0, 0.5], [[30.0, 8.0], [29.5, 8.2]])
        text = write_csv(traj)
        lines = text.splitlines()
        assert lines[0] == "time,prey,pred"
        assert lines[1] == "0,30,8"

    def test_single_sample_trajectory(self):
        traj = Trajectory(("x",), [0.0], [[4.0]])
        text = write_csv(traj)
        assert text == "time,x\n0,4\n"

    def test_round_trip_bit_exact(self):
        values = np.array([[0.1 + 0.2, 1.0 / 3.0], [1e-17, 12345.6789]])
        traj = Trajectory(("a", "b"), [0.0, 0.125], values)
        back = read_csv(write_csv(traj))
        assert back.variable_names == ("a", "b")
        assert np.array_equal(back.times, traj.times)
        assert np.array_equal(back.values, traj.values)

    def test_read_csv_errors(self):
        with pytest.raises(ValueError, match="time"):
            read_csv("t,a\n0,1\n")
        with pytest.raises(ValueError, match="cells"):
            read_csv("time,a\n0,1,2\n")


class TestSvg:
    def test_valid_xml_and_polyline_count(self):
        traj = Trajectory(("a", "b"), [0.0, 1.0, 2.0], [[1.0, 2.0], [3.0, 1.0], [2.0, 2.5]])
        svg = render_svg(traj, title="test")
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 2

    def test_constant_series_draw_horizontal_lines(self):
        traj = Trajectory(("a", "b"), [0.0, 1.0], [[1.0, 3.0], [1.0, 3.0]])
        svg = render_svg(traj)
        root = ET.fromstring(svg)
        for el in root.iter():
            if el.tag.endswith("polyline"):
                points = el.attrib["points"].split()
                ys = {point.split(",")[1] for point in points}
                assert len(ys) == 1

    def test_deterministic_bytes(self):
        traj = Trajectory(("a",), [0.0, 1.0, 2.0], [[1.0], [5.0], [2.0]])
        assert render_svg(traj) == render_svg(traj)

    def test_too_few_samples_rejected(self):
        traj = Trajectory(("a",), [0.0], [[1.0]])
        with pytest.raises(ValueError, match="two samples"):
            render_svg(traj)

    def test_legend_contains_names(self):
        traj = Trajectory(("alpha<x>",), [0.0, 1.0], [[1.0], [2.0]])
        svg = render_svg(traj)
        assert "alpha&lt;x&gt;" in svg
