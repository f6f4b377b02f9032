import random
import xml.etree.ElementTree as ET
from datetime import datetime, timedelta

import pytest
from hypothesis import given, strategies as st

from tmc2sumo.demand import (
    FlowSpec,
    ScenarioConfig,
    VehicleTypeConfig,
    compile_flows,
    default_vehicle_types,
    emit_routes_xml,
    emit_sumocfg,
    encode_flow_id,
    movement_exit_direction,
    parse_vehicle_id,
)
from tmc2sumo.errors import DuplicateFlowIdError, VehicleIdError
from tmc2sumo.mapping import Cardinal, bind_intersection
from tmc2sumo.netmodel import parse_network
from tmc2sumo.tmcdata import ALL_MOVEMENT_KEYS, CountBin, MovementKey, Turn, VehicleClass
from tmc2sumo.validation import parse_routes_xml

from conftest import build_net_xml

NL_CAR = MovementKey(Cardinal.NORTH, Turn.LEFT, VehicleClass.CAR)
T0 = datetime(2024, 6, 1, 8, 0)


def bins_for(iid, counts_per_bin):
    return [
        CountBin(
            intersection_id=iid,
            bin_start=T0 + timedelta(seconds=900 * i),
            duration=900,
            counts=counts,
        )
        for i, counts in enumerate(counts_per_bin)
    ]


@pytest.fixture
def fourway_binding(fourway_net):
    return bind_intersection(fourway_net, "13463414", 0.0, 0.0)


class TestMovementExitDirection:
    @pytest.mark.parametrize(
        "approach,turn,expected",
        [
            (Cardinal.NORTH, Turn.THROUGH, Cardinal.NORTH),
            (Cardinal.NORTH, Turn.LEFT, Cardinal.WEST),
            (Cardinal.EAST, Turn.RIGHT, Cardinal.SOUTH),
            (Cardinal.SOUTH, Turn.LEFT, Cardinal.EAST),
            (Cardinal.WEST, Turn.RIGHT, Cardinal.NORTH),
        ],
    )
    def test_examples(self, approach, turn, expected):
        assert movement_exit_direction(approach, turn) is expected

    def test_four_lefts_return_home(self):
        for start in Cardinal:
            heading = start
            for _ in range(4):
                heading = movement_exit_direction(heading, Turn.LEFT)
            assert heading is start

    def test_left_then_right_is_identity(self):
        for start in Cardinal:
            left = movement_exit_direction(start, Turn.LEFT)
            assert movement_exit_direction(left, Turn.RIGHT) is start


class TestFlowIdGrammar:
    def test_encode_example(self):
        assert encode_flow_id("13463414", NL_CAR, 2) == "f_13463414_NL_car_2"

    def test_parse_with_vehicle_ordinal(self):
        iid, key, bin_index = parse_vehicle_id("f_13463414_NL_car_2.17")
        assert iid == "13463414"
        assert key == NL_CAR
        assert bin_index == 2

    def test_foreign_id_rejected(self):
        with pytest.raises(VehicleIdError, match="veh42"):
            parse_vehicle_id("veh42")

    def test_underscore_in_intersection_id_rejected(self):
        with pytest.raises(VehicleIdError):
            encode_flow_id("a_b", NL_CAR, 0)

    @given(
        st.text(alphabet="abcdefghij0123456789", min_size=1, max_size=12),
        st.sampled_from(ALL_MOVEMENT_KEYS),
        st.integers(min_value=0, max_value=95),
        st.integers(min_value=0, max_value=500),
    )
    def test_round_trip_over_full_key_space(self, iid, key, bin_index, ordinal):
        flow_id = encode_flow_id(iid, key, bin_index)
        assert parse_vehicle_id(flow_id) == (iid, key, bin_index)
        assert parse_vehicle_id(f"{flow_id}.{ordinal}") == (iid, key, bin_index)


class TestCompileFlows:
    def test_northbound_left_cars_example(self, fourway_binding):
        bins = bins_for("13463414", [{NL_CAR: 150}])
        flows, diags = compile_flows(fourway_binding, bins)
        assert diags == []
        assert len(flows) == 1
        flow = flows[0]
        assert flow.count == 150
        assert flow.from_edge == "in_n"
        assert flow.to_edge == "out_w"
        assert (flow.begin, flow.end) == (0, 900)
        assert flow.flow_id == "f_13463414_NL_car_0"

    def test_zero_count_bins_emit_nothing(self, fourway_binding):
        bins = bins_for("13463414", [{NL_CAR: 10}, {}, {NL_CAR: 7}, {NL_CAR: 3}])
        flows, _ = compile_flows(fourway_binding, bins)
        assert [f.begin for f in flows] == [0, 1800, 2700]
        assert [f.count for f in flows] == [10, 7, 3]

    def test_conservation_against_summation_oracle(self, fourway_binding):
        rng = random.Random(99)
        counts_per_bin = [
            {key: rng.randint(0, 1000) for key in ALL_MOVEMENT_KEYS} for _ in range(4)
        ]
        bins = bins_for("13463414", counts_per_bin)
        flows, diags = compile_flows(fourway_binding, bins)
        assert diags == []
        # Oracle: sum emitted counts per (movement, bin) independently.
        emitted: dict[tuple, int] = {}
        for flow in flows:
            iid, key, bin_index = parse_vehicle_id(flow.flow_id)
            emitted[(key, bin_index)] = emitted.get((key, bin_index), 0) + flow.count
        for bin_index, counts in enumerate(counts_per_bin):
            for key, value in counts.items():
                assert emitted.get((key, bin_index), 0) == value

    def test_missing_leg_drops_movement_with_diagnostic(self):
        net = parse_network(build_net_xml(legs=("N", "E", "W")))
        binding = bind_intersection(net, "9", 0.0, 0.0)
        # Northbound right exits east (fine); northbound through exits north
        # (fine); eastbound left exits north (fine); eastbound right exits
        # SOUTH, which has no leg.
        er_car = MovementKey(Cardinal.EAST, Turn.RIGHT, VehicleClass.CAR)
        bins = bins_for("9", [{er_car: 5}])
        flows, diags = compile_flows(binding, bins)
        assert flows == []
        assert len(diags) == 1
        assert "no outgoing edge for cardinal south" in diags[0]

    def test_missing_approach_reports_incoming(self):
        net = parse_network(build_net_xml(legs=("N", "E", "W")))
        binding = bind_intersection(net, "9", 0.0, 0.0)
        # No south stub means nothing can travel northbound into the junction.
        bins = bins_for("9", [{NL_CAR: 5}])
        flows, diags = compile_flows(binding, bins)
        assert flows == []
        assert "no incoming edge for cardinal north" in diags[0]

    def test_bin_input_order_does_not_matter(self, fourway_binding):
        rng = random.Random(6)
        counts_per_bin = [
            {key: rng.randint(0, 50) for key in ALL_MOVEMENT_KEYS} for _ in range(4)
        ]
        bins = bins_for("13463414", counts_per_bin)
        shuffled = list(bins)
        rng.shuffle(shuffled)
        assert compile_flows(fourway_binding, bins) == compile_flows(
            fourway_binding, shuffled
        )

    def test_wrong_intersection_rejected(self, fourway_binding):
        bins = bins_for("999", [{NL_CAR: 1}])
        with pytest.raises(Exception, match="999"):
            compile_flows(fourway_binding, bins)


class TestEmitRoutesXml:
    def test_single_vtype_and_flow_document(self):
        vt = VehicleTypeConfig("car", VehicleClass.CAR, length=5.0)
        flow = FlowSpec("f_1_NL_car_0", "in_n", "out_w", 0, 900, 150, "car")
        text = emit_routes_xml([flow], [vt])
        root = ET.fromstring(text)
        assert [el.tag for el in root] == ["vType", "flow"]
        flow_el = root.find("flow")
        assert flow_el.get("number") == "150"
        assert flow_el.get("from") == "in_n"
        vtype_el = root.find("vType")
        assert vtype_el.get("vClass") == "passenger"
        assert vtype_el.get("sigma") == "0.50"

    def test_empty_flow_list_still_valid(self):
        text = emit_routes_xml([], default_vehicle_types())
        root = ET.fromstring(text)
        assert len(root.findall("vType")) == 3
        assert root.findall("flow") == []

    def test_duplicate_flow_id_rejected(self):
        flow = FlowSpec("f_1_NL_car_0", "a", "b", 0, 900, 1, "car")
        with pytest.raises(DuplicateFlowIdError):
            emit_routes_xml([flow, flow], default_vehicle_types())

    def test_emit_parse_round_trip(self):
        rng = random.Random(4)
        flows = random_flows(rng, 40)
        text = emit_routes_xml(flows, default_vehicle_types())
        parsed, vtypes = parse_routes_xml(text)
        assert sorted(parsed, key=lambda f: f.flow_id) == sorted(
            flows, key=lambda f: f.flow_id
        )
        assert {vt.type_id for vt in vtypes} == {"car", "truck", "bus"}

    def test_deterministic_and_order_independent(self):
        rng = random.Random(5)
        flows = random_flows(rng, 20)
        shuffled = list(flows)
        rng.shuffle(shuffled)
        assert emit_routes_xml(flows, default_vehicle_types()) == emit_routes_xml(
            shuffled, default_vehicle_types()
        )


def random_flows(rng, n):
    flows = []
    picks = rng.sample(
        [(key, b) for key in ALL_MOVEMENT_KEYS for b in range(8)], n
    )
    for key, bin_index in picks:
        flows.append(
            FlowSpec(
                flow_id=encode_flow_id("77", key, bin_index),
                from_edge=f"in_{key.approach.letter.lower()}",
                to_edge="out_x",
                begin=bin_index * 900,
                end=(bin_index + 1) * 900,
                count=rng.randint(1, 400),
                vtype=key.vclass.value,
            )
        )
    return flows


class TestEmitSumocfg:
    def test_fifteen_minute_scenario_spans_900(self):
        sc = ScenarioConfig("net.net.xml", "routes.rou.xml", begin=0, end=900)
        text = emit_sumocfg(sc)
        root = ET.fromstring(text)
        assert root.find("time/begin").get("value") == "0"
        assert root.find("time/end").get("value") == "900"
        assert root.find("time/step-length").get("value") == "1.0"

    def test_hour_scenario(self):
        sc = ScenarioConfig("n", "r", begin=0, end=3600, step_length=1.0)
        root = ET.fromstring(emit_sumocfg(sc))
        assert root.find("time/end").get("value") == "3600"

    def test_byte_identical_for_equal_inputs(self):
        sc = ScenarioConfig("n", "r", begin=0, end=900, vehroute_output="v.xml")
        assert emit_sumocfg(sc) == emit_sumocfg(sc)

    def test_vehroute_output_optional(self):
        with_output = emit_sumocfg(ScenarioConfig("n", "r", 0, 900, vehroute_output="v.xml"))
        without = emit_sumocfg(ScenarioConfig("n", "r", 0, 900))
        assert "vehroute-output" in with_output
        assert "vehroute-output" not in without

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            ScenarioConfig("n", "r", begin=900, end=900)
        with pytest.raises(ValueError):
            VehicleTypeConfig("x", VehicleClass.CAR, length=5.0, sigma=1.5)
