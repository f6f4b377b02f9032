import csv
import io
import json
import random
from datetime import datetime, timedelta

import pytest

from tmc2sumo.demand import compile_flows, emit_routes_xml
from tmc2sumo.errors import ComparisonError, VehrouteParseError
from tmc2sumo.mapping import Cardinal, bind_intersection
from tmc2sumo.tmcdata import ALL_MOVEMENT_KEYS, CountBin, MovementKey, Turn, VehicleClass
from tmc2sumo.validation import (
    SimulatedCounts,
    compare,
    parse_routes_xml,
    parse_vehroutes,
    real_bins_from_flows,
    reconstruct_all,
    reconstruct_counts,
    report_to_csv,
    report_to_json,
)

NL_CAR = MovementKey(Cardinal.NORTH, Turn.LEFT, VehicleClass.CAR)
T0 = datetime(2024, 6, 1, 8, 0)

VEHROUTES_FIXTURE = """<?xml version="1.0" encoding="UTF-8"?>
<routes>
    <vehicle id="f_1_NL_car_0.0" depart="3.00" arrival="45.00">
        <route edges="in_n out_w"/>
    </vehicle>
    <vehicle id="f_1_NL_car_0.1" depart="9.00" arrival="52.00">
        <route edges="in_n out_w"/>
    </vehicle>
    <vehicle id="f_1_ST_bus_1.0" depart="910.00" arrival="960.00">
        <route edges="in_s out_s"/>
    </vehicle>
</routes>
"""


class TestParseVehroutes:
    def test_three_vehicle_fixture(self):
        parsed = parse_vehroutes(VEHROUTES_FIXTURE)
        assert len(parsed.vehicles) == 3
        assert [v.depart for v in parsed.vehicles] == [3.0, 9.0, 910.0]
        assert parsed.vehicles[0].edges == ("in_n", "out_w")

    def test_empty_document(self):
        parsed = parse_vehroutes("<routes/>")
        assert parsed.vehicles == ()
        assert parsed.diagnostics == ()

    def test_vehicle_without_route_skipped_with_diagnostic(self):
        text = '<routes><vehicle id="v1" depart="0"/></routes>'
        parsed = parse_vehroutes(text)
        assert parsed.vehicles == ()
        assert any("v1" in d for d in parsed.diagnostics)

    def test_malformed_xml(self):
        with pytest.raises(VehrouteParseError):
            parse_vehroutes("<routes><vehicle")

    def test_route_distribution_unwrapped(self):
        text = (
            '<routes><vehicle id="f_1_NL_car_0.0" depart="1">'
            '<routeDistribution><route edges="a b"/></routeDistribution>'
            "</vehicle></routes>"
        )
        parsed = parse_vehroutes(text)
        assert parsed.vehicles[0].edges == ("a", "b")


class TestReconstructCounts:
    def test_duplicates_collapse(self):
        ids = ["f_1_NL_car_0.0", "f_1_NL_car_0.1", "f_1_NL_car_0.1"]
        sim = reconstruct_counts(ids, bin_count=1)
        assert sim.count(0, NL_CAR) == 2
        assert sim.intersection_id == "1"

    def test_foreign_id_diagnostic(self):
        sim = reconstruct_counts(["veh9"], bin_count=1)
        assert sim.bins[0][1] == {}
        assert any("veh9" in d for d in sim.diagnostics)

    def test_empty_input_all_zero(self):
        sim = reconstruct_counts([], bin_count=3)
        assert len(sim.bins) == 3
        assert all(counts == {} for _, counts in sim.bins)

    def test_idempotent_under_duplication(self):
        ids = [
            "f_7_NL_car_0.0",
            "f_7_NL_car_0.1",
            "f_7_ET_truck_1.0",
            "f_7_WR_bus_1.4",
        ]
        once = reconstruct_counts(ids, bin_count=2)
        twice = reconstruct_counts(ids + ids, bin_count=2)
        assert once == twice

    def test_intersections_must_not_mix_without_filter(self):
        with pytest.raises(ValueError):
            reconstruct_counts(["f_1_NL_car_0.0", "f_2_NL_car_0.0"], bin_count=1)

    def test_filtering_by_intersection(self):
        ids = ["f_1_NL_car_0.0", "f_2_NL_car_0.0"]
        sim = reconstruct_counts(ids, bin_count=1, intersection_id="2")
        assert sim.count(0, NL_CAR) == 1

    def test_reconstruct_all_groups(self):
        ids = ["f_1_NL_car_0.0", "f_2_ET_bus_0.0"]
        grouped = reconstruct_all(ids, bin_count=1)
        assert set(grouped) == {"1", "2"}

    def test_out_of_range_bin_diagnosed(self):
        sim = reconstruct_counts(["f_1_NL_car_9.0"], bin_count=2)
        assert any("bin 9" in d for d in sim.diagnostics)


def real_bin(counts, minutes=0, iid="1"):
    return CountBin(
        intersection_id=iid,
        bin_start=T0 + timedelta(minutes=minutes),
        duration=900,
        counts=counts,
    )


class TestCompare:
    def test_identical_counts_zero_diffs(self):
        real = [real_bin({NL_CAR: 5})]
        sim = SimulatedCounts("1", ((0, {NL_CAR: 5}),))
        report = compare(real, sim)
        assert report.all_zero
        assert report.real_total == 5
        assert report.simulated_total == 5

    def test_arithmetic_of_differences(self):
        real = [real_bin({NL_CAR: 150})]
        sim = SimulatedCounts("1", ((0, {NL_CAR: 147}),))
        report = compare(real, sim)
        (row,) = report.rows
        assert row.abs_diff == 3
        assert row.pct_diff == pytest.approx(2.0)

    def test_simulation_only_key_marks_pct_undefined(self):
        extra = MovementKey(Cardinal.EAST, Turn.THROUGH, VehicleClass.BUS)
        real = [real_bin({})]
        sim = SimulatedCounts("1", ((0, {extra: 4}),))
        report = compare(real, sim)
        (row,) = report.rows
        assert row.real == 0
        assert row.simulated == 4
        assert row.pct_diff is None

    def test_bin_structure_mismatch(self):
        real = [real_bin({NL_CAR: 1})]
        sim = SimulatedCounts("1", ((0, {}), (1, {})))
        with pytest.raises(ComparisonError, match="bin structure"):
            compare(real, sim)

    def test_intersection_mismatch(self):
        real = [real_bin({NL_CAR: 1}, iid="1")]
        sim = SimulatedCounts("2", ((0, {}),))
        with pytest.raises(ComparisonError):
            compare(real, sim)


class TestReportExports:
    def make_report(self):
        real = [real_bin({NL_CAR: 150})]
        sim = SimulatedCounts("1", ((0, {NL_CAR: 147}),))
        return compare(real, sim)

    def test_csv_schema(self):
        text = report_to_csv(self.make_report())
        rows = list(csv.DictReader(io.StringIO(text)))
        assert rows[0]["approach"] == "north"
        assert rows[0]["turn"] == "left"
        assert rows[0]["real"] == "150"
        assert rows[0]["simulated"] == "147"
        assert rows[0]["abs_diff"] == "3"
        assert rows[0]["pct_diff"] == "2.0"

    def test_csv_pct_blank_when_real_zero(self):
        sim = SimulatedCounts("1", ((0, {NL_CAR: 4}),))
        report = compare([real_bin({})], sim)
        rows = list(csv.DictReader(io.StringIO(report_to_csv(report))))
        assert rows[0]["pct_diff"] == ""

    def test_json_round_trips(self):
        payload = json.loads(report_to_json(self.make_report()))
        assert payload[0]["intersection_id"] == "1"
        assert payload[0]["totals"] == {"real": 150, "simulated": 147, "abs_diff": 3}
        assert payload[0]["rows"][0]["pct_diff"] == pytest.approx(2.0)


from conftest import synthesize_vehroutes


class TestEndToEndOffline:
    def test_compile_emit_reconstruct_is_lossless(self, fourway_net):
        rng = random.Random(12345)
        binding = bind_intersection(fourway_net, "13463414", 0.0, 0.0)
        counts_per_bin = [
            {key: rng.randint(0, 60) for key in ALL_MOVEMENT_KEYS} for _ in range(4)
        ]
        counts_per_bin[0][NL_CAR] = 150
        bins = [
            CountBin("13463414", T0 + timedelta(seconds=900 * i), 900, c)
            for i, c in enumerate(counts_per_bin)
        ]
        flows, diags = compile_flows(binding, bins)
        assert diags == []

        routes_text = emit_routes_xml(flows)
        parsed_flows, _ = parse_routes_xml(routes_text)
        vehroutes = synthesize_vehroutes(parsed_flows)
        vehicle_ids = [v.vehicle_id for v in parse_vehroutes(vehroutes).vehicles]
        sim = reconstruct_counts(vehicle_ids, bin_count=4)

        report = compare(bins, sim)
        nonzero_rows = [r for r in report.rows if r.real or r.simulated]
        assert report.all_zero
        assert any(r.real == 150 for r in nonzero_rows)

    def test_real_bins_from_flows_recovers_counts(self, fourway_net):
        binding = bind_intersection(fourway_net, "5", 0.0, 0.0)
        bins = [
            real_bin({NL_CAR: 10}, minutes=0, iid="5"),
            real_bin({}, minutes=15, iid="5"),
            real_bin({NL_CAR: 7}, minutes=30, iid="5"),
        ]
        flows, _ = compile_flows(binding, bins)
        recovered = real_bins_from_flows(flows)
        assert list(recovered) == ["5"]
        got = recovered["5"]
        assert len(got) == 3  # the empty middle bin is restored
        assert got[0].counts == {NL_CAR: 10}
        assert got[1].counts == {}
        assert got[2].counts == {NL_CAR: 7}
