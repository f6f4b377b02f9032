import pytest

from tmc2sumo.errors import TraciCommandError, TraciConnectionError, TraciProtocolError
from tmc2sumo.traci_client import TraciClient, traci_collect

from traci_mock import MockTraciServer

SCRIPT = [
    {"in_n": ["f_1_NL_car_0.0", "f_1_NL_car_0.1"], "out_w": []},
    {"in_n": ["f_1_NL_car_0.1"], "out_w": ["f_1_NL_car_0.0"]},
    {"in_n": [], "out_w": ["f_1_NL_car_0.1", "f_1_NT_car_0.0"]},
]


class TestTraciCollect:
    def test_three_step_union_matches_script(self):
        server = MockTraciServer(SCRIPT)
        got = traci_collect("127.0.0.1", server.port, ["in_n", "out_w"], steps=3)
        assert got == {
            "in_n": {"f_1_NL_car_0.0", "f_1_NL_car_0.1"},
            "out_w": {"f_1_NL_car_0.0", "f_1_NL_car_0.1", "f_1_NT_car_0.0"},
        }
        server.join()
        assert server.closed_cleanly

    def test_zero_steps_clean_close(self):
        server = MockTraciServer(SCRIPT)
        got = traci_collect("127.0.0.1", server.port, ["in_n"], steps=0)
        assert got == {"in_n": set()}
        server.join()
        assert server.closed_cleanly
        # Only the handshake and the close reached the server.
        assert server.received == [0x00, 0x7F]

    def test_deterministic_given_script(self):
        runs = []
        for _ in range(2):
            server = MockTraciServer(SCRIPT)
            runs.append(
                traci_collect("127.0.0.1", server.port, ["in_n", "out_w"], steps=3)
            )
            server.join()
        assert runs[0] == runs[1]

    def test_mid_session_drop_is_protocol_error(self):
        server = MockTraciServer(SCRIPT, drop_after=2)
        with pytest.raises(TraciProtocolError):
            traci_collect("127.0.0.1", server.port, ["in_n"], steps=3)

    def test_server_error_status_surfaces(self):
        server = MockTraciServer(SCRIPT, fail_command=0xAA)
        with pytest.raises(TraciCommandError, match="scripted failure"):
            traci_collect("127.0.0.1", server.port, ["in_n"], steps=1)

    def test_connect_failure(self):
        with pytest.raises(TraciConnectionError):
            TraciClient("127.0.0.1", 1, timeout=0.2)


class TestClientPieces:
    def test_version_handshake(self):
        server = MockTraciServer(SCRIPT)
        with TraciClient("127.0.0.1", server.port) as client:
            version = client.get_version()
            assert version.api_version == 21
            assert "MockTraCI" in version.software_version

    def test_edge_query_before_any_step_is_empty(self):
        server = MockTraciServer(SCRIPT)
        with TraciClient("127.0.0.1", server.port) as client:
            assert client.edge_vehicle_ids("in_n") == []
