import os
import random

import pytest

from tmc2sumo.netmodel import parse_network

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def fixture_text(name: str) -> str:
    with open(fixture_path(name), encoding="utf-8") as f:
        return f.read()


def build_net_xml(legs=("N", "S", "E", "W"), edge_type="highway.primary",
                  center=(0.0, 0.0), arm=100.0, extra_edges=()):
    """Assemble a star-shaped network around one junction, as XML text.

    ``legs`` picks which stubs exist; incoming edge ids are ``in_<cardinal>``
    named by travel direction (the northbound edge comes from the south stub).
    """
    offsets = {"N": (0.0, arm), "S": (0.0, -arm), "E": (arm, 0.0), "W": (-arm, 0.0)}
    # Travel direction of the edge arriving from each stub.
    inbound_names = {"S": "in_n", "N": "in_s", "W": "in_e", "E": "in_w"}
    outbound_names = {"N": "out_n", "S": "out_s", "E": "out_e", "W": "out_w"}

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<net>",
        '  <location netOffset="0.0,0.0" convBoundary="-100.0,-100.0,100.0,100.0" '
        'origBoundary="-1.0,-1.0,1.0,1.0" projParameter="!"/>',
    ]
    type_attr = f' type="{edge_type}"' if edge_type else ""
    for leg in legs:
        lines.append(f'  <edge id="{inbound_names[leg]}" from="{leg}" to="C"{type_attr}/>')
        lines.append(f'  <edge id="{outbound_names[leg]}" from="C" to="{leg}"{type_attr}/>')
    for e in extra_edges:
        lines.append(f"  {e}")
    cx, cy = center
    lines.append(f'  <junction id="C" type="priority" x="{cx}" y="{cy}"/>')
    for leg in legs:
        ox, oy = offsets[leg]
        lines.append(f'  <junction id="{leg}" type="dead_end" x="{cx + ox}" y="{cy + oy}"/>')
    lines.append("</net>")
    return "\n".join(lines) + "\n"


def random_net_xml(rng: random.Random, n_junctions: int, span_x=120.0, span_y=90.0):
    """Scatter junctions at random; a couple of edges keep the model realistic.

    Identity projection, so query lon/lat maps straight onto x/y; spans stay
    inside world bounds to keep queries valid geographic coordinates.
    """
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<net>",
        f'  <location netOffset="0.0,0.0" convBoundary="0.0,0.0,{span_x},{span_y}" '
        'origBoundary="-1.0,-1.0,1.0,1.0" projParameter="!"/>',
    ]
    coords = {}
    for i in range(n_junctions):
        coords[f"j{i}"] = (rng.uniform(0, span_x), rng.uniform(0, span_y))
    for i in range(1, n_junctions):
        lines.append(f'  <edge id="e{i}" from="j{i - 1}" to="j{i}" type="highway.residential"/>')
    for jid, (x, y) in coords.items():
        lines.append(f'  <junction id="{jid}" type="priority" x="{x!r}" y="{y!r}"/>')
    lines.append("</net>")
    return "\n".join(lines) + "\n", coords


def synthesize_vehroutes(flows):
    """Vehroute XML with exactly ``count`` vehicles per flow (offline oracle)."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<routes>"]
    for flow in flows:
        for n in range(flow.count):
            depart = flow.begin + n * (flow.end - flow.begin) / max(flow.count, 1)
            lines.append(
                f'    <vehicle id="{flow.flow_id}.{n}" depart="{depart:.2f}">'
                f'<route edges="{flow.from_edge} {flow.to_edge}"/></vehicle>'
            )
    lines.append("</routes>")
    return "\n".join(lines)


@pytest.fixture
def fourway_net():
    return parse_network(fixture_text("fourway.net.xml"))


@pytest.fixture
def fourway_csv_text():
    return fixture_text("fourway_counts.csv")
