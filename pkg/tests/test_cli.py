import json

import pytest

from tropgeom.cli import main
from tropgeom.complexes import ConeComplex
from tropgeom.curves import DualGraph
from tropgeom.exactgeom import LinearMap, RationalCone, cone_from_generators


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_figure1_exit_zero(capsys):
    code, out = run(capsys, "figure1")
    assert code == 0
    data = json.loads(out)
    assert data["all_passed"] is True


def test_enumerate_graphs_boundary_case(capsys):
    code, out = run(capsys, "enumerate-graphs", "0", "3")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 1
    assert data[0]["edges"] == []


def test_enumerate_graphs_dot(capsys):
    code, out = run(capsys, "enumerate-graphs", "1", "1", "--format", "dot")
    assert code == 0
    assert out.count("graph ") == 2
    assert "style=dashed" in out


def test_moduli_complex_json_roundtrip(capsys):
    code, out = run(capsys, "moduli-complex", "1", "1")
    assert code == 0
    data = json.loads(out)
    back = ConeComplex.from_json(data)
    assert back.to_json() == {k: data[k] for k in ("cones", "faces", "auts")}
    for cid, graph in data["graphs"].items():
        DualGraph.from_json(graph)


def test_enumerate_maps(capsys):
    code, out = run(capsys, "enumerate-maps", "1", "2", "2,-2")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 5
    for t in data:
        assert "slopes" in t and "leg_slopes" in t


def test_image_and_subdivide(capsys):
    code, out = run(capsys, "image", "1", "2", "2,-2")
    assert code == 0
    fam = json.loads(out)
    assert fam["pieces"]
    for piece in fam["pieces"]:
        RationalCone.from_json(piece["cone"])
    code, out = run(capsys, "subdivide", "1", "2", "2,-2")
    assert code == 0
    sub = json.loads(out)
    refined = ConeComplex.from_json(sub["refined"])
    assert refined.cones


def test_verify_and_product_check_pass(capsys):
    code, out = run(capsys, "verify", "1", "2", "2,-2")
    assert code == 0
    code, out = run(capsys, "product-check", "1", "2", "2,-2", "1,-1")
    assert code == 0
    data = json.loads(out)
    assert data["all_passed"] is True


def test_dr_support_json(capsys):
    code, out = run(capsys, "dr-support", "1", "2", "2,-2")
    assert code == 0
    data = json.loads(out)
    assert data["strata"]
    for s in data["strata"]:
        assert s["codim"] >= 0


def test_malformed_inputs_exit_two(capsys):
    assert main(["verify", "1", "2", "nonsense"]) == 2
    assert main(["verify", "1", "2", "1,1"]) == 2
    assert main(["enumerate-maps", "1", "2", "1,-1,0"]) == 2


def test_byte_identical_outputs(capsys):
    _, first = run(capsys, "verify", "1", "1", "2,-2", "--seed", "7")
    _, second = run(capsys, "verify", "1", "1", "2,-2", "--seed", "7")
    assert first == second
    _, a = run(capsys, "enumerate-maps", "1", "2", "2,-2", "1,-1")
    _, b = run(capsys, "enumerate-maps", "1", "2", "2,-2", "1,-1")
    assert a == b


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code = main(["figure1", "--out", str(target)])
    assert code == 0
    data = json.loads(target.read_text())
    assert data["all_passed"] is True


def test_map_json_roundtrip_through_linear_maps():
    m = LinearMap(((1, 0, 1), (0, 2, 0)), 3, 2)
    assert LinearMap.from_json(m.to_json()) == m
    c = cone_from_generators([(1, 0), (1, 2)])
    assert RationalCone.from_json(c.to_json()) == c


def test_map_type_json_roundtrip():
    from tropgeom.tropmaps import ContactData, RubberMapType, enumerate_rubber_types

    for t in enumerate_rubber_types(ContactData(1, ((2, -2),))):
        back = RubberMapType.from_json(t.to_json(), 1)
        assert back == t


def test_subset_json_roundtrip():
    from conftest import moduli_cached
    from tropgeom.complexes import ConicalSubset
    from tropgeom.pipeline import image_family
    from tropgeom.tropmaps import ContactData, build_map_complex, enumerate_rubber_types

    base = moduli_cached(1, 2)
    mx = build_map_complex(enumerate_rubber_types(ContactData(1, ((2, -2),))), base)
    fam = image_family(mx)
    back = ConicalSubset.from_json(fam.to_json(), base.complex)
    assert back.pieces == fam.pieces
