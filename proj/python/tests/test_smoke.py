import json
import math
import pathlib

import pytest

import goalc

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"

TWO = json.dumps({
    "root": "G",
    "nodes": [
        {"id": "G", "decomposition": "or", "children": ["A", "B"]},
        {"id": "A", "kind": "leaf"},
        {"id": "B", "kind": "leaf"},
    ],
})


def unit(model):
    return {name: (0.0 if name.startswith("w_") else 1.0) for name in model.parameters}


def test_compile_bsn():
    model = goalc.load_model(str(DATA / "bsn.json"))
    forms = goalc.compile(model)
    assert {"G1", "G2", "G3", "G4"} <= forms.keys()
    rel, cost = goalc.formulas(model, "G1")
    assert str(rel) == forms["G1"]["reliability"]
    assert rel.evaluate(unit(model) | {"OPT_T1_X": 0.0}) == 1.0
    assert cost.size_bytes < 5 * 22 * 1024


def test_formula_round_trip_and_oracle():
    model = goalc.parse_model(TWO)
    rel, cost = goalc.formulas(model)
    assert goalc.Formula(str(rel)) == rel
    b = {"r_A": 0.9, "r_B": 0.8, "f_A": 1.0, "f_B": 1.0, "w_A": 2.0, "w_B": 3.0}
    assert rel.evaluate(b) == pytest.approx(0.9 + 0.1 * 0.8)
    assert goalc.oracle_reliability(model, b) == pytest.approx(rel.evaluate(b), abs=1e-12)
    assert goalc.oracle_cost(model, b) == pytest.approx(cost.evaluate(b), abs=1e-12)


def test_errors():
    with pytest.raises(goalc.IoError):
        goalc.load_model("/nonexistent.json")
    with pytest.raises(goalc.DomainError):
        goalc.parse_model('{"root": "X", "nodes": []}')
    rel, _ = goalc.formulas(goalc.parse_model(TWO))
    with pytest.raises(goalc.DomainError):
        rel.evaluate({"r_A": 1.0})
    assert issubclass(goalc.IoError, goalc.Error)


def test_emit_prism():
    model = goalc.load_model(str(DATA / "bsn.json"))
    pm, pctl = goalc.emit_prism(model, "T1")
    assert pm.count("const int CTX_") == 31
    assert pm.startswith("mdp")
    assert "Pmax=?" in pctl


def test_simulate_deterministic_and_compare():
    model = goalc.load_model(str(DATA / "bsn.json"))
    args = (model, str(DATA / "policy.json"), str(DATA / "scenarios" / "1a.json"))
    tamed = goalc.simulate(*args)
    assert tamed == goalc.simulate(*args)
    assert tamed.splitlines()[0].startswith("t,reliability,cost")
    same = goalc.compare(tamed, tamed)
    assert same["e_r"] == 1.0 and same["e_c"] == 1.0
    untamed = goalc.simulate(*args, mode="untamed")
    m = goalc.compare(tamed, untamed)
    assert m["e_r"] > 1.0 and m["e_c"] > 1.0
    assert not math.isnan(m["d_tamed_cost"])
