"""Unary one-hot CNF encodings and their algebraized/substituted forms."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipsforge import _kernels
from ipsforge.circuit import MUL, CircuitBuilder
from ipsforge.encode_fixed import (CnfFormula, EquationSystem, algebraize_cnf,
                                   cnf_encode_circuit, cnf_encode_equation,
                                   dimacs_text, ecnf_encode_equation,
                                   parse_dimacs, plain_encoding,
                                   scnf_encode_equation)
from ipsforge.errors import FieldTooLargeForUnary, FormatError
from ipsforge.ffield import ff_new
from helpers import random_circuit

F2 = ff_new(2)
F3 = ff_new(3)
F5 = ff_new(5)


def single_var(field, name="x"):
    b = CircuitBuilder(field)
    return b.build(b.input(name))


def all_points(field, names):
    for vals in itertools.product(range(field.q), repeat=len(names)):
        yield dict(zip(names, vals))


def decoded_values(enc, model):
    """Gate values read off a model; asserts every gate is one-hot."""
    vals = {}
    for key in list(enc.inputs) + enc.node_keys + enc.chain_keys:
        ones = [j for j in range(enc.q)
                if model[enc.cnf.index_of(f"u_{key}_{j}") - 1] == 1]
        assert len(ones) == 1
        vals[key] = ones[0]
    return vals


def cnf_satisfied(f, vals):
    return all(any(vals[abs(l) - 1] == (1 if l > 0 else 0) for l in cl)
               for cl in f.clauses)


# ---------------------------------------------------------------------------
# algebraization of clause lists


def test_algebraize_clause_shape_and_value():
    f = CnfFormula()
    x, y = f.var("x"), f.var("y")
    f.add_clause([x, -y])
    sys = algebraize_cnf(f, F3)
    assert len(sys) == 1
    eq = sys.equations[0]
    root = eq.nodes[eq.output]
    assert root.kind == MUL and len(root.children) == 2
    # (1 - x) * y, left as a product
    p = eq.expand()
    xs = p.extended(("x", "y"))
    for pt in all_points(F3, ("x", "y")):
        want = (1 - pt["x"]) * pt["y"] % 3
        assert eq.evaluate(pt).value == want
    assert xs.degree() == 2


def test_algebraize_unit_and_contradiction():
    f = CnfFormula()
    x = f.var("x")
    f.add_clause([x])
    f.add_clause([-x])
    sys = algebraize_cnf(f, F2)
    assert len(sys) == 2
    assert not any(sys.satisfied_by({"x": v}) for v in (0, 1))
    f.add_contradiction()
    sys = algebraize_cnf(f, F2)
    assert sys.equations[2].evaluate({}).value == 1  # unsatisfiable equation


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3),
       st.lists(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]),
                         min_size=1, max_size=3), max_size=4))
def test_algebraize_matches_clauses_on_bits(q, clause_lits):
    field = ff_new(q)
    f = CnfFormula()
    for i in range(3):
        f.var(f"b{i + 1}")
    for cl in clause_lits:
        f.add_clause(cl)
    sys = algebraize_cnf(f, field)
    for bits in itertools.product((0, 1), repeat=3):
        point = {f"b{i + 1}": bits[i] for i in range(3)}
        assert sys.satisfied_by(point) == cnf_satisfied(f, list(bits))


# ---------------------------------------------------------------------------
# plain one-hot encoding


def test_equation_on_bare_input_forces_zero():
    f = cnf_encode_equation(single_var(F2))
    assert f.names == ["u_x_0", "u_x_1"]
    assert _kernels.sat_all(f.n_vars, f.clauses, 10) == [[1, 0]]


def test_unsatisfiable_polynomial_gives_unsat_cnf():
    b = CircuitBuilder(F2)
    x = b.input("x")
    c = b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, 1), (b.const(1), 1)))
    f = cnf_encode_equation(c)
    assert _kernels.sat_first(f.n_vars, f.clauses, []) is None


def test_root_count_xy_equals_one():
    b = CircuitBuilder(F3)
    c = b.build(b.add((b.mul((b.input("x"), 1), (b.input("y"), 1)), 1),
                      (b.const(2), 1)))
    f = cnf_encode_equation(c)
    assert len(_kernels.sat_all(f.n_vars, f.clauses, 1000)) == 2


def test_evaluation_bijection_small_circuits():
    rng = random.Random(0xE1)
    for q in (2, 3):
        field = ff_new(q)
        for _ in range(12):
            c = random_circuit(rng, field, n_vars=3, n_internal=4)
            enc = plain_encoding(c)
            models = _kernels.sat_all(enc.cnf.n_vars, enc.cnf.clauses, 200_000)
            points = set()
            for m in models:
                vals = decoded_values(enc, m)
                point = {v: vals[v] for v in enc.inputs}
                points.add(tuple(sorted(point.items())))
                for key, cu in enc.key_circuit.items():
                    assert vals[key] == cu.evaluate(point).value
            assert len(models) == q ** len(enc.inputs)
            assert len(points) == len(models)


def test_equation_models_match_roots():
    rng = random.Random(0xE2)
    for q in (2, 3):
        field = ff_new(q)
        for _ in range(12):
            c = random_circuit(rng, field, n_vars=2, n_internal=4)
            f = cnf_encode_equation(c)
            enc = plain_encoding(c)
            roots = {tuple(sorted(pt.items()))
                     for pt in all_points(field, enc.inputs)
                     if c.evaluate(pt).value == 0}
            models = _kernels.sat_all(f.n_vars, f.clauses, 200_000)
            got = set()
            for m in models:
                vals = decoded_values(enc, m)
                got.add(tuple(sorted((v, vals[v]) for v in enc.inputs)))
            assert len(models) == len(roots)
            assert got == roots


def test_chain_keys_and_prefixes():
    b = CircuitBuilder(F3)
    kids = [(b.input(n), 1) for n in ("a", "b", "c", "d")]
    c = b.build(b.add(*kids))
    enc = plain_encoding(c)
    key = enc.node_keys[0]
    assert enc.chain_keys == [f"{key}v1", f"{key}v2"]
    pt = {"a": 1, "b": 2, "c": 2, "d": 1}
    assert enc.key_circuit[f"{key}v1"].evaluate(pt).value == 0  # a+b
    assert enc.key_circuit[f"{key}v2"].evaluate(pt).value == 2  # a+b+c
    assert enc.key_circuit[key].evaluate(pt).value == 0


def test_scalar_operands_stay_constant():
    b = CircuitBuilder(F3)
    c = b.build(b.add((b.input("x"), 1), (b.const(2), 1)))
    enc = plain_encoding(c)
    owners = {enc.bit_owner(n)[0] for n in enc.cnf.names}
    assert owners == {"x", enc.node_keys[0]}


def test_constant_circuit_equations():
    b = CircuitBuilder(F3)
    f = cnf_encode_equation(b.build(b.const(0)))
    assert f.clauses == [] and f.n_vars == 0
    b = CircuitBuilder(F3)
    f = cnf_encode_equation(b.build(b.const(2)))
    assert [] in f.clauses


def test_field_cap_enforced():
    with pytest.raises(FieldTooLargeForUnary):
        cnf_encode_circuit(single_var(ff_new(17)))


def test_reserved_input_names_rejected():
    for name in ("u_a_0", "n3", "n2v1", "val_x"):
        with pytest.raises(FormatError):
            cnf_encode_circuit(single_var(F3, name))
    cnf_encode_circuit(single_var(F3, "nx"))  # not reserved


def test_clause_counts_documented():
    # one binary gate: inputs cost 1 + q(q-1)/2 clauses each, the gate's
    # truth table costs q^3 (one implication + q-1 blocking per entry)
    for q in (2, 3, 5):
        field = ff_new(q)
        b = CircuitBuilder(field)
        c = b.build(b.add((b.input("x"), 1), (b.input("y"), 1)))
        f = cnf_encode_circuit(c)
        assert len(f.clauses) == 2 * (1 + q * (q - 1) // 2) + q ** 3
        assert f.n_vars == 3 * q


# ---------------------------------------------------------------------------
# extended encoding


def ecnf_witness(c, point):
    """Assignment for every ecnf variable induced by an input point."""
    enc = plain_encoding(c)
    asn = dict(point)
    for key, cu in enc.key_circuit.items():
        v = cu.evaluate(point).value
        for j in range(enc.q):
            asn[f"u_{key}_{j}"] = 1 if j == v else 0
        if key not in enc.inputs:
            asn[f"val_{key}"] = v
    return asn


def test_ecnf_accepts_exactly_roots_via_witness():
    b = CircuitBuilder(F3)
    c = b.build(b.add((b.mul((b.input("x"), 1), (b.input("y"), 1)), 1),
                      (b.const(2), 1)))
    sys = ecnf_encode_equation(c)
    hits = 0
    for pt in all_points(F3, ("x", "y")):
        ok = sys.satisfied_by(ecnf_witness(c, pt))
        assert ok == (c.evaluate(pt).value == 0)
        hits += ok
    assert hits == 2
    # breaking one gate-value tie must falsify the system
    good = ecnf_witness(c, {"x": 1, "y": 1})
    key = plain_encoding(c).node_keys[0]
    good[f"val_{key}"] = (good[f"val_{key}"] + 1) % 3
    assert not sys.satisfied_by(good)


def test_ecnf_unsat_preserved_exhaustively():
    b = CircuitBuilder(F2)
    x = b.input("x")
    c = b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, 1), (b.const(1), 1)))
    sys = ecnf_encode_equation(c)
    names = sys.all_vars()
    assert len(names) <= 12
    for pt in all_points(F2, names):
        assert not sys.satisfied_by(pt)


def test_ecnf_has_boolean_axioms():
    c = single_var(F3)
    sys = ecnf_encode_equation(c)
    # a non-0/1 bit value must violate some equation even when consistent
    asn = ecnf_witness(c, {"x": 0})
    asn["u_x_0"] = 2
    assert not sys.satisfied_by(asn)


# ---------------------------------------------------------------------------
# substituted encoding


def test_scnf_single_variable():
    sys = scnf_encode_equation(single_var(F2))
    assert set(sys.all_vars()) == {"x"}
    assert sys.satisfied_by({"x": 0})
    assert not sys.satisfied_by({"x": 1})


def test_scnf_matches_roots_pointwise():
    rng = random.Random(0xE5)
    for q in (2, 3):
        field = ff_new(q)
        for _ in range(8):
            c = random_circuit(rng, field, n_vars=2, n_internal=3)
            sys = scnf_encode_equation(c)
            assert set(sys.all_vars()) <= set(c.inputs())
            for pt in all_points(field, c.inputs()):
                assert sys.satisfied_by(pt) == (c.evaluate(pt).value == 0)


def test_scnf_includes_field_axioms():
    c = single_var(F3)
    sys = scnf_encode_equation(c)
    axiom = sys.equations[-1]
    for v in range(3):
        assert axiom.evaluate({"x": v}).value == 0
    # x^3 - x as written: a cube against a scaled leaf
    assert axiom.syntactic_degree() == 3


def test_scnf_unsat_polynomial_has_no_roots():
    b = CircuitBuilder(F2)
    x = b.input("x")
    c = b.build(b.add((b.mul((x, 1), (x, 1)), 1), (x, 1), (b.const(1), 1)))
    sys = scnf_encode_equation(c)
    assert not any(sys.satisfied_by({"x": v}) for v in (0, 1))


# ---------------------------------------------------------------------------
# DIMACS and equation-system text


def test_dimacs_bytes_pinned():
    f = CnfFormula()
    a, b_ = f.var("a"), f.var("b")
    f.add_clause([a, -b_])
    assert dimacs_text(f) == ("c var 1 = a\n"
                              "c var 2 = b\n"
                              "p cnf 2 1\n"
                              "1 -2 0\n")


def test_dimacs_roundtrip_real_encoding():
    b = CircuitBuilder(F3)
    c = b.build(b.mul((b.input("x"), 1), (b.input("y"), 2)))
    f = cnf_encode_equation(c)
    g = parse_dimacs(dimacs_text(f))
    assert g.names == f.names
    assert g.clauses == f.clauses


def test_dimacs_parse_unnamed_and_contradiction():
    f = parse_dimacs("p cnf 2 2\n1 -2 0\n0\n")
    assert f.names == ["v1", "v2"]
    assert f.clauses == [[1, -2], []]


def test_dimacs_parse_errors():
    with pytest.raises(FormatError):
        parse_dimacs("1 -2 0\np cnf 2 1\n")
    with pytest.raises(FormatError):
        parse_dimacs("p dnf 2 1\n1 -2 0\n")
    with pytest.raises(FormatError):
        parse_dimacs("p cnf 2 1\n1 -2\n")
    with pytest.raises(FormatError):
        parse_dimacs("p cnf 2 3\n1 -2 0\n")
    with pytest.raises(FormatError):
        parse_dimacs("")


def test_equation_system_text_roundtrip():
    b = CircuitBuilder(F3)
    c = b.build(b.add((b.mul((b.input("x"), 1), (b.input("y"), 1)), 1),
                      (b.const(2), 1)))
    sys = ecnf_encode_equation(c)
    back = EquationSystem.parse(sys.to_text())
    assert len(back) == len(sys)
    assert back.to_text() == sys.to_text()


def test_equation_system_parse_errors():
    with pytest.raises(FormatError):
        EquationSystem.parse("")
    with pytest.raises(FormatError):
        EquationSystem.parse("eqsystem q=3 neqs=1\n")
    good = EquationSystem(F3, [single_var(F3)]).to_text()
    with pytest.raises(FormatError):
        EquationSystem.parse(good.replace("neqs=1", "neqs=2"))


def test_equation_system_field_guard():
    sys = EquationSystem(F3)
    with pytest.raises(FormatError):
        sys.append(single_var(F2))


def test_cnf_formula_guards():
    f = CnfFormula()
    x = f.var("x")
    assert f.var("x") == x  # registration is idempotent
    with pytest.raises(FormatError):
        f.add_clause([])
    with pytest.raises(FormatError):
        f.add_clause([0])
    with pytest.raises(FormatError):
        f.add_clause([2])
    with pytest.raises(FormatError):
        f.index_of("missing")
    f.add_contradiction()
    assert f.clauses == [[]]
