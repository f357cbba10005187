"""Bit-vector encodings: gadget exhaustion, modular bounds, end-to-end roots."""

import itertools
import random

import pytest

from ipsforge import _kernels
from ipsforge.circuit import MUL, CircuitBuilder
from ipsforge.encode_bits import (BFALSE, BTRUE, BitVec, CnfFormula,
                                  addition_gadget, arit, band, beval, bnot,
                                  bor, bvar, bxor, bits_equation_encoding,
                                  cnf_add, cnf_encode_circuit_bits,
                                  cnf_encode_equation_bits, cnf_mult,
                                  ecnf_encode_equation_bits, modular_gadget,
                                  width_for, _modular)
from ipsforge.errors import (BudgetExceeded, FieldMismatch, FormatError,
                             Unsupported, WidthMismatch)
from ipsforge.ffield import ff_new
from helpers import random_circuit

F5 = ff_new(5)
F7 = ff_new(7)
F13 = ff_new(13)


def free_vec(prefix, k):
    return BitVec(tuple(f"{prefix}{i}" for i in range(k)))


def all_models(cnf):
    return _kernels.sat_all(cnf.n_vars, cnf.clauses, 500_000)


def root_set(c):
    names = c.inputs()
    out = set()
    for vals in itertools.product(range(c.q), repeat=len(names)):
        pt = dict(zip(names, vals))
        if c.evaluate(pt).value == 0:
            out.add(vals)
    return out


# ---------------------------------------------------------------------------
# width and arithmetization


def test_width_for_values():
    assert [width_for(q) for q in (3, 5, 7, 11, 13)] == [2, 3, 3, 4, 4]
    for bad in (2, 4, 9, 1):
        with pytest.raises(Unsupported):
            width_for(bad)
    with pytest.raises(Unsupported):
        width_for(2 ** 89 - 1)  # prime, but over the 64-bit budget


def test_arit_and_is_a_product():
    c = arit(band(bvar("x"), bvar("y")), F7)
    root = c.nodes[c.output]
    assert root.kind == MUL and len(root.children) == 2
    for a, b in itertools.product((0, 1), repeat=2):
        assert c.evaluate({"x": a, "y": b}).value == a * b


def test_arit_xor_at_one_one():
    c = arit(bxor(bvar("x"), bvar("y")), F7)
    assert c.evaluate({"x": 1, "y": 1}).value == 0


def random_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.1:
            return BTRUE if rng.getrandbits(1) else BFALSE
        return bvar(rng.choice(names))
    tag = rng.choice(("and", "or", "xor", "not"))
    if tag == "not":
        return bnot(random_formula(rng, names, depth - 1))
    lhs = random_formula(rng, names, depth - 1)
    rhs = random_formula(rng, names, depth - 1)
    return {"and": band, "or": bor, "xor": bxor}[tag](lhs, rhs)


def test_arit_matches_truth_tables():
    rng = random.Random(0xB1)
    names = ["x1", "x2", "x3", "x4"]
    for field in (ff_new(2), F5):
        for _ in range(25):
            f = random_formula(rng, names, 3)
            c = arit(f, field)
            for vals in itertools.product((0, 1), repeat=4):
                pt = dict(zip(names, vals))
                assert c.evaluate(pt).value == beval(f, pt)


# ---------------------------------------------------------------------------
# addition gadget


def test_addition_constant_examples():
    cnf, out = addition_gadget(BitVec.const(3, 2), BitVec.const(1, 2))
    assert out.const_value() == 4 and not cnf.clauses
    cnf, out = addition_gadget(BitVec.const(0, 2), BitVec.const(0, 2))
    assert out.const_value() == 0


def test_addition_exhaustive_k3():
    x, y = free_vec("x", 3), free_vec("y", 3)
    cnf, out = addition_gadget(x, y)
    models = all_models(cnf)
    assert len(models) == 64  # one satisfying extension per input pair
    for m in models:
        assert x.value_in(cnf, m) + y.value_in(cnf, m) == out.value_in(cnf, m)


def test_addition_without_overflow():
    x, y = free_vec("x", 3), free_vec("y", 3)
    cnf, out = addition_gadget(x, y, with_overflow=False)
    assert out.width == 3
    models = all_models(cnf)
    assert len(models) == 64
    for m in models:
        want = (x.value_in(cnf, m) + y.value_in(cnf, m)) % 8
        assert out.value_in(cnf, m) == want


def test_addition_width_mismatch():
    with pytest.raises(WidthMismatch):
        addition_gadget(free_vec("x", 3), free_vec("y", 2))


# ---------------------------------------------------------------------------
# modular gadget


def test_modular_specific_values():
    q, k = 5, 3
    x = free_vec("x", k)
    cnf, out = modular_gadget(x, "xp", 3, q)
    for m in all_models(cnf):
        xv = x.value_in(cnf, m)
        xp = m[cnf.index_of("xp") - 1]
        ov = out.value_in(cnf, m)
        if xv == 4 and xp == 0:
            assert ov == 4
        if xv == 0 and xp == 0:
            assert ov == 0


def test_modular_exhaustive_and_bounds():
    for q in (5, 7):
        k = width_for(q)
        for t in (k, k + 2):
            x = free_vec("x", k)
            cnf = CnfFormula()
            for b in (*x.bits, "xp"):
                cnf.var(b)
            out, u = _modular(cnf, x, "xp", t, q, "mod")
            models = all_models(cnf)
            assert len(models) == 1 << (k + 1)
            for m in models:
                xv = x.value_in(cnf, m)
                xp = m[cnf.index_of("xp") - 1]
                ov = out.value_in(cnf, m)
                assert ov % q == (xv + (1 << t) * xp) % q
                assert ov < (1 << k)
                assert u.value_in(cnf, m) < 2 * q


def test_modular_rejects_low_bit_position():
    with pytest.raises(FormatError):
        modular_gadget(free_vec("x", 3), "xp", 2, 5)
    with pytest.raises(WidthMismatch):
        modular_gadget(free_vec("x", 4), "xp", 4, 5)


# ---------------------------------------------------------------------------
# field addition / multiplication formulas


def test_cnf_add_exhaustive():
    for q in (5, 13):
        k = width_for(q)
        x, y, z = free_vec("x", k), free_vec("y", k), free_vec("z", k)
        cnf = cnf_add(x, y, z, q)
        models = all_models(cnf)
        assert len(models) == 1 << (2 * k)
        for m in models:
            xv, yv = x.value_in(cnf, m), y.value_in(cnf, m)
            zv = z.value_in(cnf, m)
            assert zv % q == (xv + yv) % q
            assert zv < (1 << k)


def test_cnf_add_four_plus_three():
    q, k = 5, 3
    x, y, z = free_vec("x", k), free_vec("y", k), free_vec("z", k)
    cnf = cnf_add(x, y, z, q)
    hits = [z.value_in(cnf, m) for m in all_models(cnf)
            if x.value_in(cnf, m) == 4 and y.value_in(cnf, m) == 3]
    assert len(hits) == 1 and hits[0] % q == 2


def test_cnf_mult_exhaustive():
    for q in (5, 7):
        k = width_for(q)
        x, y, z = free_vec("x", k), free_vec("y", k), free_vec("z", k)
        cnf = cnf_mult(x, y, z, q)
        models = all_models(cnf)
        assert len(models) == 1 << (2 * k)
        for m in models:
            xv, yv = x.value_in(cnf, m), y.value_in(cnf, m)
            zv = z.value_in(cnf, m)
            assert zv % q == (xv * yv) % q
            assert zv < (1 << k)
            if xv == 4 and yv == 3 and q == 5:
                assert zv % q == 2
            if xv == 0:
                assert zv == 0


def test_cnf_mult_width_guard():
    with pytest.raises(WidthMismatch):
        cnf_mult(free_vec("x", 3), free_vec("y", 3), free_vec("z", 2), 5)


# ---------------------------------------------------------------------------
# whole circuits


def test_tautological_equation_has_all_models():
    b = CircuitBuilder(F5)
    s = b.add((b.input("x"), 1), (b.input("y"), 1))
    c = b.build(b.add((s, 1), (s, 4)))
    f = cnf_encode_equation_bits(c)
    assert len(all_models(f)) == 25


def test_constant_equations():
    b = CircuitBuilder(F5)
    f = cnf_encode_equation_bits(b.build(b.const(1)))
    assert _kernels.sat_first(f.n_vars, f.clauses, []) is None
    b = CircuitBuilder(F5)
    f = cnf_encode_equation_bits(b.build(b.const(0)))
    assert _kernels.sat_first(f.n_vars, f.clauses, []) is not None


def test_inverse_pairs_projection():
    b = CircuitBuilder(F5)
    c = b.build(b.add((b.mul((b.input("x"), 1), (b.input("y"), 1)), 1),
                      (b.const(4), 1)))
    enc = bits_equation_encoding(c)
    models = all_models(enc.cnf)
    proj = {(enc.vec["x"].value_in(enc.cnf, m),
             enc.vec["y"].value_in(enc.cnf, m)) for m in models}
    assert len(models) == 4
    assert proj == {(1, 1), (2, 3), (3, 2), (4, 4)}


def test_circuit_encoding_is_total_over_inputs():
    rng = random.Random(0xB7)
    for _ in range(4):
        c = random_circuit(rng, F5, n_vars=2, n_internal=2)
        enc = bits_equation_encoding(c)
        f = cnf_encode_circuit_bits(c)
        assert len(all_models(f)) == 5 ** len(c.inputs())


def test_end_to_end_root_sets():
    rng = random.Random(0xB8)
    for q, n_circuits in ((5, 6), (7, 4), (13, 2)):
        field = ff_new(q)
        for _ in range(n_circuits):
            c = random_circuit(rng, field, n_vars=2, n_internal=2)
            enc = bits_equation_encoding(c)
            models = all_models(enc.cnf)
            got = {tuple(enc.vec[v].value_in(enc.cnf, m) for v in c.inputs())
                   for m in models}
            roots = root_set(c)
            assert len(models) == len(roots)
            assert got == roots


def test_chain_keys_for_wide_gate():
    b = CircuitBuilder(F5)
    kids = [(b.input(n), 1) for n in ("a", "bb", "cc")]
    c = b.build(b.add(*kids))
    enc = bits_equation_encoding(c)
    assert len(enc.node_keys) == 1
    key = enc.node_keys[0]
    assert enc.chain_keys == [f"{key}v1"]
    pt = {"a": 3, "bb": 4, "cc": 1}
    assert enc.key_circuit[f"{key}v1"].evaluate(pt).value == 2
    assert enc.key_circuit[key].evaluate(pt).value == 3


# ---------------------------------------------------------------------------
# extended encoding


def ecnf_bits_witness(c, model):
    enc = bits_equation_encoding(c)
    asn = {}
    for name in enc.cnf.names:
        asn[name] = model[enc.cnf.index_of(name) - 1]
    for key, v in enc.vec.items():
        value = v.value_in(enc.cnf, model) % enc.q
        if key in enc.inputs:
            asn[key] = value
        else:
            asn[f"val_{key}"] = value
    return asn


def test_ecnf_bits_witness_accepted():
    b = CircuitBuilder(F5)
    c = b.build(b.add((b.mul((b.input("x"), 1), (b.input("y"), 1)), 1),
                      (b.const(4), 1)))
    enc = bits_equation_encoding(c)
    sys = ecnf_encode_equation_bits(c)
    models = all_models(enc.cnf)
    assert models
    for m in models:
        asn = ecnf_bits_witness(c, m)
        assert sys.satisfied_by(asn)
    # breaking a value tie must falsify some equation
    asn = ecnf_bits_witness(c, models[0])
    key = enc.node_keys[0]
    asn[f"val_{key}"] = (asn[f"val_{key}"] + 1) % 5
    assert not sys.satisfied_by(asn)


def test_ecnf_bits_has_boolean_axioms():
    b = CircuitBuilder(F5)
    c = b.build(b.add((b.input("x"), 1), (b.input("y"), 1)))
    enc = bits_equation_encoding(c)
    sys = ecnf_encode_equation_bits(c)
    models = all_models(enc.cnf)
    asn = ecnf_bits_witness(c, models[0])
    name = enc.vec["x"].bits[0]
    asn[name] = 2  # non-Boolean bit value over F5
    assert not sys.satisfied_by(asn)


# ---------------------------------------------------------------------------
# guards


def test_budget_exceeded():
    b = CircuitBuilder(F13)
    c = b.build(b.mul((b.input("x"), 1), (b.input("y"), 1)))
    with pytest.raises(BudgetExceeded):
        cnf_encode_equation_bits(c, clause_budget=50)


def test_field_mismatch():
    b = CircuitBuilder(F5)
    c = b.build(b.input("x"))
    with pytest.raises(FieldMismatch):
        cnf_encode_circuit_bits(c, q=7)


def test_reserved_input_names():
    for name in ("n1", "n2v1", "val_x", "b_x_0", "carry_a_1",
                 "s_e_0_0", "u_m_1", "v_e_1_0", "m_x_0", "w_x_0"):
        b = CircuitBuilder(F5)
        c = b.build(b.input(name))
        with pytest.raises(FormatError):
            cnf_encode_circuit_bits(c)
    for name in ("nx", "w1", "x_0"):
        b = CircuitBuilder(F5)
        c = b.build(b.input(name))
        cnf_encode_circuit_bits(c)


def test_bitvec_const_range():
    with pytest.raises(WidthMismatch):
        BitVec.const(8, 3)
    assert BitVec.const(5, 3).bits == (1, 0, 1)
