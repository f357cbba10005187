"""Circuits over prime fields, CNF encodings, and algebraic proof checking."""

from ipsforge._kernels import IMPL as kernel_impl
from ipsforge.circuit import (Circuit, CircuitBuilder, Slp, fold_constants,
                              normalize_depth_form)
from ipsforge.coeffx import coeff_extract_bounded, coeff_extract_general
from ipsforge.encode_fixed import (CnfFormula, EquationSystem, algebraize_cnf,
                                   cnf_encode_circuit, cnf_encode_equation,
                                   cnf_encode_system, cnf_encode_system_parts,
                                   ecnf_encode_equation, emit_dimacs,
                                   parse_dimacs, scnf_encode_equation)
from ipsforge.encode_bits import (BitVec, addition_gadget, arit,
                                  bits_circuit_encoding, cnf_add,
                                  cnf_encode_circuit_bits,
                                  cnf_encode_equation_bits, cnf_mult,
                                  ecnf_encode_circuit_bits,
                                  ecnf_encode_equation_bits,
                                  ecnf_from_encoding, modular_gadget,
                                  width_for)
from ipsforge.errors import *  # noqa: F401,F403
from ipsforge.ffield import FieldElem, FiniteField, ff_new
from ipsforge.generators import (FormulaFamilyParams, degree_schedule,
                                 gen_aub, gen_diag_phi, gen_ips_refute,
                                 gen_irankp, gen_phi_star, gen_rankp,
                                 gen_trankp, gen_vnp_eq_vac0)
from ipsforge.poly import Monomial, SparsePoly
from ipsforge.universal import build_universal, embed

__version__ = "0.1.0"
