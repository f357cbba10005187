"""Pure-Python compute kernels.

This module and the compiled `_core` extension expose the same functions
with identical semantics; `ipsforge._kernels` picks one at import time.
Keep the surface small and the data plain (dicts, lists, tuples of ints)
so both implementations stay interchangeable.

Budget overruns raise MemoryError; package callers translate that into
the typed budget exceptions.
"""

from itertools import product as _product

IMPL = "python"


# ---------------------------------------------------------------------------
# sparse polynomial kernels
#
# A polynomial is a dict mapping exponent tuples (one slot per registered
# variable) to coefficients in [1, q).


def poly_mul(a, b, q, budget):
    """Exact product of two term maps, coefficients mod q."""
    if not a or not b:
        return {}
    out = {}
    b_items = list(b.items())
    for ea, ca in a.items():
        for eb, cb in b_items:
            c = ca * cb % q
            if c == 0:
                continue
            key = tuple(x + y for x, y in zip(ea, eb))
            v = (out.get(key, 0) + c) % q
            out[key] = v
        if len(out) > budget:
            raise MemoryError("term budget exceeded")
    return {k: v for k, v in out.items() if v}


def poly_addmul(acc, a, c, q):
    """In-place acc += c * a, coefficients mod q. Returns acc."""
    c %= q
    if c == 0:
        return acc
    for e, ca in a.items():
        v = (acc.get(e, 0) + c * ca) % q
        if v:
            acc[e] = v
        elif e in acc:
            del acc[e]
    return acc


def poly_eval(terms, point, q):
    """Evaluate a term map at a point (tuple of ints), result in [0, q)."""
    total = 0
    for exps, coeff in terms.items():
        m = coeff
        for p, e in zip(point, exps):
            if e:
                m = m * pow(p, e, q) % q
        total = (total + m) % q
    return total


# ---------------------------------------------------------------------------
# flattened circuit programs
#
# A program evaluates a circuit bottom-up over value slots:
#   slots [0, n_in)                  inputs,
#   slots [n_in, n_in + len(consts)) constants,
#   slot  n_in + len(consts) + i     result of instruction i.
# Instruction i has opcode ops[i] (0 = sum, 1 = product) and children
# child_slots[starts[i]:starts[i+1]] with matching edge labels. The last
# instruction is the circuit output.


def prog_eval(n_in, consts, ops, starts, child_slots, child_labels, point, q):
    slots = list(point)
    slots.extend(consts)
    base = len(slots)
    for i, op in enumerate(ops):
        lo = starts[i]
        hi = starts[i + 1]
        if op == 0:
            acc = 0
            for j in range(lo, hi):
                acc += child_labels[j] * slots[child_slots[j]]
            acc %= q
        else:
            acc = 1
            for j in range(lo, hi):
                acc = acc * (child_labels[j] * slots[child_slots[j]] % q) % q
                if acc == 0:
                    break
        slots.append(acc)
    return slots[base + len(ops) - 1]


def common_roots(progs, n_in, q, want):
    """First `want` common roots of the programs, in odometer order.

    Enumerates all q**n_in assignments with the first variable most
    significant; returns the list of root tuples found (possibly empty).
    """
    roots = []
    for point in _product(range(q), repeat=n_in):
        ok = True
        for consts, ops, starts, child_slots, child_labels in progs:
            if prog_eval(n_in, consts, ops, starts, child_slots,
                         child_labels, point, q) != 0:
                ok = False
                break
        if ok:
            roots.append(point)
            if len(roots) >= want:
                break
    return roots


# ---------------------------------------------------------------------------
# CNF kernels
#
# Clauses are tuples of DIMACS literals over variables 1..n_vars.
# Assignments are lists indexed by variable with values -1/0/1.


def _propagate(n_vars, clauses, values):
    """Unit propagation to fixpoint. Returns 1 on conflict, else 0."""
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            unassigned = 0
            last = 0
            satisfied = False
            for lit in clause:
                v = values[abs(lit)]
                if v == -1:
                    unassigned += 1
                    last = lit
                    if unassigned > 1:
                        break
                elif (v == 1) == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if unassigned == 0:
                return 1
            if unassigned == 1:
                values[abs(last)] = 1 if last > 0 else 0
                changed = True
    return 0


def unit_propagate(n_vars, clauses, assume_items):
    """Propagate assumptions to fixpoint.

    Returns (status, values) with status 1 on conflict, 0 otherwise;
    values[v] is -1 when variable v stays unassigned.
    """
    values = [-1] * (n_vars + 1)
    for var, val in assume_items:
        if values[var] != -1 and values[var] != val:
            return 1, values
        values[var] = val
    status = _propagate(n_vars, clauses, values)
    return status, values


def _all_satisfied(clauses, values):
    for clause in clauses:
        if not any((values[abs(lit)] == 1) == (lit > 0)
                   for lit in clause
                   if values[abs(lit)] != -1):
            return False
    return True


def _first_branch_var(n_vars, clauses, values):
    """Lowest unassigned variable occurring in a not-yet-satisfied clause."""
    best = 0
    for clause in clauses:
        satisfied = False
        lowest = 0
        for lit in clause:
            v = values[abs(lit)]
            if v == -1:
                var = abs(lit)
                if lowest == 0 or var < lowest:
                    lowest = var
            elif (v == 1) == (lit > 0):
                satisfied = True
                break
        if not satisfied and lowest and (best == 0 or lowest < best):
            best = lowest
    return best


def sat_first(n_vars, clauses, assume_items):
    """First satisfying assignment in lexicographic order, or None.

    Branches variables in index order trying 0 before 1, with unit
    propagation; the first model reached is the lexicographically
    smallest extension of the assumptions.
    """
    values = [-1] * (n_vars + 1)
    for var, val in assume_items:
        if values[var] != -1 and values[var] != val:
            return None
        values[var] = val

    stack = [values]
    while stack:
        vals = stack.pop()
        if _propagate(n_vars, clauses, vals):
            continue
        var = 0
        for v in range(1, n_vars + 1):
            if vals[v] == -1:
                var = v
                break
        if var == 0:
            return vals[1:]
        for val in (1, 0):  # LIFO: 0 branch explored first
            child = vals[:]
            child[var] = val
            stack.append(child)
    return None


def sat_count(n_vars, clauses, cap):
    """Exact model count, early-stopped at cap (returns cap + 1 then)."""
    total = 0
    stack = [[-1] * (n_vars + 1)]
    while stack:
        vals = stack.pop()
        if _propagate(n_vars, clauses, vals):
            continue
        if _all_satisfied(clauses, vals):
            free = sum(1 for v in range(1, n_vars + 1) if vals[v] == -1)
            total += 1 << free
            if total > cap:
                return cap + 1
            continue
        var = _first_branch_var(n_vars, clauses, vals)
        for val in (0, 1):
            child = vals[:]
            child[var] = val
            stack.append(child)
    return total


def sat_all(n_vars, clauses, limit):
    """All models, in lexicographic order; MemoryError beyond limit."""
    models = []

    def emit_completions(vals):
        free = [v for v in range(1, n_vars + 1) if vals[v] == -1]
        base = vals[1:]
        for mask in range(1 << len(free)):
            if len(models) >= limit:
                raise MemoryError("model budget exceeded")
            row = base[:]
            for i, v in enumerate(free):
                row[v - 1] = (mask >> i) & 1
            models.append(row)

    stack = [[-1] * (n_vars + 1)]
    while stack:
        vals = stack.pop()
        if _propagate(n_vars, clauses, vals):
            continue
        if _all_satisfied(clauses, vals):
            emit_completions(vals)
            continue
        var = _first_branch_var(n_vars, clauses, vals)
        for val in (0, 1):
            child = vals[:]
            child[var] = val
            stack.append(child)

    models.sort()
    return models
