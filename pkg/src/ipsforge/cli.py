"""Command line for generating formula families, checking certificates,
and running brute-force oracles.

Exit codes: 0 success (or Accept), 1 Reject, 2 budget exhausted,
3 bad parameters or unparsable input.  Common flags can also be set
through IPSFORGE_* environment variables (IPSFORGE_Q, IPSFORGE_SEED,
IPSFORGE_BUDGET_TERMS, IPSFORGE_BUDGET_VARS, IPSFORGE_EPSILON,
IPSFORGE_OUT, IPSFORGE_STATS).
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import click

from .circuit import Circuit
from .encode_fixed import EquationSystem, dimacs_text, parse_dimacs
from .errors import (BudgetExceeded, FieldMismatch, FormatError,
                     IpsforgeError)
from .ffield import ff_new
from .generators import (DEFAULT_MONOMIAL_BUDGET, degree_schedule,
                         diag_phi_parts, gen_aub, gen_ips_refute,
                         gen_irankp, gen_rankp, gen_trankp,
                         gen_vnp_eq_vac0, phi_star_parts)
from .poly import Monomial, SparsePoly
from .proofcheck import (IpsCertificate, PcProof, check_ips, check_pc,
                         check_pcr, fieldsat_bruteforce, sat_bruteforce)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_BUDGET = 2
EXIT_BAD_PARAMS = 3

DEFAULT_BUDGET_VARS = 26


@dataclass(frozen=True)
class RunConfig:
    """Resolved common settings for one invocation."""

    q: int = 2
    seed: int = 0
    budget_terms: int = DEFAULT_MONOMIAL_BUDGET
    budget_vars: int = DEFAULT_BUDGET_VARS
    epsilon: float = 0.5
    out: Optional[str] = None
    stats: Optional[str] = None

    def __post_init__(self):
        if self.budget_terms <= 0 or self.budget_vars <= 0:
            raise FormatError("budgets must be positive")
        if self.epsilon <= 0:
            raise FormatError("epsilon must be positive")

    @property
    def stats_path(self) -> Optional[str]:
        if self.stats:
            return self.stats
        if self.out and self.out != "-":
            return self.out + ".stats"
        return None


def _common_options(f):
    opts = [
        click.option("--q", default=2, show_default=True,
                     envvar="IPSFORGE_Q", help="Field modulus."),
        click.option("--seed", default=0, show_default=True,
                     envvar="IPSFORGE_SEED",
                     help="Seed recorded in the stats sidecar."),
        click.option("--budget-terms", default=DEFAULT_MONOMIAL_BUDGET,
                     show_default=True, envvar="IPSFORGE_BUDGET_TERMS",
                     help="Cap on expanded terms / enumerated monomials."),
        click.option("--budget-vars", default=DEFAULT_BUDGET_VARS,
                     show_default=True, envvar="IPSFORGE_BUDGET_VARS",
                     help="Cap on brute-force variables."),
        click.option("--epsilon", default=0.5, show_default=True,
                     envvar="IPSFORGE_EPSILON",
                     help="Degree-schedule exponent when --l is omitted."),
        click.option("--out", default=None, envvar="IPSFORGE_OUT",
                     help="Artifact path ('-' or omitted: stdout)."),
        click.option("--stats", default=None, envvar="IPSFORGE_STATS",
                     help="Stats sidecar path (default: <out>.stats)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(kw: Dict[str, object]) -> RunConfig:
    """Pop the common options out of a command's kwargs."""
    return RunConfig(q=kw.pop("q"), seed=kw.pop("seed"),
                     budget_terms=kw.pop("budget_terms"),
                     budget_vars=kw.pop("budget_vars"),
                     epsilon=kw.pop("epsilon"),
                     out=kw.pop("out"), stats=kw.pop("stats"))


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}")


def _write_artifact(text: str, cfg: RunConfig) -> None:
    if cfg.out and cfg.out != "-":
        Path(cfg.out).write_text(text)
    else:
        click.echo(text, nl=False)


def _stats_text(pairs: Iterable[Tuple[str, object]]) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def _write_stats(pairs: List[Tuple[str, object]], cfg: RunConfig) -> None:
    path = cfg.stats_path
    if path:
        Path(path).write_text(_stats_text(pairs))


def _system_stats(family: str, sys_: EquationSystem, cfg: RunConfig,
                  params: Dict[str, object]) -> List[Tuple[str, object]]:
    pairs: List[Tuple[str, object]] = [("family", family),
                                       ("q", sys_.field.q),
                                       ("seed", cfg.seed)]
    pairs.extend(sorted(params.items()))
    pairs.append(("equations", len(sys_)))
    pairs.append(("variables", len(sys_.all_vars())))
    return pairs


def _emit_system(family: str, sys_: EquationSystem, cfg: RunConfig,
                 params: Dict[str, object]) -> int:
    _write_artifact(sys_.to_text(), cfg)
    _write_stats(_system_stats(family, sys_, cfg, params), cfg)
    return EXIT_OK


def _parse_matrix(spec: str, m: int, n: int) -> List[List[int]]:
    """Matrix literal: id | zero | ones | JSON rows | @file with JSON."""
    if spec == "id":
        return [[1 if i == j else 0 for j in range(n)] for i in range(m)]
    if spec == "zero":
        return [[0] * n for _ in range(m)]
    if spec == "ones":
        return [[1] * n for _ in range(m)]
    if spec.startswith("@"):
        spec = _read(spec[1:])
    try:
        rows = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad matrix literal: {exc}")
    if not isinstance(rows, list):
        raise FormatError("matrix literal must be a JSON list of rows")
    return rows


def _parse_tensor(spec: str, m: int, r: int):
    """Tensor literal: id | zero | nested JSON lists | JSON dict keyed
    by comma-separated indices | @file."""
    if spec == "zero":
        return None
    if spec == "id":
        return {(i,) * r: 1 for i in range(m)}
    if spec.startswith("@"):
        spec = _read(spec[1:])
    try:
        data = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad tensor literal: {exc}")
    if isinstance(data, dict):
        out = {}
        for key, val in data.items():
            try:
                idx = tuple(int(p) for p in str(key).split(","))
            except ValueError:
                raise FormatError(f"bad tensor index {key!r}")
            out[idx] = val
        return out
    return data


def _parse_pi_tensors(spec: Optional[str], n: int):
    """irankp tensors: JSON dict keyed by digit strings, or @file."""
    if spec is None or spec == "zero":
        return None
    if spec.startswith("@"):
        spec = _read(spec[1:])
    try:
        data = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad tensors literal: {exc}")
    if not isinstance(data, dict):
        raise FormatError("tensors literal must be a JSON object")
    out = {}
    for key, val in data.items():
        digits = str(key)
        if not digits.isdigit():
            raise FormatError(f"bad digit string {key!r}")
        out[tuple(int(ch) for ch in digits)] = val
    return out


def _degree_bound(l: Optional[int], n: int, epsilon: float) -> int:
    return l if l is not None else degree_schedule(n * n, epsilon)


@click.group()
def cli():
    """Formula-family generator, certificate checker, and oracles."""


# ---------------------------------------------------------------------------
# gen


@cli.group()
def gen():
    """Generate a formula family artifact plus a stats sidecar."""


@gen.command("rankp")
@click.option("--m", required=True, type=int, help="Matrix side.")
@click.option("--n", required=True, type=int, help="Rank bound.")
@click.option("--a", "--A", "a", default="id", show_default=True,
              help="Matrix: id | zero | ones | JSON | @file.")
@_common_options
def gen_rankp_cmd(m: int, n: int, a: str, **kw) -> int:
    cfg = _config(kw)
    sys_ = gen_rankp(m, n, _parse_matrix(a, m, m), cfg.q)
    return _emit_system("rankp", sys_, cfg, {"m": m, "n": n})


@gen.command("trankp")
@click.option("--m", required=True, type=int, help="Tensor side.")
@click.option("--n", required=True, type=int, help="Rank bound.")
@click.option("--r", required=True, type=int, help="Tensor order.")
@click.option("--a", "--A", "a", default="id", show_default=True,
              help="Tensor: id | zero | JSON | @file.")
@_common_options
def gen_trankp_cmd(m: int, n: int, r: int, a: str, **kw) -> int:
    cfg = _config(kw)
    sys_ = gen_trankp(m, n, r, _parse_tensor(a, m, r), cfg.q)
    return _emit_system("trankp", sys_, cfg, {"m": m, "n": n, "r": r})


@gen.command("irankp")
@click.option("--big-l", "--L", "big_l", required=True, type=int,
              help="Digit alphabet size.")
@click.option("--n", required=True, type=int, help="Digit string length.")
@click.option("--k", "--K", "k", required=True, type=int,
              help="Base block side.")
@click.option("--tensors", default=None,
              help="JSON dict keyed by digit strings, or @file.")
@click.option("--with-extension", is_flag=True,
              help="Add product-naming z variables.")
@_common_options
def gen_irankp_cmd(big_l: int, n: int, k: int, tensors: Optional[str],
                   with_extension: bool, **kw) -> int:
    cfg = _config(kw)
    sys_ = gen_irankp(big_l, n, k, _parse_pi_tensors(tensors, n),
                      with_extension=with_extension, q=cfg.q,
                      equation_budget=cfg.budget_terms)
    return _emit_system("irankp", sys_, cfg,
                        {"big_l": big_l, "n": n, "k": k,
                         "with_extension": int(with_extension)})


@gen.command("vnp-vac0")
@click.option("--n", required=True, type=int, help="Permanent side.")
@click.option("--s", required=True, type=int, help="Layout size.")
@click.option("--l", default=None, type=int,
              help="Degree bound (default: schedule at n^2).")
@click.option("--delta", required=True, type=int, help="Layout depth.")
@click.option("--fanin", default=None, type=int,
              help="Mul slots per layer (default: max(2, n)).")
@_common_options
def gen_vnp_cmd(n: int, s: int, l: Optional[int], delta: int,
                fanin: Optional[int], **kw) -> int:
    cfg = _config(kw)
    l = _degree_bound(l, n, cfg.epsilon)
    sys_ = gen_vnp_eq_vac0(n, s, l, delta, cfg.q, fanin=fanin,
                           monomial_budget=cfg.budget_terms)
    return _emit_system("vnp-vac0", sys_, cfg,
                        {"n": n, "s": s, "l": l, "delta": delta})


@gen.command("aub")
@click.option("--poly", required=True,
              help="Target polynomial, e.g. 'x + 2*y^2'.")
@click.option("--s", required=True, type=int, help="Layout size.")
@click.option("--l", required=True, type=int, help="Degree bound.")
@click.option("--delta", required=True, type=int, help="Layout depth.")
@click.option("--fanin", default=2, show_default=True, type=int)
@_common_options
def gen_aub_cmd(poly: str, s: int, l: int, delta: int, fanin: int,
                **kw) -> int:
    cfg = _config(kw)
    f = SparsePoly.parse(poly, ff_new(cfg.q))
    sys_ = gen_aub(f, s, l, delta, cfg.q, fanin=fanin,
                   monomial_budget=cfg.budget_terms)
    return _emit_system("aub", sys_, cfg,
                        {"poly": poly.replace(" ", ""), "s": s, "l": l,
                         "delta": delta})


@gen.command("ips-refute")
@click.option("--axioms", required=True,
              help="Equation-system file to refute.")
@click.option("--t", required=True, type=int, help="Layout size.")
@click.option("--delta", required=True, type=int, help="Layout depth.")
@click.option("--l", required=True, type=int, help="Degree bound.")
@click.option("--boolean", is_flag=True,
              help="Allow Boolean axioms x^2 - x as extra inputs.")
@click.option("--fanin", default=2, show_default=True, type=int)
@_common_options
def gen_ips_refute_cmd(axioms: str, t: int, delta: int, l: int,
                       boolean: bool, fanin: int, **kw) -> int:
    cfg = _config(kw)
    ax = EquationSystem.parse(_read(axioms))
    sys_ = gen_ips_refute(t, delta, l, ax, boolean=boolean, q=cfg.q,
                          fanin=fanin, monomial_budget=cfg.budget_terms)
    return _emit_system("ips-refute", sys_, cfg,
                        {"t": t, "delta": delta, "l": l,
                         "boolean": int(boolean),
                         "axiom_count": len(ax)})


@gen.command("diag-phi")
@click.option("--t", required=True, type=int, help="Refutation size.")
@click.option("--l", default=None, type=int,
              help="Degree bound (default: schedule at n^2).")
@click.option("--delta-refute", required=True, type=int,
              help="Refutation depth.")
@click.option("--n", required=True, type=int, help="Permanent side.")
@click.option("--s", required=True, type=int, help="Inner layout size.")
@click.option("--delta", required=True, type=int, help="Inner depth.")
@click.option("--inner-encoding", default="scnf", show_default=True,
              type=click.Choice(["scnf", "cnf"]))
@_common_options
def gen_diag_phi_cmd(t: int, l: Optional[int], delta_refute: int, n: int,
                     s: int, delta: int, inner_encoding: str, **kw) -> int:
    cfg = _config(kw)
    l = _degree_bound(l, n, cfg.epsilon)
    parts = diag_phi_parts(t, l, delta_refute, n, s, delta, cfg.q,
                           inner_encoding=inner_encoding,
                           monomial_budget=cfg.budget_terms)
    _write_artifact(dimacs_text(parts.cnf), cfg)
    pairs: List[Tuple[str, object]] = [("family", "diag-phi"),
                                       ("seed", cfg.seed),
                                       ("t", t), ("l", l),
                                       ("delta_refute", delta_refute),
                                       ("n", n), ("s", s),
                                       ("delta", delta)]
    pairs.extend(sorted(parts.stats.items()))
    _write_stats(pairs, cfg)
    return EXIT_OK


@gen.command("phi-star")
@click.option("--n", required=True, type=int, help="Permanent side.")
@click.option("--s", required=True, type=int, help="Layout size.")
@click.option("--l", default=None, type=int,
              help="Degree bound (default: schedule at n^2).")
@click.option("--delta", required=True, type=int, help="Layout depth.")
@_common_options
def gen_phi_star_cmd(n: int, s: int, l: Optional[int], delta: int,
                     **kw) -> int:
    cfg = _config(kw)
    l = _degree_bound(l, n, cfg.epsilon)
    parts = phi_star_parts(n, s, l, delta, cfg.q,
                           monomial_budget=cfg.budget_terms)
    _write_artifact(parts.system.to_text(), cfg)
    pairs: List[Tuple[str, object]] = [("family", "phi-star"),
                                       ("seed", cfg.seed),
                                       ("n", n), ("s", s), ("l", l),
                                       ("delta", delta)]
    pairs.extend(sorted(parts.stats.items()))
    pairs.append(("variables", len(parts.system.all_vars())))
    _write_stats(pairs, cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def _render_ext(elem: Tuple[int, ...]) -> str:
    return ",".join(str(c) for c in elem)


@cli.command()
@click.argument("certfile")
@click.argument("axiomsfile", required=False)
@click.option("--method", default="exact", show_default=True,
              type=click.Choice(["exact", "pit"]),
              help="Identity check for circuit certificates.")
@click.option("--trials", default=20, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True,
              envvar="IPSFORGE_SEED")
@click.option("--budget-terms", default=DEFAULT_MONOMIAL_BUDGET,
              show_default=True, envvar="IPSFORGE_BUDGET_TERMS")
@click.option("--target", default=1, show_default=True, type=int,
              help="Constant target for line proofs.")
@click.option("--report", default=None,
              help="Also write the report to this path.")
def check(certfile: str, axiomsfile: Optional[str], method: str,
          trials: int, seed: int, budget_terms: int, target: int,
          report: Optional[str]) -> int:
    """Check a certificate file; exit 0 on Accept, 1 on Reject.

    CERTFILE holds either a circuit certificate (with its axioms
    embedded) or a line proof, which needs AXIOMSFILE.  An AXIOMSFILE
    given alongside a circuit certificate replaces the embedded axioms.
    """
    text = _read(certfile)
    head = text.lstrip().split(None, 1)[0] if text.strip() else ""
    pairs: List[Tuple[str, object]] = []
    if head == "ipscert":
        cert = IpsCertificate.parse(text)
        if axiomsfile:
            ax = EquationSystem.parse(_read(axiomsfile))
            cert = IpsCertificate(cert.circuit, ax, cert.target, cert.mode)
        trace: Dict[str, object] = {}
        verdict = check_ips(cert, method=method, trials=trials, seed=seed,
                            term_budget=budget_terms, trace=trace)
        pairs += [("kind", "ips"), ("q", cert.axioms.field.q),
                  ("mode", cert.mode), ("method", method),
                  ("axioms", len(cert.axioms))]
        if method == "pit":
            pairs += [("seed", seed), ("trials", trials),
                      ("extension_degree", trace.get("extension_degree"))]
            for i, (rz, rt) in enumerate(trace.get("residuals", []), 1):
                pairs.append((f"residual.{i}.zero", _render_ext(rz)))
                pairs.append((f"residual.{i}.target", _render_ext(rt)))
    elif head == "pcproof":
        if not axiomsfile:
            raise click.UsageError("line proofs need AXIOMSFILE")
        proof = PcProof.parse(text)
        ax = EquationSystem.parse(_read(axiomsfile))
        checker = check_pcr if proof.kind == "pcr" else check_pc
        verdict = checker(proof, ax, target=target)
        pairs += [("kind", proof.kind), ("q", ax.field.q),
                  ("lines", len(proof.lines)), ("target", target),
                  ("degree", verdict.degree), ("size", verdict.size)]
    else:
        raise FormatError(f"unrecognized certificate header {head!r}")
    pairs.append(("verdict", "Accept" if verdict.accepted else "Reject"))
    pairs.append(("reason", verdict.reason))
    out = _stats_text(pairs)
    click.echo(out, nl=False)
    if report:
        Path(report).write_text(out)
    return EXIT_OK if verdict.accepted else EXIT_REJECT


# ---------------------------------------------------------------------------
# oracle


@cli.group()
def oracle():
    """Brute-force ground-truth queries."""


def _echo_model(model: Optional[Dict[str, object]]) -> None:
    if model is None:
        click.echo("UNSAT")
        return
    click.echo("SAT")
    for name, value in model.items():
        v = getattr(value, "value", value)
        click.echo(f"{name}={v}")


@oracle.command("sat")
@click.argument("input", metavar="CNFFILE")
@click.option("--budget-vars", default=DEFAULT_BUDGET_VARS,
              show_default=True, envvar="IPSFORGE_BUDGET_VARS")
def oracle_sat(input: str, budget_vars: int) -> int:
    """First satisfying assignment of a DIMACS file, if any."""
    f = parse_dimacs(_read(input))
    if f.n_vars > budget_vars:
        raise BudgetExceeded(f"{f.n_vars} variables exceed {budget_vars}")
    _echo_model(sat_bruteforce(f))
    return EXIT_OK


@oracle.command("fieldsat")
@click.argument("input", metavar="EQFILE")
@click.option("--q", default=None, type=int, envvar="IPSFORGE_Q",
              help="Expected field modulus (checked against the file).")
@click.option("--budget-vars", default=DEFAULT_BUDGET_VARS,
              show_default=True, envvar="IPSFORGE_BUDGET_VARS")
def oracle_fieldsat(input: str, q: Optional[int],
                    budget_vars: int) -> int:
    """First common root of an equation-system file, if any."""
    sys_ = EquationSystem.parse(_read(input))
    if q is not None and q != sys_.field.q:
        raise FieldMismatch(
            f"file is over F{sys_.field.q}, asked for F{q}")
    if len(sys_.all_vars()) > budget_vars:
        raise BudgetExceeded(
            f"{len(sys_.all_vars())} variables exceed {budget_vars}")
    _echo_model(fieldsat_bruteforce(sys_))
    return EXIT_OK


@oracle.command("expand")
@click.argument("input", metavar="CIRCUITFILE")
@click.option("--budget-terms", default=DEFAULT_MONOMIAL_BUDGET,
              show_default=True, envvar="IPSFORGE_BUDGET_TERMS")
def oracle_expand(input: str, budget_terms: int) -> int:
    """Expanded sparse polynomial, terms in graded-lex order."""
    c = Circuit.parse(_read(input))
    click.echo(c.expand(budget_terms).to_text())
    return EXIT_OK


@oracle.command("coeff")
@click.argument("input", metavar="CIRCUITFILE")
@click.option("--monomial", required=True,
              help="Monomial to read off, e.g. x1*x2^2 (or 1).")
@click.option("--budget-terms", default=DEFAULT_MONOMIAL_BUDGET,
              show_default=True, envvar="IPSFORGE_BUDGET_TERMS")
def oracle_coeff(input: str, monomial: str, budget_terms: int) -> int:
    """Coefficient of one monomial in the expanded circuit."""
    c = Circuit.parse(_read(input))
    m = Monomial.parse(monomial)
    click.echo(c.expand(budget_terms).coefficient(m).value)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI, mapping exceptions onto the exit-code contract."""
    try:
        rv = cli.main(args=argv, prog_name="ipsforge",
                      standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return EXIT_BAD_PARAMS
    except click.ClickException as exc:
        exc.show()
        return EXIT_BAD_PARAMS
    except click.exceptions.Abort:
        return EXIT_BAD_PARAMS
    except BudgetExceeded as exc:
        click.echo(f"budget: {exc}", err=True)
        return EXIT_BUDGET
    except IpsforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_BAD_PARAMS
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
