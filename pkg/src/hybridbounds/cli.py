"""Command-line front end.

Every command produces one report.  JSON reports carry "schema": 1 and are
serialized with sorted keys so identical invocations give identical bytes.
Exit codes: 0 success, 1 a verification failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import exponent as ex
from ._arith import primes_upto
from .cyclo import CapacityError
from .expsum import (
    PreconditionError,
    complete_sum_vanishing,
    correlation_audit,
    correlation_sum,
    crt_equivalence,
    csum,
    hyper_kl2,
    kl3,
    kl3_prime_audit,
    kloosterman,
    weil_audit,
)
from .modcore import character, characters, factorize, gauss_sum, primitive_characters, unit_group
from .transform import (
    TEMPERED_ALPHA,
    LanglandsParams,
    SingularityError,
    TailNotCertifiedError,
    lemma22_audit,
    omega_transform,
)

SCHEMA = 1
CACHE_ENV = "HYBRIDBOUNDS_CACHE_DIR"
PRIME_POWERS = (4, 8, 9, 25, 27, 49)


class UsageError(ValueError):
    pass


# -------------------------------------------------------------- parsing helpers


def rational(text: str) -> Fraction:
    """Exact 'a/b' (or integer) literal; decimals are refused."""
    s = text.strip()
    try:
        num, _, den = s.partition("/")
        value = Fraction(int(num), int(den)) if den else Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed rational {text!r}; expected a/b") from None
    return value


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def complex_list(text: str) -> list[complex]:
    try:
        return [complex(t.replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}") from None


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


# -------------------------------------------------------------- run config


@dataclass
class RunConfig:
    command: str
    params: dict
    fmt: str = "json"
    out: str | None = None
    dry_run: bool = False
    cache_dir: str | None = None
    jobs: int = 1
    tol: dict = field(default_factory=dict)

    def key(self) -> str:
        blob = json.dumps({"command": self.command, "params": self.params, "format": self.fmt}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def _plain(v):
    """Convert a report tree into JSON-safe builtins."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, Fraction):
        return ex.fmt(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_plain(v.real), _plain(v.imag)]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if v is None or isinstance(v, str):
        return v
    if hasattr(v, "to_json"):
        return _plain(v.to_json())
    return str(v)


@dataclass
class Outcome:
    result: dict
    ok: bool = True
    table: tuple[list[str], list[list]] | None = None


# -------------------------------------------------------------- commands


def _chi(q: int, vec: list[int] | None, need_primitive: bool = False):
    if vec is None:
        if not need_primitive:
            return characters(q)[0]
        prims = primitive_characters(q)
        if not prims:
            raise UsageError(f"no primitive character modulo {q}")
        return prims[0]
    n = len(unit_group(q).generators)
    if len(vec) != n:
        raise UsageError(f"modulus {q} needs {n} character exponents, got {len(vec)}")
    chi = character(q, vec)
    if need_primitive and not chi.is_primitive:
        raise UsageError("this command needs a primitive character")
    return chi


def cmd_factor(a, cfg) -> Outcome:
    fac = factorize(a.q)
    grp = unit_group(a.q)
    return Outcome(
        {
            "q": a.q,
            "factors": [list(f) for f in fac.factors],
            "phi": grp.order,
            "unit_group": {"structure": list(grp.structure), "generators": [g for g, _ in grp.generators]},
        },
        table=(["p", "e"], [list(f) for f in fac.factors]),
    )


def cmd_chars(a, cfg) -> Outcome:
    rows = []
    for i, c in enumerate(characters(a.q)):
        if a.primitive and not c.is_primitive:
            continue
        rows.append(
            {
                "index": i,
                "exponents": list(c.exponent_vector),
                "conductor": c.conductor,
                "parity": c.parity,
                "order": c.order(),
                "primitive": c.is_primitive,
            }
        )
    header = ["index", "exponents", "conductor", "parity", "order", "primitive"]
    table = [[r["index"], " ".join(map(str, r["exponents"])), r["conductor"], r["parity"], r["order"], r["primitive"]] for r in rows]
    return Outcome({"q": a.q, "count": len(rows), "characters": rows}, table=(header, table))


def cmd_gauss(a, cfg) -> Outcome:
    chi = _chi(a.q, a.chi)
    tau = gauss_sum(chi)
    return Outcome(
        {
            "q": a.q,
            "chi": list(chi.exponent_vector),
            "primitive": chi.is_primitive,
            "tau": tau.to_json(),
            "abs_squared": abs(tau.value) ** 2,
        }
    )


def _sum_outcome(val, params: dict) -> Outcome:
    out = dict(val.to_json())
    out.update(params)
    return Outcome(out, table=(["exact", "re", "im", "error_bound"], [[out["exact"], *out["approx"], out["error_bound"]]]))


def cmd_kloosterman(a, cfg) -> Outcome:
    return _sum_outcome(kloosterman(a.m, a.n, a.q), {})


def cmd_kl3(a, cfg) -> Outcome:
    return _sum_outcome(kl3(a.m, a.n, a.d1, a.d2, a.c), {})


def cmd_hkl2(a, cfg) -> Outcome:
    return _sum_outcome(hyper_kl2(a.n, a.m, a.c, (a.q1, a.q2), (a.d1, a.d2)), {})


def cmd_csum(a, cfg) -> Outcome:
    return _sum_outcome(csum(a.u, a.s, a.m, a.n, a.q), {})


def cmd_correlation(a, cfg) -> Outcome:
    return _sum_outcome(correlation_sum(a.m, a.n, a.h, a.q, a.conjugate), {"conjugate_second": a.conjugate})


def cmd_decomp(a, cfg) -> Outcome:
    from .identity import decomposition_sweep, verify_decomposition

    tol = cfg.tol.get("tol", 1e-8)
    if a.sweep:
        rep = decomposition_sweep(tuple(a.Ms), tuple(a.Rs), tol)
        return Outcome(rep.to_json(), rep.passed)
    chi = _chi(a.M, a.chi, need_primitive=True)
    rep = verify_decomposition(chi, a.R, a.n, tol)
    return Outcome(rep.to_json(), rep.passed)


def _suite_moduli(max_q: int) -> list[int]:
    return [q for q in primes_upto(max_q)] + [q for q in PRIME_POWERS if q <= max_q]


def cmd_identity_suite(a, cfg) -> Outcome:
    from .identity import hyperkl_sweep, kl3_expansion_sweep, reciprocity_sweep, tau_kl2_sweep

    reports = [
        tau_kl2_sweep(a.max_q).to_json(),
        kl3_expansion_sweep(_suite_moduli(a.max_q)).to_json(),
        reciprocity_sweep(a.recip_max, a.recip_max).to_json(),
        hyperkl_sweep(a.hyperkl_max).to_json(),
        complete_sum_vanishing(a.vanish_max).to_json(),
    ]
    rows = []
    for r in reports:
        failures = r.get("failure_count", 0 if r["passed"] else 1)
        rows.append([r["name"], r["checked"], failures, "PASS" if r["passed"] else "FAIL"])
    ok = all(r["passed"] for r in reports)
    summary = [{"name": n, "checked": c, "failures": f, "status": s} for n, c, f, s in rows]
    return Outcome({"summary": summary, "reports": reports}, ok, (["name", "checked", "failures", "status"], rows))


def cmd_bounds_audit(a, cfg) -> Outcome:
    if a.kind == "weil":
        rep = weil_audit(a.max or 2000, a.samples, a.seed)
    elif a.kind == "correlation":
        rep = correlation_audit(a.max or 300, conjugate_second=False)
    elif a.kind == "correlation-conj":
        rep = correlation_audit(a.max or 300, conjugate_second=True)
    elif a.kind == "vanishing":
        rep = complete_sum_vanishing(a.max or 200)
    elif a.kind == "kl3":
        rep = kl3_prime_audit(a.max or 500, a.samples, a.seed)
    else:
        rep = crt_equivalence(a.max or 500, seed=a.seed)
    j = rep.to_json()
    return Outcome(j, rep.passed, (["name", "max_ratio", "checked", "passed"], [[j["name"], j["max_ratio"], j["checked"], j["passed"]]]))


def cmd_poisson(a, cfg) -> Outcome:
    from .identity import GaussianWeight, kloosterman_correlation_sequence, poisson_oracle, twisted_kloosterman_sequence
    from .transform import BumpSpec

    tol = cfg.tol.get("tol", 1e-12)
    X = a.X if a.X is not None else a.M ** a.x_exp
    if a.sequence == "constant":
        seq = np.ones(a.M)
    else:
        chi = _chi(a.M, a.chi, need_primitive=True)
        if a.sequence == "kl":
            seq = twisted_kloosterman_sequence(chi, a.r, a.t)
        else:
            seq = kloosterman_correlation_sequence(chi, a.r, a.t, a.r + 1, a.t)
    weight = GaussianWeight() if a.weight == "gaussian" else BumpSpec()
    rep = poisson_oracle(seq, weight, X, tol, a.zero_frequency)
    j = rep.to_json()
    j["sequence"] = a.sequence
    ok = rep.passed
    if a.zero_frequency:
        ok = j["details"]["relative_residual"] < tol
    return Outcome(j, ok)


def _alpha(vals: list[complex] | None) -> LanglandsParams:
    if vals is None:
        return TEMPERED_ALPHA
    if len(vals) != 4:
        raise UsageError("four Langlands parameters are required")
    return LanglandsParams(tuple(vals))


def cmd_transform(a, cfg) -> Outcome:
    alpha = _alpha(a.alpha)
    tol = cfg.tol.get("tol", 1e-8)
    vals = omega_transform(a.x, alpha=alpha, sign=a.sign, sigma=a.sigma, tol=tol)
    rows = [[v.x, v.value.real, v.value.imag, v.certified_error] for v in vals]
    res = {
        "sign": a.sign,
        "sigma": a.sigma,
        "alpha": [[z.real, z.imag] for z in alpha.alpha],
        "t_max": vals[0].t_max if vals else None,
        "values": [
            {"x": v.x, "value": [v.value.real, v.value.imag], "certified_error": v.certified_error, "tail_bound": v.tail_bound}
            for v in vals
        ],
    }
    return Outcome(res, table=(["x", "re", "im", "certified_error"], rows))


def cmd_lemma22(a, cfg) -> Outcome:
    xs = np.geomspace(a.x_min, a.x_max, a.points)
    rep = lemma22_audit(xs, alpha=_alpha(a.alpha), K=tuple(a.K), sigma=a.sigma)
    j = rep.to_json()
    return Outcome(j, bool(rep.top_below_bottom))


def _saving_one(args):
    theta, variant = args
    return ex.optimize_saving(theta, variant=variant)


def cmd_exponent(a, cfg) -> Outcome:
    if a.action == "terms":
        terms = ex.theorem_terms()
        res = {k: ([t.to_json() for t in v] if isinstance(v, tuple) else v.to_json()) for k, v in terms.items()}
        return Outcome(res, table=(["group", "label", "q_exponent"], [[k, t["label"], t["q_exponent"]] for k, v in res.items() for t in (v if isinstance(v, list) else [v])]))
    if a.action == "derive":
        rep = ex.derive_thm11_from_thm12(a.theta or Fraction(1, 3), a.mu or Fraction(1, 4))
        j = rep.to_json()
        return Outcome(j, table=(["term", "match", "derived", "printed"], [[r["term"], r["match"], r["derived"], r["printed"]] for r in j["rows"]]))
    if a.action == "feasibility":
        p = ex.ParamChoice(a.theta or Fraction(3, 10), a.mu or Fraction(3, 10), a.delta, a.eps)
        j = ex.feasibility(p)
        j["endgame"] = ex.endgame_check(p)
        j["interval"] = [ex.fmt(v) for v in ex.feasible_interval(p.mu)]
        rows = [[r["label"], r["margin"], r["margin_bare"], r["satisfied"]] for r in j["margins"]]
        return Outcome(j, table=(["label", "margin", "margin_bare", "satisfied"], rows))
    # saving
    thetas = list(a.theta_list or [])
    if a.theta is not None:
        thetas.append(a.theta)
    if a.theta_range:
        lo, hi, count = a.theta_range
        n = int(count)
        if n < 2 or n != count:
            raise UsageError("--theta-range needs an integer count >= 2")
        thetas += [lo + (hi - lo) * k / (n - 1) for k in range(n)]
    if not thetas:
        thetas = [ex.COROLLARY_THETA]
    if any(t <= 0 for t in thetas):
        raise UsageError("theta must be positive")
    work = [(t, a.variant) for t in thetas]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_saving_one, work))
    else:
        results = [_saving_one(w) for w in work]
    res = {"variant": a.variant, "rows": [r.to_json() for r in results]}
    if ex.COROLLARY_THETA in thetas:
        res["corollary"] = ex.corollary_check()
    return Outcome(res, table=(list(ex.CSV_HEADER), [r.csv_row() for r in results]))


# -------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", dest="fmt", choices=("json", "csv", "plain"), default="json", help="report format (default json)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--dry-run", action="store_true", help="validate inputs and stop")
    p.add_argument("--cache-dir", help=f"report cache directory (default ${CACHE_ENV}, unset = no cache)")
    p.add_argument("--jobs", type=positive_int, default=1, help="worker processes for batch work (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridbounds", description="Exact sums, identity gates, transforms and exponent bookkeeping.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _common(p)
        p.set_defaults(func=func)
        return p

    p = add("factor", cmd_factor, "factor q and describe (Z/q)^x")
    p.add_argument("--q", type=positive_int, required=True)

    p = add("chars", cmd_chars, "list Dirichlet characters mod q")
    p.add_argument("--q", type=positive_int, required=True)
    p.add_argument("--primitive", action="store_true")

    p = add("gauss", cmd_gauss, "Gauss sum of a character")
    p.add_argument("--q", type=positive_int, required=True)
    p.add_argument("--chi", type=int_list, help="exponent vector, e.g. 1 or 1,0 (default principal)")

    p = add("kloosterman", cmd_kloosterman, "Kl2(m, n; q)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=positive_int, required=True)

    p = add("kl3", cmd_kl3, "Kl3(m, n; d1, d2, c)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=positive_int, required=True)
    p.add_argument("--d1", type=positive_int, default=1)
    p.add_argument("--d2", type=positive_int, default=1)

    p = add("hkl2", cmd_hkl2, "hyper-Kloosterman double sum KL2(n, m, c; q, d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--c", type=positive_int, required=True)
    p.add_argument("--q1", type=positive_int, default=1)
    p.add_argument("--q2", type=positive_int, default=1)
    p.add_argument("--d1", type=positive_int, default=1)
    p.add_argument("--d2", type=positive_int, default=1)

    p = add("csum", cmd_csum, "the complete c-sum C(s, m, n; q) twisted by Kl2(u g, 1; q)")
    for k in ("u", "s", "m", "n"):
        p.add_argument(f"--{k}", type=int, required=True)
    p.add_argument("--q", type=positive_int, required=True)

    p = add("correlation", cmd_correlation, "sum_g Kl2(mg,1;q) Kl2(ng,1;q) e(hg/q)")
    for k in ("m", "n", "h"):
        p.add_argument(f"--{k}", type=int, required=True)
    p.add_argument("--q", type=positive_int, required=True)
    p.add_argument("--conjugate", action="store_true", help="conjugate the second Kloosterman sum")

    p = add("decomp-verify", cmd_decomp, "smooth character decomposition check")
    p.add_argument("--M", type=positive_int, default=5)
    p.add_argument("--chi", type=int_list, help="exponent vector of a primitive character (default: first)")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--sweep", action="store_true", help="run all primitive characters, n and R")
    p.add_argument("--Ms", type=int_list, default=[5, 7, 11, 13])
    p.add_argument("--Rs", type=float_list, default=[1.0, 2.0, 4.0])
    p.add_argument("--tol", type=float, help="residual tolerance (default 1e-8)")

    p = add("identity-suite", cmd_identity_suite, "exact identity gates with a pass-count summary")
    p.add_argument("--max-q", dest="max_q", type=positive_int, default=60)
    p.add_argument("--recip-max", dest="recip_max", type=positive_int, default=100)
    p.add_argument("--hyperkl-max", dest="hyperkl_max", type=positive_int, default=40)
    p.add_argument("--vanish-max", dest="vanish_max", type=positive_int, default=60)

    p = add("bounds-audit", cmd_bounds_audit, "empirical bound audits")
    p.add_argument("--kind", choices=("weil", "correlation", "correlation-conj", "vanishing", "kl3", "crt"), default="weil")
    p.add_argument("--max", type=positive_int, help="largest modulus (per-kind default)")
    p.add_argument("--samples", type=positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("poisson", cmd_poisson, "Poisson summation oracle for periodic sequences")
    p.add_argument("--M", type=positive_int, default=5)
    p.add_argument("--X", type=float, help="scale (default M^x-exp)")
    p.add_argument("--x-exp", dest="x_exp", type=float, default=1.2)
    p.add_argument("--weight", choices=("gaussian", "bump"), default="gaussian")
    p.add_argument("--sequence", choices=("constant", "kl", "correlation"), default="correlation")
    p.add_argument("--chi", type=int_list)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--zero-frequency", dest="zero_frequency", action="store_true")
    p.add_argument("--tol", type=float, help="tolerance (default 1e-12)")

    p = add("transform-eval", cmd_transform, "Mellin-Barnes transform at points x")
    p.add_argument("--x", type=float_list, default=[1.0, 10.0, 100.0, 1000.0])
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--sigma", type=float, default=0.5, help="integrate on Re s = -sigma")
    p.add_argument("--alpha", type=complex_list, help="four Langlands parameters summing to 0")
    p.add_argument("--tol", type=float, help="tail tolerance (default 1e-8)")

    p = add("lemma22-audit", cmd_lemma22, "asymptotic expansion audit of the transform")
    p.add_argument("--x-min", dest="x_min", type=float, default=100.0)
    p.add_argument("--x-max", dest="x_max", type=float, default=1e4)
    p.add_argument("--points", type=positive_int, default=41)
    p.add_argument("--K", type=int_list, default=[1, 2])
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--alpha", type=complex_list)

    p = add("exponent", cmd_exponent, "exact exponent calculus")
    p.add_argument("action", choices=("saving", "feasibility", "derive", "terms"))
    p.add_argument("--theta", type=rational)
    p.add_argument("--theta-list", dest="theta_list", type=lambda s: [rational(t) for t in s.split(",")])
    p.add_argument("--theta-range", dest="theta_range", nargs=3, type=rational, metavar=("LO", "HI", "COUNT"))
    p.add_argument("--mu", type=rational)
    p.add_argument("--delta", type=rational, default=Fraction(1, 1000))
    p.add_argument("--eps", type=rational, default=Fraction(1, 1000))
    p.add_argument("--variant", choices=("read", "printed"), default="read", help="which reading of the fourth term to optimize")
    return parser


_NON_PARAMS = {"func", "fmt", "out", "dry_run", "cache_dir", "jobs", "command"}


def _validate(a) -> None:
    cmd = a.command
    if cmd == "exponent" and a.mu is not None and not 0 < a.mu < Fraction(1, 2):
        raise UsageError("mu must lie in (0, 1/2)")
    if cmd == "exponent" and a.theta is not None and a.theta <= 0:
        raise UsageError("theta must be positive")
    if cmd == "transform-eval" and any(x <= 0 for x in a.x):
        raise UsageError("x must be positive")
    if cmd == "lemma22-audit" and not 0 < a.x_min < a.x_max:
        raise UsageError("need 0 < x-min < x-max")
    if cmd == "gauss" and a.chi is not None:
        _chi(a.q, a.chi)
    if cmd in ("decomp-verify", "poisson") and getattr(a, "chi", None) is not None:
        _chi(a.M, a.chi, need_primitive=True)
    if getattr(a, "alpha", None) is not None:
        _alpha(a.alpha)


def _render(cfg: RunConfig, outcome: Outcome | None) -> tuple[bytes, bool]:
    envelope = {"schema": SCHEMA, "command": cfg.command, "params": cfg.params}
    if outcome is None:
        envelope.update({"dry_run": True, "ok": True, "result": {"valid": True}})
        ok = True
    else:
        envelope.update({"ok": outcome.ok, "result": _plain(outcome.result)})
        ok = outcome.ok
    if cfg.fmt == "json":
        text = json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if outcome is not None and outcome.table is not None:
            header, rows = outcome.table
            w.writerow(header)
            for r in rows:
                w.writerow([_csv_cell(x) for x in r])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(envelope):
                w.writerow([k, v])
        text = buf.getvalue()
    else:
        text = "".join(f"{k}: {v}\n" for k, v in _flatten(envelope))
    return text.encode(), ok


def _csv_cell(x):
    x = _plain(x)
    return json.dumps(x) if isinstance(x, (list, dict)) else x


def _flatten(obj, prefix=""):
    obj = _plain(obj)
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        for i, x in enumerate(obj):
            yield from _flatten(x, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj) if isinstance(obj, list) else obj


def dispatch(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    tol = {"tol": a.tol} if getattr(a, "tol", None) is not None else {}
    params = {k: v for k, v in sorted(vars(a).items()) if k not in _NON_PARAMS and k != "tol"}
    if getattr(a, "action", None):
        params["action"] = a.action
    cfg = RunConfig(
        a.command,
        _plain(params),
        a.fmt,
        a.out,
        a.dry_run,
        a.cache_dir or os.environ.get(CACHE_ENV) or None,
        a.jobs,
        tol,
    )
    if tol:
        cfg.params["tol"] = tol["tol"]
    try:
        _validate(a)
        cache_file = None
        if cfg.cache_dir and not cfg.dry_run:
            cache_file = Path(cfg.cache_dir) / f"{cfg.key()}.report"
        if cache_file is not None and cache_file.exists():
            data = cache_file.read_bytes()
            ok = data[:1] == b"1"
            data = data[1:]
        else:
            outcome = None if cfg.dry_run else a.func(a, cfg)
            data, ok = _render(cfg, outcome)
            if cache_file is not None:
                cache_file.parent.mkdir(parents=True, exist_ok=True)
                cache_file.write_bytes((b"1" if ok else b"0") + data)
    except (UsageError, PreconditionError, CapacityError, SingularityError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except TailNotCertifiedError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if cfg.out:
        Path(cfg.out).write_bytes(data)
    else:
        buf = getattr(stdout, "buffer", None)
        if buf is not None:
            buf.write(data)
            buf.flush()
        else:
            stdout.write(data.decode())
    if not ok:
        print("verification failed; see the report for witnesses", file=stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(dispatch())


__all__ = ["RunConfig", "build_parser", "dispatch", "main", "rational"]
