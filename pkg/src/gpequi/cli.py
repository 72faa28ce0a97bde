"""Command-line front end: parse, evaluate, analyze, report.

Exit status: 0 when every check passes, 2 when a scenario or verifier reports
a failure, 1 on usage, parse or precision errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import distribution as dist
from . import plotting
from . import pp
from . import primes
from . import realkernel as rk
from . import recurrence as rec
from . import rewrite
from . import scenarios
from .gp.ast import render
from .gp.evaluate import PrecisionConfig, PrecisionExhausted, evaluate
from .gp.parser import GRAMMAR, ParseError, parse, parse_const
from .realkernel import Interval

OUTPUT_SCHEMA = "gpequi-cli/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--N", type=int, help="upper end of the range")
    g.add_argument("--M", type=int, help="lower end of the range")
    g.add_argument("--window", type=int, help="window length L")
    g.add_argument("--bits", type=int, help="starting precision of the ladder")
    g.add_argument("--max-bits", type=int, help="precision cap (GPEQUI_MAX_BITS when unset)")
    g.add_argument("--trials", type=int, help="randomized trials")
    g.add_argument("--tol", type=float, help="tolerance for identity checks")
    g.add_argument("--eps", type=str, help="smallness threshold (rational, e.g. 1/10)")
    g.add_argument("--format", choices=("json", "csv", "text"), help="output format")
    g.add_argument("--seed", type=int, default=0, help="seed for sampled verifiers")
    g.add_argument("--emit-plot-data", metavar="DIR", help="write CSV plot data and figures here")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="gpequi", description="Generalized polynomials: evaluation and experiments.",
                  epilog="Expression grammar:\n" + GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate q(n)")
    p.add_argument("expr")
    p.add_argument("--n", type=int, help="single point (default: the range M..N)")

    p = sub.add_parser("ud", parents=[common], help="u.d. statistics of {q(n) lam}")
    p.add_argument("expr")
    p.add_argument("--lam", help="constant multiplier")
    p.add_argument("--bins", type=int, default=10)

    p = sub.add_parser("wd", parents=[common], help="windowed discrepancy over [-N, N]")
    p.add_argument("expr", nargs="+")
    p.add_argument("--lam")
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--trend", action="store_true", help="L = N/10 along N = 10^3, 10^4, 10^5")

    p = sub.add_parser("density", parents=[common], help="density of {|q(n)| < A} or {||q(n) lam|| < eps}")
    p.add_argument("expr")
    p.add_argument("--A", type=str, help="absolute threshold")
    p.add_argument("--lam")

    p = sub.add_parser("adequacy", parents=[common], help="adequacy probe of an expression or a canonical form")
    p.add_argument("target", help="expression, or form:<fixture> for a canonical form")
    p.add_argument("--A", type=str, default="1,10,100", help="comma-separated thresholds")

    p = sub.add_parser("identity-check", parents=[common], help="randomized check of a mod-1 identity")
    p.add_argument("name", help="id1..id8, id2p, all, or worked-rewrite")
    p.add_argument("--boundary-fraction", type=float, default=0.2)

    p = sub.add_parser("canonical-verify", parents=[common], help="compare a canonical form with its expression")
    p.add_argument("fixture", help="shipped fixture name or path to a JSON file")
    p.add_argument("--expr", help="expression (default: the one recorded in the fixture)")

    pr = sub.add_parser("primes", help="prime averages")
    psub = pr.add_subparsers(dest="primes_command", required=True, parser_class=_Parser)
    p = psub.add_parser("pi", parents=[common], help="prime counting function")
    p = psub.add_parser("ud", parents=[common], help="u.d. statistics along primes")
    p.add_argument("expr")
    p.add_argument("--lam")
    p = psub.add_parser("compare-lambda", parents=[common], help="prime average against the Lambda' average")
    p.add_argument("expr")
    p = psub.add_parser("w-trick", parents=[common], help="W-trick gaps for primorial W")
    p.add_argument("expr")
    p = psub.add_parser("cauchy", parents=[common], help="prime averages along an N-ladder")
    p.add_argument("expr")
    p.add_argument("--Ns", default="10000,100000,1000000")

    rc = sub.add_parser("recurrence", help="toral recurrence experiments")
    rsub = rc.add_subparsers(dest="rec_command", required=True, parser_class=_Parser)
    p = rsub.add_parser("density", parents=[common], help="density of ||q(n) alpha_i|| < eps for all i")
    p.add_argument("expr")
    p.add_argument("--alpha", action="append", required=True, help="translation component (repeatable)")
    p = rsub.add_parser("scenario", parents=[common], help="run a catalog scenario")
    p.add_argument("name")
    p = rsub.add_parser("classify", parents=[common], help="classify a real polynomial q(n)")
    p.add_argument("poly", help="bracket-free polynomial in n, or coefficients 'c0; c1; ...'")
    p.add_argument("--s-max", type=int, default=rec.S_MAX)
    p = rsub.add_parser("list", parents=[common], help="list the scenario catalog")
    p = rsub.add_parser("lemma", parents=[common], help="random test of the floor-scaling lemma")

    p = sub.add_parser("scenario", parents=[common], help="run a catalog scenario, 'list' or 'all'")
    p.add_argument("name")
    return top


# ---------------------------------------------------------------------------
# helpers


def _cfg(args) -> PrecisionConfig:
    start = args.bits or rk.LADDER_START
    cap = args.max_bits
    if cap is None:
        env = os.environ.get("GPEQUI_MAX_BITS")
        cap = int(env) if env else rk.DEFAULT_MAX_BITS
    if start < 32 or cap < start:
        raise UsageError("need 32 <= --bits <= --max-bits")
    return PrecisionConfig(start, cap)


def _const(text: str | None):
    if text is None:
        return None
    return parse_const(text)


def _frac_arg(text: str | None, default: Fraction) -> Fraction:
    if text is None:
        return default
    try:
        return Fraction(text)
    except ValueError as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _range(args, N: int, M: int | None = None) -> tuple[int, int]:
    hi = args.N if args.N is not None else N
    lo = args.M if args.M is not None else (M if M is not None else 1)
    if lo > hi:
        raise UsageError("empty range: M > N")
    return lo, hi


def _value_json(v):
    if isinstance(v, Interval):
        return {"lo": str(v.lo), "hi": str(v.hi), "approx": v.mid()}
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def _config_json(args) -> dict:
    keys = ("N", "M", "window", "trials", "tol", "eps", "seed")
    out = {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}
    # effective ladder, so a saved output records the cap it actually ran with
    if hasattr(args, "max_bits"):
        cfg = _cfg(args)
        out["bits"], out["max_bits"] = cfg.start_bits, cfg.max_bits
    return out


def _plot_dir(args) -> Path | None:
    if not args.emit_plot_data:
        return None
    d = Path(args.emit_plot_data)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return x.item()
    return x


def _flatten(prefix: str, x, out: list):
    if isinstance(x, dict):
        for k in sorted(x):
            _flatten(f"{prefix}.{k}" if prefix else str(k), x[k], out)
    elif isinstance(x, list) and x and all(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out.append((prefix, json.dumps(x) if isinstance(x, list) else x))


class Output:
    def __init__(self, args, command: str):
        self.args = args
        self.command = command

    def emit(self, result: dict, passed: bool | None = None, csv_table=None, text: str | None = None,
             fmt_default: str = "json") -> int:
        fmt = self.args.format or fmt_default
        doc = {"schema": OUTPUT_SCHEMA, "command": self.command, "config": _config_json(self.args),
               "result": _to_jsonable(result)}
        if passed is not None:
            doc["pass"] = bool(passed)
        if fmt == "json":
            sys.stdout.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        elif fmt == "text" and text is not None:
            sys.stdout.write(text + "\n")
        elif fmt == "csv" and csv_table is not None:
            header, rows = csv_table
            sys.stdout.write(",".join(header) + "\n")
            for r in rows:
                sys.stdout.write(",".join(str(c) for c in r) + "\n")
        else:
            rows: list = []
            _flatten("", doc, rows)
            sys.stdout.write("key,value\n")
            for k, v in rows:
                sys.stdout.write(f"{k},{v}\n")
        return 0 if passed is None or passed else 2


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, out: Output) -> int:
    q = parse(args.expr)
    cfg = _cfg(args)
    if args.n is not None:
        v = evaluate(q, args.n, cfg)
        text = str(_value_json(v)) if not isinstance(v, Interval) else repr(v.mid())
        return out.emit({"expression": render(q), "n": args.n, "value": _value_json(v)}, text=text,
                        csv_table=(["n", "value"], [[args.n, text]]), fmt_default="text")
    lo, hi = _range(args, 10)
    rows = []
    for n in range(lo, hi + 1):
        v = evaluate(q, n, cfg)
        rows.append([n, _value_json(v) if not isinstance(v, Interval) else repr(v.mid())])
    return out.emit({"expression": render(q), "values": [{"n": n, "value": v} for n, v in rows]},
                    csv_table=(["n", "value"], rows), text="\n".join(f"{n} {v}" for n, v in rows))


def cmd_ud(args, out: Output) -> int:
    q = parse(args.expr)
    lo, hi = _range(args, 10_000)
    cfg = _cfg(args)
    rep, x = dist.ud_report(q, _const(args.lam), hi, lo, bins=args.bins, cfg=cfg)
    d = _plot_dir(args)
    if d:
        plotting.write_csv(d / "ud_points.csv", ["n", "frac"], zip(range(lo, hi + 1), x.tolist()))
        plotting.histogram_figure(x, d / "ud_histogram.png", title=render(q))
        cps = [c for c in (10, 100, 1000, 10 ** 4, 10 ** 5, 10 ** 6) if c <= x.size] or [x.size]
        series = dist.discrepancy_series(x, cps)
        plotting.write_csv(d / "ud_discrepancy.csv", ["N", "star_discrepancy"], series)
        plotting.discrepancy_figure(series, d / "ud_discrepancy.png", title=render(q))
    edges = [(i / args.bins, (i + 1) / args.bins) for i in range(args.bins)]
    table = (["bin_lo", "bin_hi", "count"], [[a, b, c] for (a, b), c in zip(edges, rep.histogram)])
    return out.emit({"expression": render(q), **rep.to_dict()}, csv_table=table)


def cmd_wd(args, out: Output) -> int:
    qs = [parse(e) for e in args.expr]
    q = qs[0] if len(qs) == 1 else qs
    cfg = _cfg(args)
    lam = _const(args.lam)
    if args.trend:
        r = dist.wd_trend(q, lam, grid=args.grid, cfg=cfg)
        table = (["N", "L", "max_window_discrepancy"], [[s["N"], s["L"], s["max_window_discrepancy"]] for s in r["series"]])
        d = _plot_dir(args)
        if d:
            plotting.write_csv(d / "wd_trend.csv", *table)
            plotting.discrepancy_figure([(s["N"], s["max_window_discrepancy"]) for s in r["series"]],
                                        d / "wd_trend.png", title="max window discrepancy")
        return out.emit({"expressions": [render(e) for e in qs], **r}, passed=r["non_increasing"], csv_table=table)
    N = args.N or 10_000
    L = args.window or max(1, N // 10)
    rep = dist.wd_test(q, lam, N, L, grid=args.grid, cfg=cfg)
    d = _plot_dir(args)
    if d:
        x = dist.sequence_points(q, lam, range(-N, N + 1), cfg)
        starts = dist.window_starts(N, L)
        per = dist.windowed_discrepancy(x, L, starts, args.grid)
        plotting.write_csv(d / "wd_windows.csv", ["start", "discrepancy"], [(s - N, v) for s, v in zip(starts, per)])
        plotting.window_figure([s - N for s in starts], per, d / "wd_windows.png", title=f"L = {L}")
    res = {"expressions": [render(e) for e in qs], **rep.to_dict()}
    table = (["N", "L", "max_window_discrepancy"], [[N, L, rep.extra["max_window_discrepancy"]]])
    return out.emit(res, csv_table=table)


def cmd_density(args, out: Output) -> int:
    q = parse(args.expr)
    cfg = _cfg(args)
    N = args.N or 10_000
    if args.A is not None:
        r = dist.adequacy_test(q, [_frac_arg(args.A, Fraction(1))], N, cfg, witnesses=2 * N + 1)[0]
        hits = set(r["witnesses"])
        L = args.window or max(1, N // 10)
        ban = dist.banach_density_lower(lambda n: n in hits, N, L)
        res = {"expression": render(q), "predicate": f"|q(n)| < {args.A}", "range": [-N, N],
               "natural_density": {k: r[k] for k in ("value", "radius", "count", "total")},
               "banach_lower": ban, "witnesses": r["witnesses"][:20]}
    else:
        eps = _frac_arg(args.eps, Fraction(1, 10))
        lam = _const(args.lam) or rk.Rational(Fraction(1))
        lo, hi = _range(args, N)
        r = rec.simultaneous_smallness(q, [lam], eps, hi, lo, cfg=cfg)
        res = {"expression": render(q), "predicate": f"||q(n) lam|| < {eps}", **r}
    d = _plot_dir(args)
    if d:
        ws = res.get("witnesses", [])
        plotting.write_csv(d / "density_witnesses.csv", ["n"], [[w] for w in ws])
        plotting.witness_figure([w for w in ws if w > 0], N, d / "density_witnesses.png", title=res["predicate"])
    return out.emit(res)


def cmd_adequacy(args, out: Output) -> int:
    cfg = _cfg(args)
    N = args.N or 10_000
    if args.target.startswith("form:"):
        cf = pp.load(args.target[5:])
        dens = pp.piece_densities(cf, N, cfg)
        verdict, evidence = pp.adequacy_decide(cf, dens)
        res = {"form": args.target[5:], "N": N, "verdict": verdict, "evidence": evidence,
               "densities": {str(k): v.to_dict() if hasattr(v, "to_dict") else v for k, v in dens.items()}}
        return out.emit(res)
    q = parse(args.target)
    As = [_frac_arg(a.strip(), Fraction(1)) for a in args.A.split(",")]
    rows = dist.adequacy_test(q, As, N, cfg)
    d = _plot_dir(args)
    if d:
        plotting.write_csv(d / "adequacy.csv", ["A", "density", "radius"], [[r["A"], r["value"], r["radius"]] for r in rows])
        plotting.bar_figure([r["A"] for r in rows], [r["value"] for r in rows], d / "adequacy.png",
                            title=render(q), ylabel="density of |q| < A")
    table = (["A", "density", "radius", "count", "total"], [[r["A"], r["value"], r["radius"], r["count"], r["total"]] for r in rows])
    return out.emit({"expression": render(q), "range": [-N, N], "thresholds": rows}, csv_table=table)


def cmd_identity(args, out: Output) -> int:
    trials = args.trials or 1000
    tol = args.tol if args.tol is not None else 1e-20
    bits = args.bits or 128
    if args.name == "worked-rewrite":
        tr = rewrite.replay_worked_rewrite(samples=min(trials, 500), tol=tol, seed=args.seed)
        return out.emit(tr.to_dict(), passed=tr.passed)
    names = rewrite.IDENTITY_NAMES if args.name == "all" else (args.name,)
    reports = {}
    for name in names:
        try:
            lhs, rhs = rewrite.identity(name)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
        reports[name] = rewrite.verify_congruence(lhs, rhs, trials=trials, tol=tol, bits=bits, seed=args.seed,
                                                  boundary_fraction=args.boundary_fraction).to_dict()
    ok = all(r["pass"] for r in reports.values())
    table = (["identity", "trials", "worst_defect", "failures", "pass"],
             [[k, r["trials"], r["worst_defect"], r["failures"], r["pass"]] for k, r in reports.items()])
    return out.emit({"identities": reports}, passed=ok, csv_table=table)


def cmd_canonical(args, out: Output) -> int:
    cfg = _cfg(args)
    try:
        cf = pp.load(args.fixture)
    except FileNotFoundError as exc:
        raise UsageError(f"no such canonical form: {args.fixture}") from exc
    q = parse(args.expr) if args.expr else pp.fixture_expression(args.fixture)
    if q is None:
        raise UsageError("fixture records no expression; pass --expr")
    N = args.N if args.N is not None else 1000
    M = args.M if args.M is not None else -N
    rep = pp.verify_canonical(q, cf, (M, N), cfg)
    return out.emit({"fixture": args.fixture, "expression": render(q), "range": [M, N], **rep.to_dict()},
                    passed=rep.passed)


def cmd_primes(args, out: Output) -> int:
    cfg = _cfg(args)
    c = args.primes_command
    if c == "pi":
        N = args.N or 100
        t = primes.table(N)
        return out.emit({"N": N, "pi": t.pi(N)}, text=str(t.pi(N)))
    q = parse(args.expr)
    if c == "ud":
        N = args.N or 100_000
        rep = primes.prime_seq_stats(q, _const(args.lam), N, lo=args.M or 2, cfg=cfg)
        d = _plot_dir(args)
        if d:
            x = primes.prime_points(q, _const(args.lam), N, lo=args.M or 2, cfg=cfg)
            plotting.write_csv(d / "primes_points.csv", ["p", "frac"],
                               zip(primes.table(N).primes(N)[primes.table(N).primes(N) >= (args.M or 2)].tolist(), x.tolist()))
            plotting.histogram_figure(x, d / "primes_histogram.png", title=render(q) + " along primes")
        return out.emit({"expression": render(q), **rep.to_dict()})
    if c == "compare-lambda":
        return out.emit({"expression": render(q), **primes.prime_avg_vs_lambda_avg(q, args.N or 100_000, cfg)})
    if c == "w-trick":
        r = primes.w_trick_scan(q, args.N or 10_000, cfg=cfg)
        d = _plot_dir(args)
        if d:
            plotting.write_csv(d / "w_trick.csv", ["W", "gap"], [[row["W"], row["gap"]] for row in r["rows"]])
            plotting.bar_figure([str(row["W"]) for row in r["rows"]], [row["gap"] for row in r["rows"]],
                                d / "w_trick.png", title="W-trick gap", ylabel="gap")
        table = (["m", "W", "phi_W", "gap"], [[row["m"], row["W"], row["phi_W"], row["gap"]] for row in r["rows"]])
        return out.emit({"expression": render(q), **r}, csv_table=table)
    if c == "cauchy":
        Ns = [int(s) for s in args.Ns.split(",")]
        r = primes.cauchy_check_prime_avg(q, Ns, cfg=cfg)
        return out.emit({"expression": render(q), **r}, passed=r["shrinking"])
    raise UsageError(f"unknown primes command {c}")


def _scenario_params(args) -> dict:
    params = {}
    for k in ("N", "trials", "seed"):
        v = getattr(args, k, None)
        if v is not None and not (k == "seed" and v == 0):
            params[k] = v
    if args.window is not None:
        params["L"] = args.window
    if args.eps is not None:
        params["eps"] = args.eps
    return params


def _run_one_scenario(name: str, args) -> dict:
    try:
        key = scenarios.resolve(name)
    except scenarios.UnknownScenario as exc:
        raise UsageError(f"unknown scenario {name!r}; see 'gpequi scenario list'") from exc
    params = _scenario_params(args)
    fn = scenarios.RUNNERS[scenarios.SCENARIOS[key]["runner"]]
    accepted = fn.__code__.co_varnames[: fn.__code__.co_argcount]
    bad = [k for k in params if k not in accepted]
    if bad:
        raise UsageError(f"scenario {key} does not take {', '.join('--' + b for b in bad)}")
    return scenarios.run_scenario(key, _cfg(args), **params)


def _scenario_plots(r: dict, d: Path):
    rows = [[c["key"], c["op"], json.dumps(_to_jsonable(c["expected"])), json.dumps(_to_jsonable(c["observed"])), c["pass"]]
            for c in r["checks"]]
    plotting.write_csv(d / f"{r['scenario']}_checks.csv", ["key", "op", "expected", "observed", "pass"], rows)
    m = r["measured"]
    for key in ("witnesses", "S_alpha_witnesses", "J_witnesses", "return_witnesses"):
        if key in m and m[key]:
            N = m.get("range", [1, max(m[key])])[1]
            plotting.witness_figure(m[key], N, d / f"{r['scenario']}_{key}.png", title=f"{r['scenario']}: {key}")
    if "histogram" in m and m["histogram"]:
        plotting.bar_figure([str(i) for i in range(len(m["histogram"]))], m["histogram"],
                            d / f"{r['scenario']}_histogram.png", title=r["scenario"], ylabel="count")
    if "series" in m:
        plotting.discrepancy_figure([(s["N"], s["max_window_discrepancy"]) for s in m["series"]],
                                    d / f"{r['scenario']}_trend.png", title=r["scenario"])


def cmd_scenario(args, out: Output, name: str | None = None) -> int:
    name = name or args.name
    if name == "list":
        lst = scenarios.scenario_list()
        table = (["name", "aliases", "summary"], [[s["name"], " ".join(s["aliases"]), json.dumps(s["summary"])] for s in lst])
        return out.emit({"scenarios": lst}, csv_table=table,
                        text="\n".join(f"{s['name']:28s} {' '.join(s['aliases']):24s} {s['summary']}" for s in lst))
    names = sorted(scenarios.SCENARIOS) if name == "all" else [name]
    results = [_run_one_scenario(n, args) for n in names]
    d = _plot_dir(args)
    if d:
        for r in results:
            _scenario_plots(r, d)
    ok = all(r["pass"] for r in results)
    table = (["scenario", "key", "op", "expected", "observed", "pass"],
             [[r["scenario"], c["key"], c["op"], json.dumps(_to_jsonable(c["expected"])),
               json.dumps(_to_jsonable(c["observed"])), c["pass"]] for r in results for c in r["checks"]])
    res = results[0] if len(results) == 1 else {"scenarios": results}
    return out.emit(res, passed=ok, csv_table=table)


def cmd_recurrence(args, out: Output) -> int:
    c = args.rec_command
    cfg = _cfg(args)
    if c == "list":
        return cmd_scenario(args, out, "list")
    if c == "scenario":
        return cmd_scenario(args, out, args.name)
    if c == "lemma":
        r = rec.floor_scaling_check(args.trials or 10_000, args.seed)
        return out.emit(r, passed=r["pass"])
    if c == "density":
        q = parse(args.expr)
        t = rec.ToralTarget.make([parse_const(a) for a in args.alpha], _frac_arg(args.eps, Fraction(1, 10)))
        lo, hi = _range(args, 10_000)
        try:
            r = rec.toral_recurrence_density(q, t, hi, lo, cfg=cfg)
        except rec.NonIntegerValue as exc:
            raise UsageError(str(exc)) from exc
        d = _plot_dir(args)
        if d:
            plotting.write_csv(d / "recurrence_witnesses.csv", ["n"], [[w] for w in r["witnesses"]])
            plotting.witness_figure(r["witnesses"], hi, d / "recurrence_witnesses.png", title=render(q))
        return out.emit({"expression": render(q), "alphas": args.alpha, **r})
    if c == "classify":
        text = args.poly
        try:
            coefs = ([parse_const(s) for s in text.split(";")] if ";" in text else rec.parse_poly_coefficients(text))
            v = rec.classify_real_polynomial(coefs, s_max=args.s_max, cfg=cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return out.emit({"input": text, **v.to_dict()}, text=v.case)
    raise UsageError(f"unknown recurrence command {c}")


COMMANDS = {"eval": cmd_eval, "ud": cmd_ud, "wd": cmd_wd, "density": cmd_density, "adequacy": cmd_adequacy,
            "identity-check": cmd_identity, "canonical-verify": cmd_canonical, "primes": cmd_primes,
            "recurrence": cmd_recurrence, "scenario": cmd_scenario}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        name = args.command
        if name == "primes":
            name += " " + args.primes_command
        elif name == "recurrence":
            name += " " + args.rec_command
        return COMMANDS[args.command](args, Output(args, name))
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n\n{parser.format_usage()}\nExpression grammar:\n{GRAMMAR}\n")
        return 1
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n\nExpression grammar:\n{GRAMMAR}\n")
        return 1
    except PrecisionExhausted as exc:
        sys.stderr.write(f"precision error: {exc}; raise --max-bits or GPEQUI_MAX_BITS\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
