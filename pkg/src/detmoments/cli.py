"""Command-line entry point: ``detmoments <subcommand> [options]``.

Every subcommand writes one primary output file (CSV or JSON) and prints a
short summary. Option values resolve as: command-line flag, then the
``--config`` file (``key = value`` lines, ``#`` comments), then built-in
defaults. The resolved configuration is echoed into every output file.

CSV columns
  moments         order, numerator, denominator, decimal
  sepprob         alpha, identified, decimal, terms_used, tail_bound,
                  partial_sum_numerator, partial_sum_denominator
                  (identified = smallest-denominator rational inside the certified
                  enclosure [partial sum, partial sum + tail bound])
  reconstruct     x, density
  intercept-scan  alpha, n_moments, point, intercept, derivative, cumulative, log_intercept
  fisher          family, alpha, h, n_moments, nodes, density, value, nonpositive_fraction
  fisher-compare  alpha, fisher_pt_hs, fisher_det_hs
  ratfind         method, numerator, denominator, abs_error, numerator_factors,
                  denominator_factors
  mc              statistic, order, mean, stderr, exact, z
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import tempfile
from decimal import Decimal, localcontext
from fractions import Fraction

import gmpy2

from . import __version__
from .analysis import FisherConfig, fisher_compare, fisher_info, intercept_scan
from .exact_arith import as_rational
from .mc_oracle import FIELD_ALPHA, run_mc
from .moments import (MomentFamily, moment_balanced, moment_det, moment_pt, moment_table)
from .ratfind import cf_candidates, parse_decimal, smooth_search
from .reconstruct import DensityEstimate, cdf, density_curve, eval_density, reconstruct_family, \
    series_to_dict
from .sepprob import sep_prob

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- value parsing

def decimal_str(value, digits: int = 30) -> str:
    """Round-to-nearest decimal with ``digits`` significant digits, from an exact value."""
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, int):
        q = Fraction(value)
    else:
        if not gmpy2.is_finite(value):
            return str(value)
        q = Fraction(gmpy2.mpq(value))
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(int(q.numerator)) / Decimal(int(q.denominator))
    return format(d, "f") if -digits < d.adjusted() < digits else str(d)


def _rational(text) -> Fraction:
    try:
        return as_rational(str(text).strip())
    except (ValueError, ZeroDivisionError, TypeError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _positive_rational(text) -> Fraction:
    q = _rational(text)
    if q <= 0:
        raise UsageError(f"expected a positive value, got {text!r}")
    return q


def _int(lo: int):
    def parse(text) -> int:
        try:
            v = int(str(text).strip())
        except ValueError:
            raise UsageError(f"not an integer: {text!r}") from None
        if v < lo:
            raise UsageError(f"expected an integer >= {lo}, got {v}")
        return v
    return parse


def _float(lo=None, hi=None, *, open_lo=False):
    def parse(text) -> float:
        try:
            v = float(str(text).strip())
        except ValueError:
            raise UsageError(f"not a number: {text!r}") from None
        if lo is not None and (v < lo or (open_lo and v == lo)):
            raise UsageError(f"value {v} below the allowed range")
        if hi is not None and v >= hi:
            raise UsageError(f"value {v} above the allowed range")
        return v
    return parse


def _alpha_grid(text) -> list[Fraction]:
    """'2,3' or 'start:stop:step' (inclusive), entries rational."""
    s = str(text).strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (_rational(p) for p in parts)
        if step <= 0:
            raise UsageError("range step must be positive")
        out = []
        a = start
        while a <= stop:
            out.append(a)
            a += step
    else:
        out = [_rational(p) for p in s.split(",") if p.strip()]
    if not out:
        raise UsageError("empty alpha grid")
    if any(a <= 0 for a in out):
        raise UsageError("every alpha must be positive")
    return out


def _int_list(text) -> list[int]:
    try:
        return [int(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"not a list of integers: {text!r}") from None


def _family(text) -> MomentFamily:
    try:
        return MomentFamily.parse(str(text).strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _choice(*options):
    def parse(text) -> str:
        s = str(text).strip()
        if s not in options:
            raise UsageError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return parse


def _str(text) -> str:
    return str(text).strip()


def _show(value) -> str:
    if isinstance(value, MomentFamily):
        return value.value
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


# ---------------------------------------------------------------- option tables
# name -> (parser, default, help). ``None`` defaults mean "not set".

COMMON = {
    "output": (_str, None, "output file (default: <subcommand>.<format>)"),
    "format": (_choice("csv", "json"), "csv", "output format"),
    "plot_data": (_str, None, "also write plot-ready x,y CSV here"),
    "precision": (_int(16), 128, "working precision in bits for high-precision values"),
    "digits": (_int(1), 30, "significant digits in printed decimals"),
    "workers": (_int(1), 1, "worker processes for parallel modules"),
}

FISHER_KNOBS = {
    "h": (_positive_rational, Fraction(1, 100), "finite-difference step in alpha"),
    "nodes": (_int(2), 200, "Gauss-Legendre nodes"),
    "clamp": (_float(0, open_lo=True), 1e-12, "density floor before taking logs"),
    "edge_margin": (_float(0, 0.5), 1e-3, "fraction of the support trimmed at each end"),
    "max_nonpositive": (_float(0, 1.0000001), 0.5,
                        "reject reconstructions nonpositive at more than this fraction of nodes"),
}

COMMANDS = {
    "moments": ("exact moment table of one family", {
        "family": (_family, None, "pt-hs, balanced-hs, det-hs or det-bures"),
        "alpha": (_positive_rational, None, "alpha (rational, e.g. 1/2)"),
        "n_moments": (_int(0), 20, "highest moment order"),
    }),
    "sepprob": ("separability probability P(alpha) with a certified tail", {
        "alpha": (_alpha_grid, None, "alpha, or list 1/2,1,2, or start:stop:step"),
        "tol": (_positive_rational, Fraction(1, 10**12), "tail bound target"),
        "ratio_cap": (_positive_rational, Fraction(1, 2), "term-ratio cap used in the tail bound"),
        "max_terms": (_int(1), 10000, "give up after this many terms"),
    }),
    "reconstruct": ("Legendre density reconstruction from exact moments", {
        "family": (_family, None, "moment family"),
        "alpha": (_positive_rational, None, "alpha"),
        "n_moments": (_int(0), 200, "number of moments N"),
        "points": (_int(2), 201, "grid points for the density curve"),
    }),
    "intercept-scan": ("density, derivative and tail mass at a point across alpha", {
        "family": (_family, "pt-hs", "moment family"),
        "alphas": (_alpha_grid, None, "alpha grid"),
        "n_moments": (_int(0), 250, "number of moments N"),
        "point": (_rational, None, "evaluation point (default 0 for pt-hs/balanced-hs)"),
    }),
    "fisher": ("Fisher information of one family at one alpha", {
        "family": (_family, "det-hs", "moment family"),
        "alpha": (_positive_rational, None, "alpha"),
        "n_moments": (_int(0), 100, "moments used by the legendre density"),
        "density": (_choice("legendre", "mellin"), "legendre",
                    "legendre reconstruction or exact product-Beta density (det families)"),
        **FISHER_KNOBS,
    }),
    "fisher-compare": ("Fisher information of pt-hs against det-hs across alpha", {
        "alphas": (_alpha_grid, "1/4:8:1/4", "alpha grid"),
        "n_p": (_int(1), 245, "moments for the pt-hs reconstruction"),
        "n_q": (_int(1), 100, "moments for the det-hs reconstruction"),
        **FISHER_KNOBS,
    }),
    "ratfind": ("identify an exact rational behind a decimal", {
        "decimal": (_str, None, "decimal string, e.g. 0.0804954..."),
        "max_denominator": (_int(1), 1000, "continued-fraction denominator bound"),
        "primes": (_int_list, None, "smooth-denominator search over these primes"),
        "max_exponent": (_int(0), 3, "largest exponent per prime"),
        "tol": (_rational, None, "acceptance tolerance (default: 5 units in the last place)"),
        "max_results": (_int(1), 10, "candidates reported"),
    }),
    "mc": ("Monte Carlo sampling of random density matrices", {
        "field": (_choice("real", "complex"), "complex", "ground field"),
        "samples": (_int(1), 1_000_000, "number of samples"),
        "seed": (_int(0), 0, "random seed"),
        "orders": (_int_list, [1, 2, 3], "moment orders"),
        "chunk_size": (_int(1), 100_000, "samples per RNG substream"),
        "bins": (_int(1), 200, "histogram bins of det(rho^PT) over [-1/16, 1/256]"),
    }),
}

REQUIRED = {
    "moments": ("family", "alpha"),
    "sepprob": ("alpha",),
    "reconstruct": ("family", "alpha"),
    "intercept-scan": ("alphas",),
    "fisher": ("alpha",),
    "fisher-compare": (),
    "ratfind": ("decimal",),
    "mc": (),
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detmoments", description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1], formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    for name, (summary, options) in COMMANDS.items():
        p = sub.add_parser(name, help=summary, description=summary)
        p.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
        p.add_argument("--no-timestamp", action="store_true", default=argparse.SUPPRESS,
                       help="omit the timestamp so reruns are byte-identical")
        for key, (_, default, text) in {**options, **COMMON}.items():
            shown = _show(default) if default is not None else None
            p.add_argument(_flag(key), dest=key, default=argparse.SUPPRESS,
                           help=f"{text} [default: {shown}]" if shown else text)
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(command: str, flags: dict) -> dict:
    """Merge defaults < config file < flags and validate every value."""
    options = {**COMMANDS[command][1], **COMMON}
    raw = {}
    if "config" in flags:
        try:
            cfg = read_config(flags["config"])
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        unknown = sorted(set(cfg) - set(options) - {"no_timestamp"})
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        raw.update(cfg)
    raw.update({k: v for k, v in flags.items() if k in options})
    resolved = {}
    for key, (parse, default, _) in options.items():
        if key in raw:
            try:
                resolved[key] = parse(raw[key])
            except UsageError as exc:
                raise UsageError(f"{_flag(key)}: {exc}") from None
        elif default is not None:
            resolved[key] = parse(default) if isinstance(default, str) else default
        else:
            resolved[key] = None
    for key in REQUIRED[command]:
        if resolved[key] is None:
            raise UsageError(f"{_flag(key)} is required")
    stamp = flags.get("no_timestamp", False) or \
        str(raw.get("no_timestamp", "false")).lower() in ("1", "true", "yes")
    resolved["no_timestamp"] = bool(stamp)
    if resolved["output"] is None:
        resolved["output"] = f"{command}.{resolved['format']}"
    return resolved


# ---------------------------------------------------------------- output

def config_echo(command: str, cfg: dict) -> dict:
    echo = {"subcommand": command}
    echo.update({k: _show(v) for k, v in cfg.items() if v is not None})
    return echo


def _frac_json(q: Fraction) -> dict:
    return {"numerator": str(q.numerator), "denominator": str(q.denominator)}


def render_csv(header, rows, echo: dict, meta: dict) -> str:
    buf = io.StringIO()
    for k, v in echo.items():
        buf.write(f"# {k} = {v}\n")
    for k, v in meta.items():
        buf.write(f"# {k} = {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render_json(payload: dict, echo: dict, meta: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, **meta, "config": echo, **payload}
    return json.dumps(doc, indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Result:
    """What a subcommand produced: a table, a JSON payload, plot data and a summary."""

    def __init__(self, header, rows, payload, summary, plot=None):
        self.header = header
        self.rows = rows
        self.payload = payload
        self.summary = summary
        self.plot = plot  # (header, rows) or None


# ---------------------------------------------------------------- subcommands

def cmd_moments(cfg) -> Result:
    table = moment_table(cfg["family"], cfg["alpha"], cfg["n_moments"])
    d = cfg["digits"]
    rows = [(n, v.numerator, v.denominator, decimal_str(v, d)) for n, v in enumerate(table.values)]
    payload = {"family": table.family.value, "alpha": str(table.alpha),
               "support": [str(table.support.a), str(table.support.b)],
               "moments": [{"order": n, **_frac_json(v), "decimal": decimal_str(v, d)}
                           for n, v in enumerate(table.values)]}
    last = table.values[-1]
    summary = [f"{table.family.value} alpha={table.alpha}: orders 0..{table.order}",
               f"  mu_{table.order} = {last} ~ {decimal_str(last, 12)}"]
    plot = (("order", "moment"), [(n, float(v)) for n, v in enumerate(table.values)])
    return Result(("order", "numerator", "denominator", "decimal"), rows, payload, summary, plot)


def cmd_sepprob(cfg) -> Result:
    rows, items, summary = [], [], []
    d = cfg["digits"]
    for a in cfg["alpha"]:
        r = sep_prob(a, cfg["tol"], ratio_cap=cfg["ratio_cap"], max_terms=cfg["max_terms"],
                     precision=cfg["precision"])
        dec = decimal_str(r.decimal, d)
        guess = r.identified
        rows.append((str(a), str(guess), dec, r.terms_used, decimal_str(r.tail_bound, 6),
                     r.partial_sum.numerator, r.partial_sum.denominator))
        items.append({"alpha": str(a), "identified": _frac_json(guess), "decimal": dec,
                      "partial_sum": _frac_json(r.partial_sum), "terms_used": r.terms_used,
                      "tail_bound": _frac_json(r.tail_bound),
                      "tail_bound_decimal": decimal_str(r.tail_bound, 6)})
        summary.append(f"P({a}) = {guess} ~ {decimal_str(r.decimal, 15)}  "
                       f"[{r.terms_used} terms, tail <= {decimal_str(r.tail_bound, 3)}]")
    plot = (("alpha", "P"), [(float(Fraction(r[0])), float(Fraction(r[5], r[6]))) for r in rows])
    return Result(("alpha", "identified", "decimal", "terms_used", "tail_bound",
                   "partial_sum_numerator", "partial_sum_denominator"),
                  rows, {"results": items}, summary, plot)


def _grid(interval, points: int) -> list[Fraction]:
    return [interval.a + interval.width * Fraction(j, points - 1) for j in range(points)]


def cmd_reconstruct(cfg) -> Result:
    series = reconstruct_family(cfg["family"], cfg["alpha"], cfg["n_moments"])
    est = DensityEstimate(series)
    xs = _grid(series.interval, cfg["points"])
    ys = density_curve(series, [float(x) for x in xs])
    rows = [(decimal_str(x, 17), repr(float(y))) for x, y in zip(xs, ys)]
    payload = {"series": series_to_dict(series),
               "curve": [{"x": decimal_str(x, 17), "density": float(y)} for x, y in zip(xs, ys)]}
    summary = [f"{cfg['family'].value} alpha={cfg['alpha']}: {series.N} Legendre terms on "
               f"{series.interval}"]
    if series.interval.contains(Fraction(0)) and series.interval.a < 0:
        p0 = eval_density(est, 0)
        mass = cdf(est, 0, series.interval.b)
        summary.append(f"  p(0) = {decimal_str(p0, 12)}, mass on [0, b] = {decimal_str(mass, 12)}")
        payload["at_zero"] = {"density": decimal_str(p0, cfg["digits"]),
                              "upper_mass": decimal_str(mass, cfg["digits"])}
    plot = (("x", "density"), [(float(x), float(y)) for x, y in zip(xs, ys)])
    return Result(("x", "density"), rows, payload, summary, plot)


def cmd_intercept_scan(cfg) -> Result:
    scan = intercept_scan(cfg["family"], cfg["alphas"], cfg["n_moments"], cfg["point"],
                          workers=cfg["workers"])
    d = cfg["digits"]
    rows, items = [], []
    for a, v, dv, cum, lg in scan.rows():
        row = (str(a), scan.N_moments, str(scan.point), decimal_str(v, d), decimal_str(dv, d),
               decimal_str(cum, d), decimal_str(lg, d) if lg is not None else "")
        rows.append(row)
        items.append(dict(zip(("alpha", "n_moments", "point", "intercept", "derivative",
                               "cumulative", "log_intercept"), row)))
    summary = [f"{scan.family.value} at x={scan.point}, N={scan.N_moments}"]
    summary += [f"  alpha={r[0]}: p={decimal_str(Fraction(r[3]), 10)}  "
                f"p'={decimal_str(Fraction(r[4]), 8)}" for r in rows]
    plot = (("alpha", "intercept"), [(float(a), float(v)) for a, v, *_ in scan.rows()])
    return Result(("alpha", "n_moments", "point", "intercept", "derivative", "cumulative",
                   "log_intercept"), rows, {"rows": items}, summary, plot)


def _fisher_config(cfg, **extra) -> FisherConfig:
    try:
        return FisherConfig(h=cfg["h"], nodes=cfg["nodes"], edge_margin=cfg["edge_margin"],
                            clamp_epsilon=cfg["clamp"],
                            max_nonpositive_fraction=cfg["max_nonpositive"], **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fisher(cfg) -> Result:
    fc = _fisher_config(cfg, n_moments=cfg["n_moments"], density=cfg["density"])
    e = fisher_info(cfg["family"], cfg["alpha"], fc)
    row = (e.family.value, str(e.alpha), str(e.h), e.N_moments, e.quadrature_nodes, e.density,
           repr(e.value), repr(e.nonpositive_fraction))
    header = ("family", "alpha", "h", "n_moments", "nodes", "density", "value",
              "nonpositive_fraction")
    summary = [f"I({e.alpha}) for {e.family.value} = {e.value:.6f} ({e.density} density)"]
    return Result(header, [row], {"estimate": dict(zip(header, row))}, summary)


def cmd_fisher_compare(cfg) -> Result:
    fc = _fisher_config(cfg)
    cmp = fisher_compare(cfg["alphas"], cfg["n_p"], cfg["n_q"], fc)
    rows = [(str(a), repr(p.value), repr(q.value)) for a, p, q in zip(cmp.alphas, cmp.pt, cmp.det)]
    corr = cmp.correlation
    payload = {"correlation": corr,
               "rows": [{"alpha": r[0], "fisher_pt_hs": float(r[1]), "fisher_det_hs": float(r[2])}
                        for r in rows]}
    summary = [f"{len(rows)} alphas; correlation = "
               + ("undefined" if corr is None else f"{corr:.6f}")]
    plot = (("alpha", "fisher_pt_hs", "fisher_det_hs"),
            [(float(a), p.value, q.value) for a, p, q in zip(cmp.alphas, cmp.pt, cmp.det)])
    res = Result(("alpha", "fisher_pt_hs", "fisher_det_hs"), rows, payload, summary, plot)
    res.meta = {"correlation": "" if corr is None else repr(corr)}
    return res


def _factor_str(factors, cofactor) -> str:
    s = "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in factors) or "1"
    return s if cofactor in (0, 1) else f"{s}*[{cofactor}]"


def cmd_ratfind(cfg) -> Result:
    try:
        parse_decimal(cfg["decimal"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cands = cf_candidates(cfg["decimal"], cfg["max_denominator"], cfg["max_results"])
    if cfg["primes"]:
        cands = smooth_search(cfg["decimal"], cfg["primes"], cfg["max_exponent"], cfg["tol"],
                              max_results=cfg["max_results"]) + cands
    rows = [(c.method, c.value.numerator, c.value.denominator, decimal_str(c.abs_error, 6),
             _factor_str(c.numerator_factorization, c.numerator_cofactor),
             _factor_str(c.denominator_factorization, c.denominator_cofactor)) for c in cands]
    summary = [f"{len(cands)} candidates for {cfg['decimal']}"]
    summary += [f"  {r[0]:<18} {r[1]}/{r[2]}  err {r[3]}  den = {r[5]}" for r in rows[:5]]
    return Result(("method", "numerator", "denominator", "abs_error", "numerator_factors",
                   "denominator_factors"), rows,
                  {"candidates": [c.to_dict() for c in cands]}, summary)


_EXACT = {"pt": moment_pt, "det": moment_det, "balanced": moment_balanced}


def cmd_mc(cfg) -> Result:
    stats = run_mc(cfg["field"], cfg["samples"], cfg["seed"], cfg["orders"],
                   workers=cfg["workers"], chunk_size=cfg["chunk_size"], bins=cfg["bins"])
    alpha = FIELD_ALPHA[stats.field]
    rows = []
    for name, fn in _EXACT.items():
        for n, mean, se in stats.moments[name]:
            exact = fn(alpha, n)
            z = (mean - float(exact)) / se if se > 0 else float("nan")
            rows.append((name, n, repr(mean), repr(se), str(exact), f"{z:.3f}"))
    sep = sep_prob(alpha)
    sep_exact = sep.identified
    z = (float(stats.sep_fraction) - float(sep.partial_sum)) / stats.sep_stderr
    rows.append(("sep_fraction", 0, decimal_str(stats.sep_fraction, 12), repr(stats.sep_stderr),
                 str(sep_exact), f"{z:.3f}"))
    payload = stats.to_dict()
    payload["comparison"] = [dict(zip(("statistic", "order", "mean", "stderr", "exact", "z"), r))
                             for r in rows]
    summary = [f"{stats.field} field, {stats.n_samples} samples, seed {stats.seed}",
               f"  sep_fraction = {decimal_str(stats.sep_fraction, 8)} "
               f"+- {stats.sep_stderr:.2e} (exact {sep_exact}, z = {z:.2f})"]
    worst = max(abs(float(r[5])) for r in rows)
    summary.append(f"  largest |z| over moments and sep_fraction: {worst:.2f}")
    e = stats.histogram_edges
    plot = (("det_pt_bin_center", "count"),
            [((e[i] + e[i + 1]) / 2, c) for i, c in enumerate(stats.histogram_counts)])
    return Result(("statistic", "order", "mean", "stderr", "exact", "z"), rows, payload,
                  summary, plot)


HANDLERS = {
    "moments": cmd_moments,
    "sepprob": cmd_sepprob,
    "reconstruct": cmd_reconstruct,
    "intercept-scan": cmd_intercept_scan,
    "fisher": cmd_fisher,
    "fisher-compare": cmd_fisher_compare,
    "ratfind": cmd_ratfind,
    "mc": cmd_mc,
}


# ---------------------------------------------------------------- dispatch

def run(command: str, cfg: dict) -> Result:
    res = HANDLERS[command](cfg)
    echo = config_echo(command, cfg)
    meta = {} if cfg["no_timestamp"] else \
        {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    meta.update(getattr(res, "meta", {}))
    if cfg["format"] == "json":
        text = render_json(res.payload, echo, meta)
    else:
        text = render_csv(res.header, res.rows, echo, {"schema_version": SCHEMA_VERSION, **meta})
    plot_text = None
    if cfg["plot_data"] and res.plot is not None:
        plot_text = render_csv(res.plot[0], res.plot[1], echo, meta)
    write_atomic(cfg["output"], text)
    if plot_text is not None:
        write_atomic(cfg["plot_data"], plot_text)
    return res


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve(command, args)
        res = run(command, cfg)
    except UsageError as exc:
        print(f"detmoments {command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, NotImplementedError, OSError) as exc:
        print(f"detmoments {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for line in res.summary:
        print(line)
    print(f"wrote {cfg['output']}" + (f" and {cfg['plot_data']}" if cfg["plot_data"] else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
