"""Command-line entry point: ``aaakey <subcommand> [options]``.

Subcommands: sweep, verify, theorem, leakage, compare, simulate.

Values come from, in increasing precedence: built-in defaults, a preset
(``compare`` only), a ``--config`` file, then command-line flags. The
config file is flat ``key = value`` text, ``#`` starts a comment.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import secrets
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baseline, equivocation, keygen, leakage, sources
from .errors import ConfigError, ResourceCapError

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_CAP = 0, 1, 2, 3


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(s).split(",") if x.strip())


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(s).split(",") if x.strip())


def _fmt_floats(v) -> str:
    if isinstance(v, (int, float)):
        return repr(float(v))
    return ",".join(repr(float(x)) for x in v)


# key -> (parse, format)
KEYS = {
    "n": (int, str),
    "L": (int, str),
    "alpha": (float, repr),
    "mu": (_floats, _fmt_floats),
    "S": (int, str),
    "p": (float, repr),
    "M": (int, str),
    "R": (float, repr),
    "gamma_eff": (float, repr),
    "gamma_m": (_floats, _fmt_floats),
    "mu_e_target": (float, repr),
    "l_dist": (str, str),
    "trials": (int, str),
    "seed": (int, str),
    "format": (str, str),
    "out": (str, str),
    "alpha_grid": (str, str),
    "mu_grid": (str, str),
    "eps2_form": (str, str),
    "n_ladder": (_ints, lambda v: ",".join(map(str, v))),
    "n_max": (int, str),
    "sessions": (int, str),
    "preset": (str, str),
    "sweep": (str, str),
}


@dataclass
class ExperimentConfig:
    """Typed key/value parameters for one run; round-trips through :meth:`to_text`."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        vals = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value, got {raw!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            if key not in KEYS:
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
            try:
                vals[key] = KEYS[key][0](val)
            except ValueError as exc:
                raise ConfigError(f"config line {lineno}: bad value for {key}: {exc}") from None
        return cls(vals)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        return "".join(f"{k} = {KEYS[k][1](v)}\n" for k, v in sorted(self.values.items()))

    def merged(self, other: dict) -> "ExperimentConfig":
        vals = dict(self.values)
        vals.update({k: v for k, v in other.items() if v is not None})
        return ExperimentConfig(vals)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


DEFAULTS = {
    "sweep": {"alpha_grid": "lin:0.01,0.99,51", "mu_grid": "lin:0.01,0.99,51", "eps2_form": "published", "format": "csv"},
    "verify": {"n": 6, "trials": 100_000, "format": "csv"},
    "theorem": {"alpha": 0.9, "mu": (0.3,), "n_ladder": (5, 10, 20, 40), "trials": 100_000, "format": "csv"},
    "leakage": {"L": 8, "l_dist": "fixed:1", "n_max": 32, "trials": 10_000, "format": "csv"},
    "compare": {"preset": "wifi"},
    "simulate": {"L": 128, "n": 50, "alpha": 0.5, "mu": (0.3,), "sessions": 100, "format": "json"},
}


def parse_grid(spec: str) -> np.ndarray:
    """``lin:a,b,k`` (k evenly spaced points) or an explicit comma list."""
    s = spec.strip()
    if s.startswith("lin:"):
        a, b, k = s[4:].split(",")
        return np.linspace(float(a), float(b), int(k))
    return np.array(_floats(s))


def parse_range(spec: str) -> tuple[str, list[int]]:
    m = re.fullmatch(r"\s*(\w+)\s*=\s*(\d+)\s*\.\.\s*(\d+)\s*", spec)
    if not m:
        raise ConfigError(f"sweep must look like M=1..100, got {spec!r}")
    lo, hi = int(m[2]), int(m[3])
    if lo > hi:
        raise ConfigError(f"empty range in {spec!r}")
    return m[1], list(range(lo, hi + 1))


def fnum(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fnum(x) for x in r])
    return buf.getvalue()


def _json_clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_json_clean(obj), sort_keys=False) + "\n"


def _emit(text: str, out: str | None):
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write output to {out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _scalar_mu(cfg) -> float | tuple[float, ...]:
    mu = cfg["mu"]
    return mu[0] if len(mu) == 1 else mu


# --------------------------------------------------------------------------
# subcommands; each returns (output text, exit code)

def cmd_sweep(cfg: ExperimentConfig):
    rows = equivocation.sweep_surface(parse_grid(cfg["alpha_grid"]), parse_grid(cfg["mu_grid"]), cfg["eps2_form"])
    summary = equivocation.surface_summary(rows)
    _note("summary " + json.dumps(summary))
    if cfg["format"] == "json":
        text = to_json({"rows": [r.__dict__ for r in rows], "summary": summary})
    else:
        text = to_csv(["alpha", "mu", "eps2", "eps3", "r21", "r32"],
                      [(r.alpha, r.mu, r.eps2, r.eps3, r.r21, r.r32) for r in rows])
    return text, EXIT_OK, summary


def run_verify(n: int, trials: int, seed: int) -> list[dict]:
    """Closed forms vs exact enumeration vs Monte Carlo. One record per check."""
    checks = []
    grid = np.linspace(0.1, 0.9, 9)

    dev2 = max(abs(equivocation.eps2(a, m) - equivocation.exact_eps(2, a, m)) for a in grid for m in grid)
    checks.append({"check": "eps2_vs_exact_9x9", "max_dev": dev2, "threshold": 1e-12, "pass": dev2 < 1e-12})
    dev3 = max(abs(equivocation.eps3(a, m) - equivocation.exact_eps(3, a, m)) for a in grid for m in grid)
    checks.append({"check": "eps3_vs_exact_9x9", "max_dev": dev3, "threshold": 1e-12, "pass": dev3 < 1e-12})

    rng = sources.make_rng(seed, 99)
    triples = rng.uniform(0.05, 0.95, size=(20, 3))
    devA = max(abs(equivocation.eps2(a, m1, m2) - equivocation.exact_eps(2, a, [m1, m2])) for a, m1, m2 in triples)
    checks.append({"check": "eps2_asymmetric_20", "max_dev": devA, "threshold": 1e-12, "pass": devA < 1e-12})

    # informational: the literature eps2 form against the same oracle
    devP = max(abs(equivocation.eps2_published(a, m) - equivocation.exact_eps(2, a, m)) for a in grid for m in grid)
    checks.append({"check": "eps2_published_vs_exact_9x9", "max_dev": devP, "threshold": None, "pass": None})

    worst = 0.0
    ok = True
    for k, (a, m) in enumerate([(a, m) for a in (0.3, 0.7, 0.9) for m in (0.2, 0.5)]):
        ex = equivocation.exact_eps(n, a, m)
        est = equivocation.mc_eps(n, a, m, trials, seed=seed + k)
        z = abs(est.value - ex) / est.std_err if est.std_err > 0 else (0.0 if est.value == ex else math.inf)
        worst = max(worst, z)
        ok &= z <= 4.0
    checks.append({"check": f"mc_vs_exact_n{n}", "max_dev": worst, "threshold": 4.0, "pass": ok, "units": "std_err"})
    return checks


def cmd_verify(cfg: ExperimentConfig):
    checks = run_verify(cfg["n"], cfg["trials"], cfg["seed"])
    failed = any(c["pass"] is False for c in checks)
    if cfg["format"] == "json":
        text = to_json({"checks": checks, "pass": not failed})
    else:
        text = to_csv(["check", "max_dev", "threshold", "result"],
                      [(c["check"], c["max_dev"], "" if c["threshold"] is None else c["threshold"],
                        "info" if c["pass"] is None else ("PASS" if c["pass"] else "FAIL")) for c in checks])
    return text, EXIT_INVALID if failed else EXIT_OK, checks


def cmd_theorem(cfg: ExperimentConfig):
    mu = _scalar_mu(cfg)
    ests = []
    for k, n in enumerate(cfg["n_ladder"]):
        mu_n = mu if isinstance(mu, float) else sources.mu_vector(mu, n)
        ests.append(equivocation.mc_eps(n, cfg["alpha"], mu_n, cfg["trials"], seed=cfg["seed"] + k))
    if cfg["format"] == "json":
        text = to_json([e.to_json() for e in ests])
    else:
        text = to_csv(["n", "eps_hat", "std_err"], [(e.n, e.value, e.std_err) for e in ests])
    return text, EXIT_OK, ests


def cmd_leakage(cfg: ExperimentConfig):
    rows = leakage.estimate_pn(cfg["L"], cfg["l_dist"], cfg["n_max"], cfg["trials"], cfg["seed"])
    if cfg["format"] == "json":
        text = to_json([{"n": n, "p_hat": p, "std_err": s} for n, p, s in rows])
    else:
        text = to_csv(["n", "p_hat", "std_err"], rows)
    return text, EXIT_OK, rows


def _comparison_params(cfg: ExperimentConfig) -> baseline.ComparisonParams:
    over = {k: cfg.get(k) for k in ("S", "p", "M", "R", "gamma_eff", "gamma_m", "mu_e_target")}
    if over["gamma_m"] is not None and len(over["gamma_m"]) == 1:
        over["gamma_m"] = over["gamma_m"][0]
    preset = cfg.get("preset")
    if preset and preset != "none":
        return baseline.preset_params(preset, **over)
    missing = [k for k in ("S", "p", "M", "R") if over[k] is None]
    if missing:
        raise ConfigError(f"compare without a preset needs {', '.join(missing)}")
    g = over["gamma_m"]
    if g is None:
        g = baseline.gamma_for_mu_e(over["R"], over["p"], over["mu_e_target"]) if over["mu_e_target"] else 1.0
    return baseline.ComparisonParams(over["S"], over["p"], over["M"], over["R"], over["gamma_eff"] or 1.0, g)


def cmd_compare(cfg: ExperimentConfig):
    params = _comparison_params(cfg)
    if cfg.get("sweep"):
        var, values = parse_range(cfg["sweep"])
        if var != "M":
            raise ConfigError(f"only M can be swept, got {var!r}")
        rows = baseline.sweep_M(params, values)
        cross = baseline.crossover_M(rows)
        _note(f"crossover_M {cross if cross is not None else 'none'}")
        if cfg.get("format", "csv") == "json":
            text = to_json({"rows": [dict(zip(("M", "L1", "L2", "preferred"), r)) for r in rows], "crossover_M": cross})
        else:
            text = to_csv(["M", "L1", "L2", "preferred"], rows)
        return text, EXIT_OK, {"rows": rows, "crossover_M": cross}
    res = baseline.compare(params)
    if cfg.get("format", "json") == "csv":
        d = res.to_json()
        d["mu_E"] = ";".join(fnum(x) for x in res.mu_E)
        text = to_csv(list(d), [list(d.values())])
    else:
        text = to_json(res.to_json())
    return text, EXIT_OK, res


def cmd_simulate(cfg: ExperimentConfig):
    mu = _scalar_mu(cfg)
    params = sources.MarkovParams(cfg["L"], cfg["n"], cfg["alpha"], mu)
    lines, rows, reports = [], [], []
    for k in range(cfg["sessions"]):
        s = keygen.session_seed(cfg["seed"], k)
        rep = keygen.run_session(params, s)
        reports.append(rep)
        rec = {"session": k, "seed": s, **rep.to_json()}
        lines.append(json.dumps(rec))
        rows.append((k, s, rep.n, rep.alice_key.len, rep.missed_count, rep.alice_key.to_hex(), rep.bob_key.to_hex(), rep.agree))
    if cfg["format"] == "csv":
        text = to_csv(["session", "seed", "n", "L", "missed_count", "alice_key", "bob_key", "agree"], rows)
    else:
        text = "".join(line + "\n" for line in lines)
    ok = all(r.agree for r in reports)
    return text, EXIT_OK if ok else EXIT_INVALID, reports


COMMANDS = {
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "theorem": cmd_theorem,
    "leakage": cmd_leakage,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--seed", type=int, help="master seed; generated and reported when omitted")
    g.add_argument("--trials", type=int, help="Monte Carlo trials")
    g.add_argument("--format", choices=["csv", "json"], help="output format")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--save-config", help="write the effective config (incl. seed) to this file")

    parser = argparse.ArgumentParser(prog="aaakey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="eps2/eps3 surfaces and their ratios")
    p.add_argument("--alpha-grid", dest="alpha_grid", help="lin:a,b,k or comma list")
    p.add_argument("--mu-grid", dest="mu_grid", help="lin:a,b,k or comma list")
    p.add_argument("--eps2-form", dest="eps2_form", choices=["published", "exact"])

    p = sub.add_parser("verify", parents=[common], help="closed form vs exact vs Monte Carlo")
    p.add_argument("--n", type=int, help="packet count for the Monte Carlo check")

    p = sub.add_parser("theorem", parents=[common], help="Monte Carlo equivocation along an n ladder")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=_floats, help="scalar or comma list")
    p.add_argument("--n-ladder", dest="n_ladder", type=_ints, help="e.g. 5,10,20,40")

    p = sub.add_parser("leakage", parents=[common], help="P(rank = L) under partial leakage")
    p.add_argument("--L", type=int)
    p.add_argument("--l-dist", dest="l_dist", help="fixed:k | uniform:a..b | binomial:N,q")
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("compare", parents=[common], help="reciprocal-channel L1 vs AAA L2")
    p.add_argument("--preset", help="wifi | lora | zigbee | none")
    p.add_argument("--S", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--R", type=float)
    p.add_argument("--gamma-eff", dest="gamma_eff", type=float)
    p.add_argument("--gamma-m", dest="gamma_m", type=_floats, help="scalar or one value per period")
    p.add_argument("--mu-e-target", dest="mu_e_target", type=float, help="set gamma_m so Eve misses this fraction")
    p.add_argument("--sweep", help="M=lo..hi, emits M,L1,L2,preferred")

    p = sub.add_parser("simulate", parents=[common], help="two-party key sessions as JSON lines")
    p.add_argument("--L", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=_floats)
    p.add_argument("--sessions", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(dict(DEFAULTS[args.command]))
    if args.config:
        cfg = cfg.merged(ExperimentConfig.load(args.config).values)
    flags = {k: v for k, v in vars(args).items() if k in KEYS}
    cfg = cfg.merged(flags)
    if cfg.get("seed") is None:
        seed = secrets.randbits(32)
        _note(f"seed {seed} (generated; pass --seed {seed} to reproduce)")
        cfg = cfg.merged({"seed": seed})
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.save_config:
            Path(args.save_config).write_text(cfg.to_text())
        t0 = time.perf_counter()
        text, code, _ = COMMANDS[args.command](cfg)
        _emit(text, cfg.get("out"))
        _note(f"{args.command} done in {time.perf_counter() - t0:.2f}s")
        return code
    except ResourceCapError as exc:
        _note(f"error: {exc}")
        return EXIT_CAP
    except OSError as exc:
        _note(f"error: {exc}")
        return EXIT_IO
    except (ConfigError, ValueError, KeyError) as exc:
        _note(f"error: {exc}")
        return EXIT_INVALID


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
