"""Command-line entry point: ``cev-wkb <subcommand> [flags]``.

Every subcommand starts from the reference configuration (S0=100, E=110,
r=0.03, T=1, mu=0.03, sigma=0.3, alpha=-0.5), applies the optional JSON
``--config`` file and then the explicit flags.  Prices and kernel
evaluations are printed as JSON, sweeps and convergence series as CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, fields, replace

from .core import CevParams, MarketSpec, stock_to_feller
from .errors import NumericConvergenceError, ParameterDomainError
from .black_scholes import bs_call_closed, bs_call_quadrature
from .kernel import wkb_kernel
from .montecarlo import McConfig, mc_call_price, mc_convergence_curve
from .pricing import QuadConfig, cev_call_price_detailed
from .sweep import AXES, REFERENCE_CEV, REFERENCE_MARKET, SweepSpec, run_sweep
from .verify import LEVELS, run_verify

EXIT_OK, EXIT_VERIFY, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3

# flag dest -> (config section, field name)
FLAG_FIELDS = {
    "s0": ("market", "s0"), "strike": ("market", "strike"), "rate": ("market", "rate"),
    "maturity": ("market", "maturity"),
    "mu": ("cev", "mu"), "sigma": ("cev", "sigma"), "alpha": ("cev", "alpha"),
    "paths": ("mc", "n_paths"), "steps_per_year": ("mc", "steps_per_year"), "seed": ("mc", "seed"),
    "rel_tol": ("quad", "rel_tol"),
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON file with sections market, cev, mc, quad")
    for flag in ("s0", "strike", "rate", "maturity", "mu", "sigma", "alpha", "rel_tol"):
        g.add_argument("--" + flag.replace("_", "-"), dest=flag, type=float)
    g.add_argument("--paths", type=int, help="number of MC paths (rounded up to an even count)")
    g.add_argument("--steps-per-year", dest="steps_per_year", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="write output here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="cev-wkb", description="WKB pricing of CEV calls")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("price-bs", parents=[common], help="Black-Scholes call, closed form and quadrature")
    sub.add_parser("price-cev", parents=[common], help="CEV call from the WKB kernel")
    sub.add_parser("mc-price", parents=[common], help="Monte Carlo CEV call")
    k = sub.add_parser("kernel", parents=[common], help="WKB kernel decomposition at (x, x_T, T)")
    k.add_argument("--x", type=float, required=True)
    k.add_argument("--x-t", dest="x_t", type=float, required=True)
    k.add_argument("--stock", action="store_true",
                   help="read --x and --x-t as stock prices instead of Feller coordinates")
    s = sub.add_parser("sweep", parents=[common], help="WKB vs MC along one parameter axis")
    s.add_argument("--axis", choices=AXES, required=True)
    s.add_argument("--values", default="", help="comma-separated ascending values")
    c = sub.add_parser("convergence", parents=[common], help="running MC estimate vs path count")
    c.add_argument("--checkpoints", required=True, help="comma-separated ascending path counts")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    v.add_argument("--level", choices=LEVELS, default="fast")
    return parser


def _float_list(text: str):
    return [float(t) for t in text.split(",") if t.strip()]


def load_config(args) -> dict:
    """Merge reference defaults, the JSON file and explicit flags."""
    cfg = {"market": asdict(REFERENCE_MARKET), "cev": asdict(REFERENCE_CEV),
           "mc": {"n_paths": 100_000}, "quad": {}}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(cfg)
        if unknown:
            raise ParameterDomainError(f"unknown config sections {sorted(unknown)}")
        for section, values in data.items():
            cfg[section].update(values)
    for dest, (section, name) in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            cfg[section][name] = value
    return cfg


def _mc_config(section: dict) -> McConfig:
    section = dict(section)
    if "n_paths" in section:
        n = int(section.pop("n_paths"))
        if n < 2:
            raise ParameterDomainError(f"paths must be >= 2, got {n}")
        section["n_pairs"] = (n + 1) // 2
    allowed = {f.name for f in fields(McConfig)}
    bad = set(section) - allowed
    if bad:
        raise ParameterDomainError(f"unknown mc keys {sorted(bad)}")
    return McConfig(**section)


def resolve(cfg: dict):
    """``(MarketSpec, CevParams, McConfig, QuadConfig)`` from a merged config."""
    try:
        m = MarketSpec(**cfg["market"])
        p = CevParams(**cfg["cev"])
        q = QuadConfig(**cfg["quad"])
    except TypeError as exc:
        raise ParameterDomainError(str(exc)) from None
    return m, p, _mc_config(cfg["mc"]), q


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _run(args) -> int:
    cfg = load_config(args)
    m, p, mc, q = resolve(cfg)
    cmd = args.command
    if cmd == "price-bs":
        _emit(_json({"closed_form": bs_call_closed(m, p.sigma),
                     "quadrature": bs_call_quadrature(m, p.sigma, min(q.rel_tol, 1e-3))}), args.out)
    elif cmd == "price-cev":
        r = cev_call_price_detailed(m, p, q)
        _emit(_json(asdict(r)), args.out)
    elif cmd == "mc-price":
        _emit(_json(asdict(mc_call_price(m, p, mc)) | {"n_paths": mc.n_paths, "seed": mc.seed}), args.out)
    elif cmd == "kernel":
        x, x_t = args.x, args.x_t
        if args.stock:
            x, x_t = float(stock_to_feller(x, p)), float(stock_to_feller(x_t, p))
        ev = wkb_kernel(x, x_t, p.feller, m.maturity)
        c = ev.constants
        _emit(_json({"x": x, "x_T": x_t, "T": m.maturity, "value": ev.value,
                     "log_value": ev.log_value, "action": ev.action,
                     "exp_factor_integral": ev.exp_factor_integral, "vvm": ev.vvm,
                     "constants": {"d1": c.d1, "d2": c.d2, "d": c.d, "b": c.b}}), args.out)
    elif cmd == "sweep":
        spec = SweepSpec(args.axis, tuple(_float_list(args.values)), m, p)
        buf = io.StringIO()
        run_sweep(spec, mc, q, out=buf)
        _emit(buf.getvalue(), args.out)
    elif cmd == "convergence":
        checkpoints = [int(v) for v in _float_list(args.checkpoints)]
        wkb = cev_call_price_detailed(m, p, q).price
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_paths", "mc_mean", "mc_std_error", "wkb_price"])
        # the path stream is prefix-consistent, so simulating only up to the
        # last checkpoint gives the same numbers as any longer run
        mc = replace(mc, n_pairs=(max(checkpoints, default=2) + 1) // 2)
        for n, mean, se in mc_convergence_curve(m, p, mc, checkpoints):
            w.writerow([n, format(mean, ".17g"), format(se, ".17g"), format(wkb, ".17g")])
        _emit(buf.getvalue(), args.out)
    elif cmd == "verify":
        report = run_verify(args.level)
        _emit(report.format() + "\n", args.out)
        return EXIT_OK if report.passed else EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ParameterDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
