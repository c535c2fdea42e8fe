"""Batch experiments: each command is a pure function of (config, seed) writing CSV/JSON."""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from .cocycle import StepCocycle, ergodic_sums, lyapunov_estimate, sample_points, zero_hits
from .contfrac import ContinuedFraction
from .errors import PrecisionError, ValidationError
from .iet import (
    IetCocycle,
    RauzyLoop,
    birkhoff_sup_growth,
    iet_ergodic_sums,
    iet_omega,
    iet_sample_points,
    loop_spectrum,
    periodic_iet_from_loop,
)
from .recurrence import OmegaWeight, ck_iet, ck_rotation, divergence_series, zeta_partial
from .reporting import provenance_lines, write_csv, write_json
from .staircase import LevelTower, Summable, forge_alpha, zeta_certificate, zeta_enclosure

EXIT_OK, EXIT_INVALID, EXIT_PRECISION = 0, 2, 3

COMMON = {"experiment", "seed", "out", "horizons", "samples"}
SCHEMA = {
    "generic-recurrence": COMMON | {"alpha", "omega", "levels"},
    "defeat-omega": COMMON | {"eps", "b", "depth", "s_bound", "omega", "N", "tol", "compare_alpha", "levels"},
    "iet-recurrence": COMMON | {"loop", "phi", "bits", "log_depth", "gamma", "levels"},
    "lyapunov": COMMON | {"alpha", "cocycle", "N"},
}
DEFAULTS = {
    "generic-recurrence": {"alpha": ["[2,2,...]"], "omega": {"power": 1.0}, "levels": 20, "samples": 16},
    "defeat-omega": {"eps": 0.75, "b": {"b0": 1.0, "ratio": 0.5}, "depth": 6, "s_bound": 1, "samples": 50,
                     "tol": 1e-3, "compare_alpha": "[2,2,...]", "levels": 40},
    "iet-recurrence": {"loop": {"permutation": [2, 1], "moves": ["top", "bottom"]},
                       "phi": {"values": [1, -1], "cuts": ["1/2"]}, "bits": 256, "log_depth": 2,
                       "gamma": 2.0, "levels": 256, "samples": 16,
                       "horizons": [2**k for k in range(8, 21)]},
    "lyapunov": {"alpha": ["[2,2,...]"], "cocycle": "staircase", "N": 10**6, "samples": 64},
}


def geometric_horizons(N: int, start: int = 1) -> list[int]:
    """start, 2*start, 4*start, ... below N, then N."""
    out, h = [], max(1, start)
    while h < N:
        out.append(h)
        h *= 2
    return out + [N]


# -- config ----------------------------------------------------------------


def _key_line(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if re.search(rf'"{re.escape(key)}"\s*:', line):
            return i
    return None


def load_config(command: str, path: str | None, overrides: dict) -> dict:
    cfg: dict = {}
    text = ""
    if path:
        text = Path(path).read_text()
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(cfg, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
    for key in cfg:
        if key not in SCHEMA[command]:
            where = f"{path}:{_key_line(text, key)}" if path else "config"
            raise ValidationError(f"{where}: unknown key {key!r} for {command}")
    if cfg.get("experiment", command) != command:
        raise ValidationError(f"config is for {cfg['experiment']!r}, not {command!r}")
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    merged = dict(DEFAULTS[command])
    merged.update(cfg)
    merged["experiment"] = command
    if merged.get("seed") is None:
        raise ValidationError("a seed is required (--seed or \"seed\" in the config)")
    if not isinstance(merged["seed"], int):
        raise ValidationError("seed must be an integer")
    merged.setdefault("out", "omegarec-out")
    return merged


def parse_alpha(spec: str) -> ContinuedFraction:
    """Continued-fraction syntax, or ``forged:<eps>:<depth>`` for a forged rotation number."""
    m = re.fullmatch(r"forged:([0-9.]+):(\d+)", spec.strip())
    if m:
        return forge_alpha(float(m.group(1)), Summable(), 1, int(m.group(2))).alpha()
    return ContinuedFraction.parse(spec)


def parse_omega(spec) -> OmegaWeight:
    if isinstance(spec, (int, float)):
        return OmegaWeight(power=float(spec))
    if isinstance(spec, str):
        spec = spec.strip()
        if spec.startswith("{"):
            return OmegaWeight.from_dict(json.loads(spec))
        return OmegaWeight(power=float(spec))
    if isinstance(spec, dict):
        return OmegaWeight.from_dict(spec)
    raise ValidationError(f"cannot read omega spec {spec!r}")


def parse_cocycle(spec: str) -> StepCocycle:
    if spec == "staircase":
        return StepCocycle.staircase()
    m = re.fullmatch(r"const:(-?\d+)", spec)
    if m:
        return StepCocycle.constant(int(m.group(1)))
    raise ValidationError(f"unknown cocycle {spec!r} (staircase | const:<c>)")


def _alphas(cfg) -> list[str]:
    a = cfg["alpha"]
    return [a] if isinstance(a, str) else list(a)


def _horizons(cfg, N: int, start: int = 1) -> list[int]:
    h = cfg.get("horizons")
    if h is None:
        return geometric_horizons(N, start)
    h = [int(v) for v in h]
    if not h or h[0] < 1 or any(b <= a for a, b in zip(h, h[1:])):
        raise ValidationError("horizons must be positive and increasing")
    return h


def _out(cfg) -> Path:
    p = Path(cfg["out"])
    p.mkdir(parents=True, exist_ok=True)
    return p


def _header(cfg) -> list[str]:
    # where results go is not part of the experiment
    return provenance_lines({k: v for k, v in cfg.items() if k != "out"}, cfg["seed"])


# -- commands --------------------------------------------------------------


def cmd_generic_recurrence(cfg: dict) -> dict:
    """C_k table, divergence partial sums with N_k = q_k and rho_k = a_1+...+a_k, and zeta_N curves."""
    out, head = _out(cfg), _header(cfg)
    w = parse_omega(cfg["omega"])
    K = int(cfg["levels"])
    hz = _horizons(cfg, 10**6)
    f = StepCocycle.staircase()
    ck_rows, div_rows, zeta_rows = [], [], []
    for spec in _alphas(cfg):
        cf = parse_alpha(spec)
        cf.ensure(K)
        for k, c in enumerate(ck_rotation(cf, K), start=1):
            ck_rows.append((spec, k, c))
        Ns = [cf.q(k) for k in range(1, K + 1)]
        rhos = [cf.digit_sum(k) for k in range(1, K + 1)]
        for k, s in enumerate(divergence_series(Ns, rhos, w, K), start=1):
            div_rows.append((spec, k, Ns[k - 1], rhos[k - 1], s))
        pts = sample_points(cf, f, int(cfg["samples"]), cfg["seed"], orbit=0)
        for i, x in enumerate(pts):
            trace = ergodic_sums(f, x, hz[-1], cf)
            for N in hz:
                zeta_rows.append((spec, i, x.to_text(), N, zero_hits(trace, N), zeta_partial(trace, w, N)))
    write_csv(out / "ck.csv", ["alpha", "k", "C_k"], ck_rows, head)
    write_csv(out / "divergence.csv", ["alpha", "k", "N_k", "rho_k", "partial_sum"], div_rows, head)
    write_csv(out / "zeta.csv", ["alpha", "sample", "x", "N", "zero_hits", "zeta_N"], zeta_rows, head)
    return {"ck": ck_rows, "divergence": div_rows, "zeta": zeta_rows}


def cmd_defeat_omega(cfg: dict) -> dict:
    """Forge alpha, certify the zeta bound, compare sampled enclosures, and run a generic comparison."""
    out, head = _out(cfg), _header(cfg)
    eps = float(cfg["eps"])
    if eps <= 0.5:
        raise ValidationError("eps must exceed 1/2")
    b = Summable.parse(cfg["b"])
    depth = int(cfg["depth"])
    params = forge_alpha(eps, b, int(cfg["s_bound"]), depth)
    w = parse_omega(cfg["omega"]) if cfg.get("omega") is not None else OmegaWeight(power=eps)
    cf = params.alpha()
    N = int(cfg.get("N") or cf.q(2 * depth))
    tower = LevelTower(params)
    cert = zeta_certificate(params, eps, w, N, b, tower)
    rows = []
    for i, x in enumerate(sample_points(cf, StepCocycle.staircase(), int(cfg["samples"]), cfg["seed"], orbit=0)):
        enc = zeta_enclosure(params, x, N, w, float(cfg["tol"]), tower)
        rows.append((i, x.to_text(), N, enc.zero_hits, enc.lower, enc.upper, cert.value, enc.upper <= cert.value))
    write_csv(out / "zeta.csv", ["sample", "x", "N", "zero_hits", "zeta_lower", "zeta_upper", "certificate",
                                 "below_certificate"], rows, head)
    ccf = parse_alpha(cfg["compare_alpha"])
    K = int(cfg["levels"])
    Ns = [ccf.q(k) for k in range(1, K + 1)]
    rhos = [ccf.digit_sum(k) for k in range(1, K + 1)]
    comp = divergence_series(Ns, rhos, w, K)
    comp_rows = [(cfg["compare_alpha"], k, s, s > cert.value) for k, s in enumerate(comp, start=1)]
    write_csv(out / "comparison.csv", ["alpha", "k", "partial_sum", "exceeds_certificate"], comp_rows, head)
    write_csv(out / "certificate_levels.csv", ["level", "q", "windows", "hits", "bound"],
              [(d["level"], d["q"], d["windows"], d["hits"], d["bound"]) for d in cert.levels], head)
    report = {
        "provenance": head,
        "eps": eps,
        "pairs": [[str(r), s] for r, s in params.pairs],
        "digits": [str(d) for d in cf.digits(2 * depth)],
        "N": str(N),
        "omega": w.as_dict(),
        "certificate": cert.value,
        "bound_sum": cert.bound_sum,
        "margin": cert.margin,
        "max_zeta_upper": max((r[5] for r in rows), default=None),
        "all_below_certificate": all(r[7] for r in rows),
        "comparison_final": comp[-1] if comp else None,
    }
    write_json(out / "defeat_omega.json", report)
    return {"report": report, "zeta": rows, "comparison": comp_rows, "params": params}


def cmd_iet_recurrence(cfg: dict) -> dict:
    """Spectrum, sup-growth table, C_k table and zeta_N curves for a periodic-type IET."""
    out, head = _out(cfg), _header(cfg)
    loop = RauzyLoop.from_json(cfg["loop"])
    spec = loop_spectrum(loop)
    iet = periodic_iet_from_loop(loop, int(cfg["bits"]))
    phi = IetCocycle.from_dict(cfg["phi"])
    hz = _horizons(cfg, 10**6)
    fit = birkhoff_sup_growth(iet, phi, hz, int(cfg["samples"]), cfg["seed"])
    write_csv(out / "spectrum.csv", ["theta1", "theta2", "M_jordan", "m", "growth_exponent"],
              [(spec.theta1, spec.theta2, spec.m_jordan, spec.m_intervals, fit.exponent)], head)
    write_csv(out / "growth.csv", ["horizon", "max_abs_sum"], fit.rows(), head)
    K = int(cfg["levels"])
    cks = ck_iet(spec.theta1, spec.theta2, spec.m_jordan, float(cfg["gamma"]), 2 * K)
    ck_rows = [(k, cks[k - 1], abs(cks[2 * k - 1] - cks[k - 1])) for k in range(1, K + 1)]
    write_csv(out / "ck.csv", ["k", "C_k", "abs_C_2k_minus_C_k"], ck_rows, head)
    w = iet_omega(spec, int(cfg["log_depth"]))
    zeta_rows = []
    for i, x in enumerate(iet_sample_points(int(cfg["samples"]), cfg["seed"])):
        trace = iet_ergodic_sums(iet, phi, x, hz[-1])
        for N in hz:
            zeta_rows.append((i, str(x), N, zero_hits(trace, N), zeta_partial(trace, w, N)))
    write_csv(out / "zeta.csv", ["sample", "x", "N", "zero_hits", "zeta_N"], zeta_rows, head)
    return {"spectrum": spec, "fit": fit, "ck": ck_rows, "zeta": zeta_rows}


def cmd_lyapunov(cfg: dict) -> dict:
    """Growth exponent of max |S_n| for each alpha; horizons default to ratio 2 over [sqrt N, N]."""
    out, head = _out(cfg), _header(cfg)
    f = parse_cocycle(cfg["cocycle"])
    N = int(cfg["N"])
    hz = _horizons(cfg, N, math.isqrt(N))
    rows, table = [], []
    for spec in _alphas(cfg):
        fit = lyapunov_estimate(f, parse_alpha(spec), hz, int(cfg["samples"]), cfg["seed"])
        rows.append((spec, fit.slope))
        table.extend((spec, h, m) for h, m in zip(fit.horizons, fit.max_sums))
    write_csv(out / "lyapunov.csv", ["alpha", "slope"], rows, head)
    write_csv(out / "lyapunov_table.csv", ["alpha", "horizon", "max_abs_sum"], table, head)
    return {"slopes": dict(rows), "table": table}


COMMANDS = {
    "generic-recurrence": cmd_generic_recurrence,
    "defeat-omega": cmd_defeat_omega,
    "iet-recurrence": cmd_iet_recurrence,
    "lyapunov": cmd_lyapunov,
}


def run(command: str, config_path: str | None = None, **overrides) -> dict:
    return COMMANDS[command](load_config(command, config_path, overrides))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omegarec", description="Recurrence experiments for skew products.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=COMMANDS[name].__doc__.splitlines()[0])
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--horizons", help="comma-separated increasing integers")
        p.add_argument("--samples", type=int)
        if name in ("generic-recurrence", "lyapunov"):
            p.add_argument("--alpha", action="append", help="continued fraction, gauss:<seed>:<depth> "
                                                            "or forged:<eps>:<depth>; repeatable")
        if name in ("generic-recurrence", "defeat-omega"):
            p.add_argument("--omega", help="power z for n^-z, or a JSON weight object")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "out": args.out, "samples": args.samples,
                 "alpha": getattr(args, "alpha", None), "omega": getattr(args, "omega", None)}
    try:
        if args.horizons:
            try:
                overrides["horizons"] = [int(v) for v in args.horizons.split(",")]
            except ValueError as exc:
                raise ValidationError(f"bad --horizons {args.horizons!r}") from exc
        run(args.command, args.config, **overrides)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
