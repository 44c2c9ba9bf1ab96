"""
Command-line front end.

Every subcommand resolves an :class:`ExperimentConfig` from an optional flat
``key=value`` file overridden by flags, validates it, runs the computation and
writes deterministic CSV / JSON / SVG files.  Each file carries the resolved
configuration and the content hash of the moment tables it used.

Exit codes: 0 success, 2 validation error, 3 numerical gate refusal,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import dbar as dbar_mod
from .asymptotics import (ApproxKind, f_n, fit_rate, fixed_error_series, two_point_slope,
                          varying_error_series)
from .equilibrium import (DEFAULT_NODES, sufficient_condition_suite, band_residual, candidate_density,
                          energy, uniform_density)
from .numerics import PrecisionContext, QuadratureError
from .opuc import (OPUCResult, PositivityError, PrecisionGateError, WeightSpec, build_moments,
                   levinson_opuc, required_bits)
from .potentials import PRESETS, JumpFamily, Potential, deformation_weights, from_dict
from .szego import (DomainError, build_fourier, check_condition_convex, check_condition_t,
                    szego_apparatus)
from .zeros import RootFindingError, classify, find_zeros, zero_free_verdict, zeros_svg

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VALIDATION, EXIT_GATE, EXIT_NONCONVERGENCE = 0, 2, 3, 4

SUBCOMMANDS = ("poly", "zeros", "asym", "rates", "dbar", "equil", "conditions", "figure")
FAMILIES = ("Zero", "Cosine", "FourierList", "JumpFamily", "PiecewiseCubic", "Kink")
FIGURES = ("thumbnail", "3jumps", "fluctuation", "spurious", "deformation")
DBAR_MAX_N = 64
# n = 103 puts an f_n zero across the attracting circle within the t range
DEFORMATION_N = 103
NO_MOMENTS = "none"
# sup errors are evaluated in double precision; below this they count as exact
EXACT_FLOOR = 1e-13


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Resolved, validated parameters of one command."""

    command: str
    weight: str = "unit"
    params: Dict[str, str] = field(default_factory=dict)
    mode: str = "fixed"
    n: List[int] = field(default_factory=lambda: [8])
    k: Optional[int] = None
    m: int = 2
    eps: float = 0.5
    sigma: float = 0.5
    bigM: float = 5.0
    delta: float = 0.5
    bits: int = 256
    out: str = "out"
    cache: bool = True
    kinds: List[str] = field(default_factory=list)
    preset: str = "thumbnail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = dict(sorted(self.params.items()))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.bits)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def cache_dir(self) -> Optional[Path]:
        return self.out_dir / "cache" if self.cache else None


def parse_params(text: str) -> Dict[str, str]:
    """``"A=0.3,mode=1"`` -> ``{"A": "0.3", "mode": "1"}``; lists use ``;``."""
    out: Dict[str, str] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ValueError(f"parameter {item!r} is not key=value")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _int_list(text: str) -> List[int]:
    vals = [int(v) for v in str(text).split(",") if v.strip()]
    if not vals:
        raise ValueError("--n needs at least one value")
    return vals


_CONVERTERS: Dict[str, Callable] = {
    "weight": str, "mode": str, "out": str, "preset": str,
    "params": parse_params, "n": _int_list,
    "k": int, "m": int, "bits": int,
    "eps": float, "sigma": float, "bigM": float, "delta": float,
    "kinds": lambda s: [v.strip() for v in str(s).split(",") if v.strip()],
}


def read_config_file(path: str) -> Dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    cfg = ExperimentConfig(args.command)
    layers: List[Dict[str, object]] = []
    if args.config:
        layers.append(dict(read_config_file(args.config)))
    flags = {k: getattr(args, k) for k in _CONVERTERS if getattr(args, k, None) is not None}
    layers.append(flags)
    for layer in layers:
        for key, raw in layer.items():
            if key == "no_cache":
                cfg.cache = str(raw).lower() not in ("1", "true", "yes")
                continue
            if key == "cache":
                cfg.cache = str(raw).lower() in ("1", "true", "yes")
                continue
            if key not in _CONVERTERS:
                raise ValueError(f"unknown configuration key {key!r}")
            conv = _CONVERTERS[key]
            setattr(cfg, key, raw if not isinstance(raw, str) else conv(raw))
    if args.no_cache:
        cfg.cache = False
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    """Check the configuration against module preconditions before any work."""
    if cfg.mode not in ("fixed", "varying"):
        raise ValueError("mode must be 'fixed' or 'varying'")
    if any(n < 1 for n in cfg.n):
        raise ValueError("every n must be >= 1")
    if cfg.bits < 64:
        raise ValueError("bits must be >= 64")
    if cfg.k is not None and cfg.k < 1:
        raise ValueError("k must be >= 1")
    if cfg.m < 1:
        raise ValueError("m must be >= 1")
    if not cfg.eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < cfg.sigma:
        raise ValueError("sigma must be positive")
    if not cfg.bigM > 0:
        raise ValueError("bigM must be positive")
    if cfg.delta < 0:
        raise ValueError("delta must be non-negative")
    if cfg.command == "rates" and len(cfg.n) < 4:
        raise ValueError("rates needs at least four values of n")
    if cfg.command == "dbar" and max(cfg.n) > DBAR_MAX_N:
        raise ValueError(f"dbar is limited to n <= {DBAR_MAX_N}")
    if cfg.command == "figure" and cfg.preset not in FIGURES:
        raise ValueError(f"unknown figure preset {cfg.preset!r}; choose from {FIGURES}")
    for kind in cfg.kinds:
        if kind not in ("gamma", "alpha"):
            ApproxKind(kind)
    make_potential(cfg.weight, cfg.params)


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(";") if v.strip()]


def make_potential(name: str, params: Dict[str, str]) -> Potential:
    """Preset name (``unit``, ``jump3``, ...), ``deform`` or a family tag with parameters."""
    if name in PRESETS:
        if params:
            raise ValueError(f"preset {name!r} takes no parameters")
        return PRESETS[name]()
    if name == "deform":
        t = float(params.get("t", "0.1"))
        return JumpFamily(7, 2, deformation_weights(t))
    if name not in FAMILIES:
        raise ValueError(f"unknown weight {name!r}; presets {sorted(PRESETS)} "
                         f"or families {FAMILIES}")
    d: Dict[str, object] = {"family": name}
    for key, val in params.items():
        if key == "w":
            d[key] = _floats(val)
        elif key == "coefficients":
            d[key] = [(v, 0.0) for v in _floats(val)]
        else:
            d[key] = val
    try:
        return from_dict(d)
    except KeyError as exc:
        raise ValueError(f"weight {name!r} is missing parameter {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

@dataclass
class Writer:
    """Writes files that embed the resolved config and the moment hash."""

    cfg: ExperimentConfig
    written: List[Path] = field(default_factory=list)

    def _path(self, name: str) -> Path:
        self.cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return self.cfg.out_dir / name

    def _put(self, name: str, text: str) -> Path:
        path = self._path(name)
        path.write_text(text)
        self.written.append(path)
        logger.info("wrote %s", path)
        return path

    def csv(self, name: str, body: str, moment_hash: str) -> Path:
        head = f"# config: {self.cfg.to_json()}\n# moment_hash: {moment_hash}\n"
        return self._put(name, head + body)

    def json(self, name: str, payload, moment_hash: str) -> Path:
        doc = {"config": self.cfg.to_dict(), "moment_hash": moment_hash, "result": payload}
        return self._put(name, json.dumps(doc, indent=1, sort_keys=True) + "\n")

    def svg(self, name: str, body: str, moment_hash: str) -> Path:
        meta = f"config: {self.cfg.to_json()} moment_hash: {moment_hash}".replace("--", "- -")
        return self._put(name, f"<!-- {meta} -->\n" + body)


def _rows_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# shared computations
# ---------------------------------------------------------------------------

def compute_poly(cfg: ExperimentConfig, V: Potential, n: int) -> OPUCResult:
    """Polynomials up to degree ``n`` (for varying weights, of ``e^{-nV}``)."""
    w = WeightSpec(V) if cfg.mode == "fixed" else WeightSpec(V, "varying", n)
    return levinson_opuc(build_moments(w, n, cfg.ctx, cache_dir=cfg.cache_dir))


def _tag(cfg: ExperimentConfig) -> str:
    return f"{cfg.weight}-{cfg.mode}"


def _zero_pipeline(cfg: ExperimentConfig, V: Potential, n: int, writer: Writer,
                   stem: str) -> dict:
    res = compute_poly(cfg, V, n)
    k = cfg.k or V.smoothness_k or 1
    zs = find_zeros(res.coeffs[n], cfg.ctx)
    need_sz = isinstance(V, JumpFamily) or cfg.mode == "varying"
    sz = szego_apparatus(V, cfg.ctx) if need_sz else None
    fn = f_n(V, sz, n) if (isinstance(V, JumpFamily) and cfg.mode == "fixed") else None
    cl = classify(zs, fn, k, n, cfg.sigma, cfg.bigM, sz if fn is not None else None, cfg.delta)
    violations = cl.violations if cfg.mode == "fixed" else \
        zero_free_verdict(zs, k, cfg.delta, n, "varying", sz)
    writer.csv(f"{stem}.csv", cl.to_csv(zs), res.moment_hash)
    svg = zeros_svg(zs, n, k if cfg.mode == "fixed" else None, fn, V.jump_angles,
                    title=f"{cfg.weight} n={n}")
    writer.svg(f"{stem}.svg", svg, res.moment_hash)
    summary = {"n": n, "k": k, "zeros": n, "near_circle": cl.count("near_circle"),
               "spurious": cl.count("spurious"), "other": cl.count("other"),
               "violations": len(violations), "ambiguous": len(cl.ambiguous),
               "mean_gap_ratio": _g(cl.mean_gap * n / (2 * math.pi)) if cl.gaps.size else None,
               "max_residual": _g(max(zs.residuals) if zs.residuals else 0.0),
               "spurious_distances": [_g(m.distance) for m in cl.spurious]}
    writer.json(f"{stem}.json", summary, res.moment_hash)
    return summary


def _default_kinds(cfg: ExperimentConfig, V: Potential) -> List[str]:
    if cfg.kinds:
        return list(cfg.kinds)
    if cfg.mode == "varying":
        return [ApproxKind.OUTSIDE_VARYING.value, ApproxKind.CIRCLE_VARYING.value,
                ApproxKind.INSIDE_VARYING.value, "gamma", "alpha"]
    kinds = [ApproxKind.OUTSIDE_FIXED.value, ApproxKind.CIRCLE_FIXED.value,
             ApproxKind.INSIDE_FIXED.value, ApproxKind.INSIDE_DEEP.value]
    if isinstance(V, JumpFamily):
        kinds.append(ApproxKind.JUMP_MODEL.value)
    return kinds + ["gamma", "alpha"]


def _series(cfg: ExperimentConfig, V: Potential) -> Tuple[Dict, str]:
    kinds = _default_kinds(cfg, V)
    ns = sorted(set(cfg.n))
    driver = fixed_error_series if cfg.mode == "fixed" else varying_error_series
    reports = driver(V, ns, kinds, cfg.ctx, cache_dir=cfg.cache_dir)
    return reports, _moment_hash(cfg, V, ns)


def _moment_hash(cfg: ExperimentConfig, V: Potential, ns: Sequence[int]) -> str:
    """Hash of the moment table(s) a series run used (cache hits when caching)."""
    if cfg.mode == "fixed":
        return build_moments(WeightSpec(V), max(ns), cfg.ctx, cfg.cache_dir).content_hash
    return ",".join(build_moments(WeightSpec(V, "varying", n), n, cfg.ctx,
                                  cfg.cache_dir).content_hash for n in ns)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_poly(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    targets = [max(cfg.n)] if cfg.mode == "fixed" else sorted(set(cfg.n))
    for n in targets:
        if cfg.mode == "varying":
            need = required_bits(WeightSpec(V, "varying", n), n)
            if cfg.bits < need:
                raise PrecisionGateError(f"varying weight with n={n} needs at least {need} "
                                         f"bits (have {cfg.bits}); rerun with --bits {need}",
                                         need)
        res = compute_poly(cfg, V, n)
        mp = res.mp
        digits = int(res.bits * math.log10(2)) + 2
        rows = []
        for j in range(n + 1):
            a = res.alpha[j]
            rows.append([j, mp.nstr(res.gamma[j], digits), mp.nstr(a.real, digits),
                         mp.nstr(a.imag, digits), mp.nstr(abs(a), digits),
                         mp.nstr(res.gamma_sq_scaled(j), digits)])
        stem = f"poly-{_tag(cfg)}-n{n}"
        writer.json(f"{stem}.json", json.loads(res.to_json()), res.moment_hash)
        writer.csv(f"{stem}-gamma-alpha.csv",
                   _rows_csv(["n", "gamma", "alpha_re", "alpha_im", "abs_alpha",
                              "gamma_sq_scaled"], rows), res.moment_hash)


def cmd_zeros(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    for n in sorted(set(cfg.n)):
        _zero_pipeline(cfg, V, n, writer, f"zeros-{_tag(cfg)}-n{n}")


def cmd_asym(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    reports, h = _series(cfg, V)
    rows = [[kind, rep.region, e.n, _g(e.sup_error), e.samples]
            for kind, rep in sorted(reports.items()) for e in rep.entries]
    writer.csv(f"asym-{_tag(cfg)}.csv",
               _rows_csv(["kind", "region", "n", "sup_error", "samples"], rows), h)


def cmd_rates(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    reports, h = _series(cfg, V)
    fits = {}
    for kind, rep in sorted(reports.items()):
        writer.csv(f"rates-{_tag(cfg)}-{kind}.csv", rep.to_csv(), h)
        if all(e.sup_error <= EXACT_FLOOR for e in rep.entries):
            fits[kind] = {"status": "exact", "max_error": _g(max(rep.sup_errors))}
            continue
        fit = fit_rate(rep, with_loglog=False)
        entry = json.loads(fit.to_json())
        entry["status"] = "fitted"
        entry["two_point_slope"] = _g(two_point_slope(rep))
        fits[kind] = entry
    writer.json(f"rates-{_tag(cfg)}-fits.json", fits, h)


def cmd_dbar(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    unit = cfg.weight == "unit" or V.tag == "Zero"
    sz = None if unit else szego_apparatus(V, cfg.ctx)
    for nu in (1, 2):
        tab = dbar_mod.verify_keybound(nu, cfg.eps, [16, 32, 64, 128, 256], cfg.ctx)
        body = tab.to_csv() + f"# exponent: {tab.exponent!r}\n"
        writer.csv(f"dbar-keybound-nu{nu}.csv", body, NO_MOMENTS)
    if cfg.mode == "varying" and sz is not None:
        ec = dbar_mod.verify_exponent_control(sz, max(cfg.m, 2), cfg.eps, cfg.ctx)
        writer.json(f"dbar-{_tag(cfg)}-exponent-control.json",
                    {"mu": _g(ec.mu), "holds": ec.holds, "m": ec.m, "epsilon": ec.epsilon},
                    NO_MOMENTS)
    ns = sorted(set(cfg.n))
    summary = []
    for n in ns:
        grid = dbar_mod.AnnulusGrid.default(n, cfg.eps)
        if unit:
            field_ = dbar_mod.unit_field(n, grid)
        else:
            w = WeightSpec(V) if cfg.mode == "fixed" else WeightSpec(V, "varying", n)
            field_ = dbar_mod.build_kernel_field(w, sz, n, cfg.m, grid, cfg.eps)
        sol = dbar_mod.neumann_solve(field_, cfg.ctx)
        writer.csv(f"dbar-{_tag(cfg)}-n{n}-norms.csv", sol.norms_csv(), NO_MOMENTS)
        row = {"n": n, "grid": grid.to_dict(), "deviation": _g(sol.deviation()),
               "first_term": _g(sol.neumann_terms[0]), "terms": len(sol.neumann_terms),
               "det_defect": _g(sol.det_defect())}
        if unit:
            exact = dbar_mod.unit_closed_form(n, grid)
            row["closed_form_error"] = _g(float(abs(sol.samples - exact).max()))
        summary.append(row)
    writer.json(f"dbar-{_tag(cfg)}-summary.json", summary, NO_MOMENTS)


def cmd_equil(cfg: ExperimentConfig, writer: Writer) -> None:
    V = make_potential(cfg.weight, cfg.params)
    sz = szego_apparatus(V, cfg.ctx)
    psi = candidate_density(sz, DEFAULT_NODES)
    rep = band_residual(psi, V, cfg.ctx)
    control = band_residual(uniform_density(DEFAULT_NODES), V, cfg.ctx)
    payload = {"candidate": json.loads(rep.to_json()), "mass": _g(psi.mass()),
               "energy_product_rule": _g(energy(psi, V, cfg.ctx, cells=True)),
               "uniform_control": json.loads(control.to_json()), "nodes": DEFAULT_NODES}
    writer.json(f"equil-{cfg.weight}.json", payload, NO_MOMENTS)


def cmd_conditions(cfg: ExperimentConfig, writer: Writer) -> None:
    rep = sufficient_condition_suite(cfg.ctx)
    bounds = _rows_csv(["k", "t_boundary", "convex_boundary"],
                       [[k, _g(a), _g(b)] for k, a, b in rep.cosine_boundaries])
    writer.csv("conditions-boundaries.csv", bounds, NO_MOMENTS)
    writer.csv("conditions-witnesses.csv", rep.to_csv(), NO_MOMENTS)
    V = make_potential(cfg.weight, cfg.params)
    t = check_condition_t(build_fourier(V, cfg.ctx), V)
    c = check_condition_convex(V, cfg.ctx)
    writer.json(f"conditions-{cfg.weight}.json",
                {"t_sum": _g(t.value), "t_tail": _g(t.tail), "t_holds": t.holds,
                 "inf_Vpp": _g(c.value), "convex_holds": c.holds,
                 "t_not_convex": [r.weight for r in rep.t_not_convex],
                 "convex_not_t": [r.weight for r in rep.convex_not_t]}, NO_MOMENTS)


def figure_plan(preset: str) -> List[Tuple[str, Dict[str, str], int, str]]:
    """``(weight, params, n, stem)`` for each frame of a figure preset."""
    if preset == "thumbnail":
        return [("thumbnail", {}, 104, "figure-thumbnail-n104")]
    if preset == "3jumps":
        return [("jump3", {}, n, f"figure-3jumps-n{n}") for n in (10, 20, 40, 80, 160)]
    if preset == "fluctuation":
        return [(w, {}, n, f"figure-fluctuation-{w}-n{n}")
                for w in ("fluct2", "fluct3") for n in range(60, 67)]
    if preset == "spurious":
        return [(w, {}, n, f"figure-spurious-{w}-n{n}")
                for w, start in (("fluct2", 61), ("fluct3", 62))
                for n in range(start, start + 43, 7)]
    if preset == "deformation":
        return [("deform", {"t": repr(i / 80)}, DEFORMATION_N,
                 f"figure-deformation-t{i:02d}of80") for i in range(2, 14)]
    raise ValueError(f"unknown figure preset {preset!r}")


def cmd_figure(cfg: ExperimentConfig, writer: Writer) -> None:
    frames = []
    for weight, params, n, stem in figure_plan(cfg.preset):
        sub = replace(cfg, weight=weight, params=params, n=[n], mode="fixed", k=None)
        V = make_potential(weight, params)
        frames.append(_zero_pipeline(sub, V, n, Writer(sub, writer.written), stem))
    writer.json(f"figure-{cfg.preset}-index.json", frames, NO_MOMENTS)


COMMANDS: Dict[str, Callable[[ExperimentConfig, Writer], None]] = {
    "poly": cmd_poly, "zeros": cmd_zeros, "asym": cmd_asym, "rates": cmd_rates,
    "dbar": cmd_dbar, "equil": cmd_equil, "conditions": cmd_conditions,
    "figure": cmd_figure,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--weight", help="preset (unit, jump3, thumbnail, fluct2, fluct3, "
                                         "surrogate, deform) or family tag")
    common.add_argument("--params", help="family parameters, e.g. A=0.3,mode=1 or "
                                         "ell=3,k=2,w=-4;-2;-3")
    common.add_argument("--mode", choices=("fixed", "varying"))
    common.add_argument("--n", help="degree or comma-separated degrees")
    common.add_argument("--k", help="smoothness index (defaults to the weight's)")
    common.add_argument("--m", help="extension order")
    common.add_argument("--eps", help="annulus half-width in log r")
    common.add_argument("--sigma", help="annulus slack for zero classification")
    common.add_argument("--bigM", help="level M for the f_n sets")
    common.add_argument("--delta", help="forbidden-region margin")
    common.add_argument("--bits", help="working precision in bits")
    common.add_argument("--out", help="output directory")
    common.add_argument("--no-cache", action="store_true", help="do not read or write "
                                                                "the moment cache")
    common.add_argument("--kinds", help="comma-separated approximant kinds, gamma, alpha")
    common.add_argument("--preset", help=f"figure preset: {', '.join(FIGURES)}")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="opuclab", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"poly": "polynomials, gamma and alpha", "zeros": "zeros, classification, SVG",
             "asym": "approximant sup errors", "rates": "error series and exponent fits",
             "dbar": "dbar Neumann solve and lemma tables", "equil": "band residual report",
             "conditions": "sufficient-condition comparison", "figure": "figure presets"}
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        writer = Writer(cfg)
        COMMANDS[cfg.command](cfg, writer)
    except (PrecisionGateError, dbar_mod.DbarGateError) as exc:
        print(f"gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (RootFindingError, dbar_mod.DbarDivergenceError, QuadratureError,
            PositivityError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, DomainError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in writer.written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
