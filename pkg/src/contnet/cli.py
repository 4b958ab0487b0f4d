"""Command-line front end and reproducibility harness.

Subcommands: discretize, mi, converge, region, md-ssc, gaussian, selfcheck.
Model inputs are JSON documents; tabular outputs are UTF-8 CSV with ``\\n``
line endings, shortest-round-trip float formatting and a comment header
(tool version, config hash, seed).  Exit codes: 0 success, 2 config
validation error, 3 numerical failure, 64 usage error.

``CONTNET_THREADS`` (or --threads) bounds worker threads for sweep cells;
results are written into an indexed buffer and serialized in index order,
so outputs are byte-identical at any parallelism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from contnet import __version__
from contnet.errors import ConfigError, ContnetError, InfeasibleError, QuadratureError
from contnet.densities import (
    AdditiveGaussian,
    Constant,
    Gaussian,
    Gaussian2D,
    MarkovModel,
    Mixture,
    Product2D,
    Tabulated,
    Triangular,
    Uniform,
)
from contnet.grids import ClipSpec, GridSpec, SmoothSpec
from contnet.pmf import JointPmf

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64


# ---------------------------------------------------------------------------
# output plumbing


def fmt_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same binary float."""
    return repr(float(x))


def emit_csv(path: str, header: list[str], rows, meta: dict) -> None:
    lines = [f"# contnet {__version__}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {meta[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(path, f"cannot read config: {e}")


def need(cfg: dict, key: str, types, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where}.{key}", "missing required key")
    val = cfg[key]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"{where}.{key}", f"expected {types}, got {type(val).__name__}")
    return val


def parallel_map(fn, items, threads: int):
    """Deterministic parallel map: indexed result buffer, input order kept."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    out = [None] * len(items)

    def run(i):
        out[i] = fn(items[i])

    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(run, range(len(items))))
    return out


def thread_count(args) -> int:
    if getattr(args, "threads", None):
        return max(1, int(args.threads))
    env = os.environ.get("CONTNET_THREADS", "")
    return max(1, int(env)) if env.isdigit() else 1


# ---------------------------------------------------------------------------
# config -> model builders


def build_density(cfg: dict, where: str = "density"):
    kind = need(cfg, "kind", str, where)
    if kind == "gaussian":
        return Gaussian(float(cfg.get("mean", 0.0)), float(need(cfg, "sigma", (int, float), where)))
    if kind == "uniform":
        return Uniform(float(need(cfg, "a", (int, float), where)), float(need(cfg, "b", (int, float), where)))
    if kind == "triangular":
        return Triangular(float(need(cfg, "a", (int, float), where)), float(need(cfg, "b", (int, float), where)))
    if kind == "mixture":
        weights = tuple(float(w) for w in need(cfg, "weights", list, where))
        comps = tuple(build_density(c, f"{where}.components") for c in need(cfg, "components", list, where))
        return Mixture(weights, comps)
    if kind == "tabulated":
        return Tabulated(tuple(need(cfg, "xs", list, where)), tuple(need(cfg, "fs", list, where)))
    raise ConfigError(f"{where}.kind", f"unknown density kind {kind!r}")


def build_density2d(cfg: dict, where: str = "source"):
    kind = need(cfg, "kind", str, where)
    if kind == "gaussian2d":
        return Gaussian2D(
            float(cfg.get("mean_x", 0.0)),
            float(cfg.get("mean_y", 0.0)),
            float(cfg.get("sigma_x", 1.0)),
            float(cfg.get("sigma_y", 1.0)),
            float(cfg.get("rho", 0.0)),
        )
    if kind == "product":
        return Product2D(build_density(need(cfg, "x", dict, where), f"{where}.x"),
                         build_density(need(cfg, "y", dict, where), f"{where}.y"))
    raise ConfigError(f"{where}.kind", f"unknown 2-D source kind {kind!r}")


def build_channel(cfg: dict, where: str = "channel"):
    kind = need(cfg, "kind", str, where)
    if kind == "additive_gaussian":
        return AdditiveGaussian(float(need(cfg, "sigma", (int, float), where)), float(cfg.get("gain", 1.0)))
    if kind == "constant":
        return Constant(float(need(cfg, "value", (int, float), where)))
    raise ConfigError(f"{where}.kind", f"unknown channel kind {kind!r}")


def build_clip(cfg: dict, where: str = "clip") -> ClipSpec:
    return ClipSpec(
        float(need(cfg, "l", (int, float), where)),
        float(need(cfg, "u", (int, float), where)),
        need(cfg, "mode", str, where),
    )


def build_grid(cfg: dict, where: str = "grid") -> GridSpec:
    return GridSpec(int(need(cfg, "n", int, where)))


def load_pmf(cfg, where: str = "pmf") -> JointPmf:
    if isinstance(cfg, str):
        with open(cfg, "r", encoding="utf-8") as fh:
            return JointPmf.from_document(json.load(fh))
    if isinstance(cfg, dict):
        return JointPmf.from_document(cfg)
    raise ConfigError(where, "expected a path or an inline pmf document")


# ---------------------------------------------------------------------------
# subcommands


def cmd_discretize(args) -> int:
    cfg = load_config(args.config)
    d = build_density(need(cfg, "density", dict))
    clip = build_clip(need(cfg, "clip", dict))
    grid = build_grid(need(cfg, "grid", dict))
    from contnet.discretize import discretize_1d, smooth_density

    if "smooth" in cfg:
        eps = float(need(cfg["smooth"], "eps", (int, float), "smooth"))
        d = smooth_density(d, SmoothSpec(eps))
    pmf = discretize_1d(d, clip, grid, str(cfg.get("name", "x")))
    doc = pmf.to_document()
    doc["_meta"] = {
        "tool": f"contnet {__version__}",
        "config_hash": config_hash(cfg),
        "seed": int(args.seed),
    }
    out = json.dumps(doc)
    if args.out == "-":
        sys.stdout.write(out + "\n")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    return EXIT_OK


def cmd_mi(args) -> int:
    pmf = load_pmf(args.pmf)
    groups = [tuple(g.split(",")) for g in args.groups.split(";")]
    meta = {"config_hash": config_hash({"pmf": args.pmf, "groups": args.groups}), "seed": args.seed}
    if len(groups) == 1:
        value = pmf.entropy(groups[0])
        emit_csv(args.out, ["quantity", "bits"], [("entropy", float(value))], meta)
    elif len(groups) == 2:
        value = pmf.mutual_information(groups[0], groups[1])
        emit_csv(args.out, ["quantity", "bits"], [("mutual_information", float(value))], meta)
    elif len(groups) == 3:
        value = pmf.conditional_mi(groups[0], groups[1], groups[2])
        emit_csv(args.out, ["quantity", "bits"], [("conditional_mi", float(value))], meta)
    else:
        raise ConfigError("groups", "expected 1-3 ';'-separated axis groups")
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = load_config(args.config)
    from contnet.convergence import Schedule, mi_trace
    from contnet.gaussian import GaussianSpec, gaussian_mi

    source = build_density2d(need(cfg, "source", dict))
    ch_u = build_channel(need(cfg, "channel_u", dict), "channel_u")
    ch_v = build_channel(need(cfg, "channel_v", dict), "channel_v")
    model = MarkovModel(source, ch_u, ch_v)
    sched = Schedule([tuple(p) for p in need(cfg, "schedule", list)])
    tag = need(cfg, "tag", str)
    oracle = cfg.get("oracle")
    if oracle is None:
        oracle = _auto_oracle(source, ch_u, ch_v, tag)
    trace = mi_trace(model, tag, sched, float(oracle), cfg.get("tolerance"))
    rows = [
        (int(n), float(l), float(u), float(e), float(v), float(abs(v - trace.target)))
        for (n, l, u, e), v in zip(sched.points, trace.values)
    ]
    meta = {"config_hash": config_hash(cfg), "seed": args.seed,
            "tag": tag, "oracle": fmt_float(trace.target), "verdict": trace.verdict}
    emit_csv(args.out, ["n", "l", "u", "eps", "value", "abs_err"], rows, meta)
    return EXIT_OK


def _auto_oracle(source, ch_u, ch_v, tag: str) -> float:
    from contnet.gaussian import GaussianSpec, gaussian_mi

    if not isinstance(source, Gaussian2D):
        raise ConfigError("oracle", "auto oracle requires a gaussian2d source")
    sx, sy, rho = source.sigma_x, source.sigma_y, source.rho
    cxy = rho * sx * sy
    cov = np.asarray([[sx * sx, cxy], [cxy, sy * sy]])
    gains, sig2 = [], []
    for ch in (ch_u, ch_v):
        if not isinstance(ch, AdditiveGaussian):
            raise ConfigError("oracle", "auto oracle requires additive_gaussian channels")
        gains.append(ch.gain)
        sig2.append(ch.sigma**2)
    # cov of (X, Y, U, V) with S = U + V appended
    cuu = gains[0] ** 2 * cov[0, 0] + sig2[0]
    cvv = gains[1] ** 2 * cov[1, 1] + sig2[1]
    cuv = gains[0] * gains[1] * cov[0, 1]
    c4 = np.array(
        [
            [cov[0, 0], cov[0, 1], gains[0] * cov[0, 0], gains[1] * cov[0, 1]],
            [cov[0, 1], cov[1, 1], gains[0] * cov[0, 1], gains[1] * cov[1, 1]],
            [gains[0] * cov[0, 0], gains[0] * cov[0, 1], cuu, cuv],
            [gains[1] * cov[0, 1], gains[1] * cov[1, 1], cuv, cvv],
        ]
    )
    lam5 = np.vstack([np.eye(4), [0.0, 0.0, 1.0, 1.0]])
    c5 = lam5 @ c4 @ lam5.T
    spec = GaussianSpec((0,) * 5, c5, ("X", "Y", "U", "V", "S"))
    pairs = {
        "xy": ("X", "Y"),
        "xu": ("X", "U"),
        "yv": ("Y", "V"),
        "uv": ("U", "V"),
        "su": ("S", "U"),
        "sv": ("S", "V"),
        "suy": (("S", "Y"), "U"),
    }
    if tag not in pairs:
        raise ConfigError("tag", f"unknown tag {tag!r}")
    a, b = pairs[tag]
    return gaussian_mi(spec, a, b)


def cmd_region(args) -> int:
    cfg = load_config(args.config)
    from contnet import regions

    pmf = load_pmf(need(cfg, "pmf", (str, dict)))
    roles = need(cfg, "roles", dict)
    model = regions.LabeledModel(pmf, roles, _build_recon(cfg.get("recon", {})),
                                 _build_distortion(cfg.get("distortion")),
                                 _build_cost(cfg.get("cost")))
    kind = args.kind
    scalars: list[tuple[str, float]] = []
    if kind == "wz":
        rate, dist = regions.wz_rate(model)
        scalars = [("rate", rate), ("distortion", dist)]
        system = None
    elif kind == "gp":
        rate, cost = regions.gp_rate(model)
        scalars = [("rate", rate), ("cost", cost)]
        system = None
    elif kind == "dbc":
        system, cost = regions.dbc_region(model)
        scalars = [("cost", cost)]
    elif kind == "bt":
        system, d1, d2 = regions.berger_tung_region(model)
        scalars = [("d1", d1), ("d2", d2)]
    elif kind == "thu":
        system, dist = regions.two_help_one_region(model)
        scalars = [("distortion", dist)]
    elif kind == "mac":
        system = regions.mac_compute_region(model)
    elif kind == "ic":
        system = regions.ic_3to1_region(model)
    else:
        raise ConfigError("region", f"unknown region {kind!r}")

    lines = [f"# contnet {__version__}", f"# config_hash: {config_hash(cfg)}", f"# seed: {args.seed}"]
    for name, val in scalars:
        lines.append(f"{name} = {fmt_float(val)}")
    if system is not None:
        lines.append(system.pretty())
        if args.check:
            point = [float(v) for v in args.check]
            lines.append(f"contains({point}) = {system.contains(point)}")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def _build_recon(cfg: dict):
    out = {}
    for name, spec in cfg.items():
        kind = need(spec, "kind", str, f"recon.{name}")
        if kind == "select":
            k = int(need(spec, "arg", int, f"recon.{name}"))
            out[name] = lambda *vals, _k=k: vals[_k]
        elif kind == "linear":
            coeffs = [float(c) for c in need(spec, "coeffs", list, f"recon.{name}")]
            const = float(spec.get("const", 0.0))
            out[name] = lambda *vals, _c=coeffs, _b=const: sum(c * v for c, v in zip(_c, vals)) + _b
        elif kind == "difference":
            out[name] = lambda a, b: a - b
        else:
            raise ConfigError(f"recon.{name}.kind", f"unknown recon kind {kind!r}")
    return out


def _build_distortion(cfg):
    if cfg is None:
        return None
    kind = need(cfg, "kind", str, "distortion")
    if kind == "squared":
        return lambda *vals: (vals[0] - vals[-1]) ** 2
    raise ConfigError("distortion.kind", f"unknown distortion kind {kind!r}")


def _build_cost(cfg):
    if cfg is None:
        return None
    kind = need(cfg, "kind", str, "cost")
    if kind == "power":
        return lambda *vals: vals[0] ** 2
    raise ConfigError("cost.kind", f"unknown cost kind {kind!r}")


def cmd_mdssc(args) -> int:
    cfg = load_config(args.config)
    from contnet.mdssc import (
        MdModel,
        StructuredTriple,
        min_rate,
        rate_feasible,
        structured_constraints,
        unstructured_constraints,
    )
    from contnet.sperner import SpernerFamily

    pmf = load_pmf(need(cfg, "pmf", (str, dict)))
    source = tuple(need(cfg, "source", list))
    u_axes = {}
    for item in cfg.get("families", []):
        fam = SpernerFamily([tuple(mm) for mm in need(item, "members", list, "families[]")])
        u_axes[fam] = need(item, "axis", str, "families[]")
    structured = None
    if "structured" in cfg:
        sc = cfg["structured"]
        structured = StructuredTriple(
            SpernerFamily([tuple(mm) for mm in need(sc, "a_in", list, "structured")]),
            SpernerFamily([tuple(mm) for mm in need(sc, "a_out", list, "structured")]),
            SpernerFamily([tuple(mm) for mm in need(sc, "a_sum", list, "structured")]),
            need(sc, "v_in", str, "structured"),
            need(sc, "v_out", str, "structured"),
            need(sc, "w", str, "structured"),
        )
    model = MdModel(source=source, u_axes=u_axes, structured=structured,
                    ell=int(cfg.get("ell", 3)), pmf=pmf)
    if structured is not None:
        sys_c = structured_constraints(model, experimental=bool(cfg.get("experimental", False)))
    else:
        sys_c = unstructured_constraints(model)

    lines = [f"# contnet {__version__}", f"# config_hash: {config_hash(cfg)}", f"# seed: {args.seed}"]
    if args.check:
        rates = [float(v) for v in args.check]
        lines.append(f"feasible({rates}) = {rate_feasible(sys_c, rates)}")
    if args.minimize:
        fixed = {}
        for item in args.fix or []:
            k, v = item.split("=")
            fixed[k] = float(v)
        val = min_rate(sys_c, args.minimize, fixed=fixed or None)
        lines.append(f"min {args.minimize} = {fmt_float(val)}")
    lines.append(sys_c.pretty())
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_gaussian(args) -> int:
    from contnet import gaussian as G

    meta = {"seed": args.seed}
    threads = thread_count(args)
    if args.figure == "mac":
        cfg = {"p1": args.p1, "p2": args.p2, "n0": args.n0}
        meta["config_hash"] = config_hash(cfg)
        g = G.mac_gaussian(args.p1, args.p2, args.n0)
        rows = [(g.p1, g.p2, g.n0, g.structured_sum, g.unstructured_sum, int(g.crossover))]
        emit_csv(args.out, ["p1", "p2", "n0", "structured_sum", "unstructured_sum", "crossover"], rows, meta)
    elif args.figure == "thu":
        cfg = {"rho": args.rho, "c": args.c, "d": args.d}
        meta["config_hash"] = config_hash(cfg)
        lat = G.thu_lattice(args.rho, args.c, args.d)
        bt = G.thu_bt_min_sumrate(args.rho, args.c, args.d)
        rows = [(args.rho, args.c, args.d, lat.sum_rate_symmetric, bt, max(0.0, bt - lat.sum_rate_symmetric))]
        emit_csv(args.out, ["rho", "c", "d", "lattice_sum", "bt_min_sum", "gain_bits"], rows, meta)
    elif args.figure == "fig-rhocrange":
        rhos = np.linspace(args.rho_min, args.rho_max, args.steps)
        cs = np.linspace(args.c_min, args.c_max, args.steps)
        ds = [float(t) for t in args.d_list.split(",")]
        cfg = {"rhos": list(map(float, rhos)), "cs": list(map(float, cs)), "ds": ds}
        meta["config_hash"] = config_hash(cfg)

        def cell(rc):
            rho, c = rc
            gain = 0.0
            for d in ds:
                s2 = 1.0 + c * c - 2.0 * rho * c
                if d >= s2:
                    continue
                try:
                    bt = G.thu_bt_min_sumrate(rho, c, d)
                except InfeasibleError:
                    continue
                gain = max(gain, bt - math.log2(2.0 * s2 / d))
            return (float(rho), float(c), float(max(0.0, gain)))

        cells = [(r, c) for r in rhos for c in cs]
        rows = parallel_map(cell, cells, threads)
        emit_csv(args.out, ["rho", "c", "gain_bits"], rows, meta)
    elif args.figure == "fig-ic":
        a = np.round(np.arange(args.a_min, args.a_max + 1e-12, args.a_step), 12)
        p = np.round(np.arange(args.p_step, args.p_max + 1e-12, args.p_step), 12)
        cfg = {"a": [float(a[0]), float(a[-1]), args.a_step], "p": [float(p[0]), float(p[-1]), args.p_step]}
        meta["config_hash"] = config_hash(cfg)
        masks = G.ic_gaussian_masks(a, p)
        ps_struct = masks.min_feasible_p("structured")
        ps_unstr = masks.min_feasible_p("unstructured")
        rows = [
            (
                float(a[i]),
                int(masks.structured[i].any()),
                int(masks.unstructured[i].any()),
                float(ps_struct[i]) if np.isfinite(ps_struct[i]) else math.nan,
                float(ps_unstr[i]) if np.isfinite(ps_unstr[i]) else math.nan,
            )
            for i in range(len(a))
        ]
        meta["structured_cells"] = masks.area("structured")
        meta["unstructured_cells"] = masks.area("unstructured")
        emit_csv(
            args.out,
            ["a", "structured_any", "unstructured_any", "p_min_structured", "p_min_unstructured"],
            rows,
            meta,
        )
    elif args.figure == "fig-md1":
        ps = np.linspace(args.p_min, args.p_hi, args.steps)
        cfg = {"ps": list(map(float, ps))}
        meta["config_hash"] = config_hash(cfg)

        def cell(pv):
            s = G.md_ex1_structured(pv)
            u = G.md_ex1_unstructured_min_r3(pv, seed=args.seed)
            return (float(pv), s[2], u["min_r3"])

        rows = parallel_map(cell, list(ps), threads)
        emit_csv(args.out, ["p", "structured_r3", "unstructured_min_r3"], rows, meta)
    elif args.figure == "md2":
        cfg = {"p": args.p}
        meta["config_hash"] = config_hash(cfg)
        e = G.md_ex2(args.p)
        rows = [tuple(e[k] for k in ("r1", "r2", "r3", "d1", "d2", "d3", "d12", "d13", "d23"))]
        emit_csv(args.out, ["r1", "r2", "r3", "d1", "d2", "d3", "d12", "d13", "d23"], rows, meta)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError("figure", f"unknown figure {args.figure!r}")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    """Fast invariant suite: a few seconds, exercises every module."""
    import numpy.random as npr

    from contnet.convergence import check_mc_forced1, random_mc_instance
    from contnet.gaussian import mac_gaussian, md_ex2
    from contnet.mdssc import ibar_pmf
    from contnet.pmf import Axis, kl_divergence, l1_distance
    from contnet.polyhedra import HalfspaceSystem, fm_eliminate
    from contnet.sperner import enumerate_sperner

    failures = []

    def check(name: str, ok: bool):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    rng = np.random.default_rng(int(args.seed))
    ok = True
    for _ in range(200):
        w = rng.dirichlet(np.ones(6)).reshape(2, 3)
        p = JointPmf([Axis("a", (0.0, 1.0)), Axis("b", (0.0, 1.0, 2.0))], w)
        i_ab = p.mutual_information("a", "b")
        chain = p.entropy("a") + p.entropy("b") - p.entropy(("a", "b"))
        ok &= abs(i_ab - chain) < 1e-10
    check("mutual information identity on random pmfs", ok)

    ok = True
    for _ in range(200):
        pw = rng.dirichlet(np.ones(4))
        qw = rng.dirichlet(np.ones(4))
        ax = [Axis("a", (0.0, 1.0, 2.0, 3.0))]
        p, q = JointPmf(ax, pw), JointPmf(ax, qw)
        ok &= kl_divergence(p, q) >= l1_distance(p, q) ** 2 / (2 * math.log(2)) - 1e-12
    check("Pinsker inequality on random pmf pairs", ok)

    ok = True
    for _ in range(100):
        inst = random_mc_instance(rng)
        lhs, rhs, holds = check_mc_forced1(inst)
        ok &= holds
    check("forced-chain inequality on random instances", ok)

    h = HalfspaceSystem(("x", "y"), [((1, 0), "<=", 3), ((-1, 0), "<=", -1), ((1, 1), "<=", 5)])
    pr = fm_eliminate(h, "x")
    check("FM hand projection", pr.variables == ("y",) and pr.rows == (((1.0,), "<=", 4.0),))

    check("Sperner counts", [len(enumerate_sperner(k)) for k in (1, 2, 3)] == [1, 4, 17])

    g = mac_gaussian(3, 3, 1)
    check("MAC crossover fixture", g.crossover and abs(g.structured_sum - math.log2(3.5)) < 1e-12)

    e2 = md_ex2(0.6)
    check("MD example-2 closed form", abs(e2["r1"] - 0.25 * math.log2(5)) < 1e-12)

    if failures:
        print(f"{len(failures)} failure(s)")
        return EXIT_NUMERIC
    print("all selfchecks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contnet", description=__doc__)
    ap.add_argument("--seed", type=int, default=20240801, help="run seed (echoed into outputs)")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default CONTNET_THREADS or 1)")
    sub = ap.add_subparsers(dest="command")

    d = sub.add_parser("discretize", help="density config -> JointPmf JSON")
    d.add_argument("--config", required=True)
    d.add_argument("--out", default="-")
    d.set_defaults(fn=cmd_discretize)

    m = sub.add_parser("mi", help="information measures on a serialized pmf")
    m.add_argument("--pmf", required=True)
    m.add_argument("--groups", required=True, help="';'-separated groups of ','-separated axes")
    m.add_argument("--out", default="-")
    m.set_defaults(fn=cmd_mi)

    c = sub.add_parser("converge", help="MI trace along a schedule -> CSV")
    c.add_argument("--config", required=True)
    c.add_argument("--out", default="-")
    c.set_defaults(fn=cmd_converge)

    r = sub.add_parser("region", help="evaluate an achievable region on a pmf model")
    r.add_argument("kind", choices=["wz", "gp", "dbc", "bt", "thu", "mac", "ic"])
    r.add_argument("--config", required=True)
    r.add_argument("--check", nargs="*", help="rate point for a membership query")
    r.add_argument("--out", default="-")
    r.set_defaults(fn=cmd_region)

    md = sub.add_parser("md-ssc", help="multiple-descriptions constraint system")
    md.add_argument("--config", required=True)
    md.add_argument("--check", nargs="*", help="rate tuple R1..Rl")
    md.add_argument("--min", dest="minimize", help="rate to minimize")
    md.add_argument("--fix", nargs="*", help="Ri=value pins for --min")
    md.add_argument("--out", default="-")
    md.set_defaults(fn=cmd_mdssc)

    g = sub.add_parser("gaussian", help="closed-form examples and figure sweeps")
    g.add_argument("figure", choices=["mac", "thu", "fig-rhocrange", "fig-ic", "fig-md1", "md2"])
    g.add_argument("--p1", type=float, default=3.0)
    g.add_argument("--p2", type=float, default=3.0)
    g.add_argument("--n0", type=float, default=1.0)
    g.add_argument("--rho", type=float, default=0.8)
    g.add_argument("--c", type=float, default=0.8)
    g.add_argument("--d", type=float, default=0.09)
    g.add_argument("--rho-min", type=float, default=0.0)
    g.add_argument("--rho-max", type=float, default=0.9)
    g.add_argument("--c-min", type=float, default=-0.9)
    g.add_argument("--c-max", type=float, default=0.9)
    g.add_argument("--steps", type=int, default=21)
    g.add_argument("--d-list", default="0.01,0.05")
    g.add_argument("--a-min", type=float, default=1.0)
    g.add_argument("--a-max", type=float, default=4.0)
    g.add_argument("--a-step", type=float, default=0.005)
    g.add_argument("--p-max", type=float, default=20.0)
    g.add_argument("--p-step", type=float, default=0.02)
    g.add_argument("--p", type=float, default=0.6)
    g.add_argument("--p-min", type=float, default=0.15)
    g.add_argument("--p-hi", type=float, default=0.9)
    g.add_argument("--out", default="-")
    g.set_defaults(fn=cmd_gaussian)

    s = sub.add_parser("selfcheck", help="fast invariant suite")
    s.set_defaults(fn=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args, unknown = ap.parse_known_args(argv)
    except SystemExit:
        return EXIT_USAGE
    if unknown or not getattr(args, "command", None):
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, InfeasibleError, ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ContnetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"i/o failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
