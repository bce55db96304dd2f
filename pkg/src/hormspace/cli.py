"""Command-line interface: JSON in, deterministic JSON report out.

Exit codes: 0 for pass verdicts, 1 for fail verdicts (and numerical
failures, reported on stderr), 2 for usage or parse errors.  All floats in
reports are serialized with 17 significant digits, and a fixed seed makes
reports byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import class_m, embedding, gridio, interpolation, model_problem, parabolicity
from . import plus_spaces, spectra
from .errors import HormspaceError

__all__ = ["RunConfig", "run", "main", "COMMAND_TABLE", "OPERATIONS"]


# Every public operation, and the commands that exercise it (directly or as
# part of the command's pipeline).  test_cli checks this table stays total.
OPERATIONS = (
    "class_m.eval_phi",
    "class_m.slow_variation_defect",
    "class_m.epsilon_bound_constant",
    "spectra.r_gamma",
    "spectra.hormander_weight",
    "spectra.dft",
    "spectra.idft",
    "spectra.hnorm",
    "spectra.embedding_constants",
    "plus_spaces.plus_norm",
    "plus_spaces.trace_defect",
    "plus_spaces.lemma51_equivalence_ratio",
    "interpolation.build_psi",
    "interpolation.regular_variation_index",
    "interpolation.generating_operator",
    "interpolation.interp_norm",
    "interpolation.verify_lemma71",
    "interpolation.interp_subspace_norm",
    "interpolation.direct_sum_interp_check",
    "parabolicity.symbol_eval",
    "parabolicity.petrovskii_check",
    "parabolicity.zeta_polynomial",
    "parabolicity.root_split",
    "parabolicity.plus_polynomial",
    "parabolicity.covering_check",
    "parabolicity.sigma0",
    "model_problem.solve_periodic",
    "model_problem.apply_operator",
    "model_problem.two_sided_ratio",
    "model_problem.regularity_inheritance_check",
    "embedding.criterion_verdict",
    "embedding.criterion_partial",
    "embedding.derivative_weight_sum",
    "embedding.radial_reduction_check",
    "embedding.sharpness_demo",
)

COMMAND_TABLE = {
    "sigma0": ("parabolicity.sigma0",),
    "check-parabolic": (
        "parabolicity.symbol_eval",
        "parabolicity.petrovskii_check",
        "parabolicity.zeta_polynomial",
        "parabolicity.root_split",
        "parabolicity.plus_polynomial",
        "parabolicity.covering_check",
        "parabolicity.sigma0",
    ),
    "norm": (
        "class_m.eval_phi",
        "spectra.r_gamma",
        "spectra.hormander_weight",
        "spectra.dft",
        "spectra.idft",
        "spectra.hnorm",
        "spectra.embedding_constants",
    ),
    "verify-lemma71": (
        "interpolation.build_psi",
        "interpolation.generating_operator",
        "interpolation.interp_norm",
        "interpolation.verify_lemma71",
        "interpolation.regular_variation_index",
        "interpolation.direct_sum_interp_check",
    ),
    "plus-norm": (
        "plus_spaces.plus_norm",
        "plus_spaces.trace_defect",
        "plus_spaces.lemma51_equivalence_ratio",
        "interpolation.interp_subspace_norm",
    ),
    "model-verify": (
        "model_problem.solve_periodic",
        "model_problem.apply_operator",
        "model_problem.two_sided_ratio",
        "model_problem.regularity_inheritance_check",
    ),
    "embed-check": (
        "embedding.criterion_verdict",
        "embedding.criterion_partial",
        "embedding.derivative_weight_sum",
        "embedding.radial_reduction_check",
        "embedding.sharpness_demo",
        "class_m.slow_variation_defect",
        "class_m.epsilon_bound_constant",
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: the command plus its argparse namespace."""

    command: str
    options: dict = field(default_factory=dict)

    def opt(self, name, default=None):
        return self.options.get(name, default)


# -- deterministic JSON serialization ----------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(float(x), ".17g")


def dumps_report(obj) -> str:
    """JSON with floats at 17 significant digits and stable key order."""
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps_report(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}:{dumps_report(v)}" for k, v in obj.items())
        return "{" + ",".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


# -- input parsing helpers ----------------------------------------------------


def _parse_phi(text: str) -> class_m.PhiFunction:
    if text.strip() in ("1", "one", "constant", "constant_one"):
        return class_m.constant_one()
    return class_m.PhiFunction.from_json_dict(json.loads(text))


def _parse_lattice(text: str, L_x: float, L_t: float) -> spectra.Lattice:
    parts = [int(p) for p in text.lower().split("x")]
    if len(parts) < 2:
        raise ValueError("lattice spec needs at least KxT")
    spatial, n_t = parts[:-1], parts[-1]
    if any(p != spatial[0] for p in spatial):
        raise ValueError("all spatial extents must be equal")
    return spectra.Lattice(k=len(spatial), n_x=spatial[0], n_t=n_t, L_x=L_x, L_t=L_t)


def _load_symbol(d: dict) -> parabolicity.PrincipalSymbol:
    coeffs = {}
    for entry in d["A"]:
        key = (tuple(entry["alpha"]), int(entry["beta"]))
        coeffs[key] = complex(entry.get("re", 0.0), entry.get("im", 0.0))
    return parabolicity.PrincipalSymbol(n=d["n"], b=d["b"], m=d["m"], coeffs=coeffs)


def _load_boundary(d: dict, n: int, b: int) -> parabolicity.BoundarySymbol:
    coeffs = {}
    for entry in d["coeffs"]:
        key = (tuple(entry["alpha"]), int(entry["beta"]))
        coeffs[key] = complex(entry.get("re", 0.0), entry.get("im", 0.0))
    return parabolicity.BoundarySymbol(n=n, b=b, m_j=d["m_j"], coeffs=coeffs)


def _load_frames(entries) -> list[parabolicity.BoundaryFrame]:
    frames = []
    for e in entries:
        p = e["p"]
        frames.append(
            parabolicity.BoundaryFrame(
                nu=np.asarray(e["nu"], dtype=float),
                xi_tan=np.asarray(e["xi_tan"], dtype=float),
                p=complex(p[0], p[1]),
            )
        )
    return frames


def _load_grid_file(path: str):
    if str(path).endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            return gridio.grid_from_json(fh.read()), None
    return gridio.load_grid(path)


# -- commands ------------------------------------------------------------------


def _cmd_sigma0(cfg: RunConfig) -> tuple[dict, int]:
    value = parabolicity.sigma0(cfg.opt("m"), cfg.opt("b"), cfg.opt("orders") or [])
    return {"sigma0": value}, 0


def _cmd_check_parabolic(cfg: RunConfig) -> tuple[dict, int]:
    with open(cfg.opt("operator"), "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    A = _load_symbol(spec)
    verdict = parabolicity.petrovskii_check(A, cfg.opt("samples", 10000))
    report = {"petrovskii": verdict.to_json_dict()}
    passed = verdict.passed
    if spec.get("B"):
        Bs = [_load_boundary(bd, A.n, A.b) for bd in spec["B"]]
        if spec.get("frames"):
            frames = _load_frames(spec["frames"])
        else:
            frames = parabolicity.random_frames(
                cfg.opt("frames", 50), A.n, cfg.opt("seed", 0)
            )
        cov = parabolicity.covering_check(A, Bs, frames, tol=cfg.opt("tol", 1e-8))
        report["covering"] = cov.to_json_dict()
        report["sigma0"] = parabolicity.sigma0(A.m, A.b, [B.m_j for B in Bs])
        passed = passed and cov.passed
    report["passed"] = passed
    return report, 0 if passed else 1


def _cmd_norm(cfg: RunConfig) -> tuple[dict, int]:
    g, _region = _load_grid_file(cfg.opt("grid"))
    phi = _parse_phi(cfg.opt("phi", "1"))
    idx = spectra.AnisotropicIndex(cfg.opt("s"), cfg.opt("gamma"), phi)
    field_ = spectra.dft(g)
    back = spectra.idft(field_)
    rt = float(
        np.max(np.abs(back.samples - g.samples))
        / max(float(np.max(np.abs(g.samples))), 1e-300)
    )
    l2 = float(
        np.linalg.norm(g.samples.ravel()) * math.sqrt(g.lattice.cell_volume)
    )
    report = {
        "lattice": {"k": g.lattice.k, "n_x": g.lattice.n_x, "n_t": g.lattice.n_t},
        "hnorm": spectra.hnorm(g, idx),
        "l2": l2,
        "dft_roundtrip_error": rt,
        "weight_at_origin": spectra.hormander_weight(idx, [0.0] * g.lattice.k, 0.0),
        "r_gamma_max": float(np.max(spectra.r_gamma_array(g.lattice, idx.gamma))),
    }
    window = cfg.opt("embed_window")
    if window:
        s0, s1 = window
        c_low, c_high = spectra.embedding_constants(
            spectra.AnisotropicIndex(s0, idx.gamma, phi),
            idx,
            spectra.AnisotropicIndex(s1, idx.gamma, phi),
            g.lattice,
        )
        report["embedding_constants"] = [c_low, c_high]
    return report, 0


def _cmd_verify_lemma71(cfg: RunConfig) -> tuple[dict, int]:
    lat = _parse_lattice(cfg.opt("lattice", "16x16x16"), cfg.opt("L_x"), cfg.opt("L_t"))
    phi = _parse_phi(cfg.opt("phi", "1"))
    s0, s, s1 = cfg.opt("s0"), cfg.opt("s"), cfg.opt("s1")
    gamma = cfg.opt("gamma")
    tol = cfg.opt("tol", 1e-10)
    worst = 0.0
    for trial in range(cfg.opt("trials", 8)):
        g = spectra.random_grid(lat, cfg.opt("seed", 0) + trial)
        ratio = interpolation.verify_lemma71(g, s0, s, s1, gamma, phi)
        worst = max(worst, abs(ratio - 1.0))
    p = interpolation.build_psi(s0, s, s1, phi)
    ladder = np.geomspace(1e3, 1e12, 10)
    rv = interpolation.regular_variation_index(p, ladder)
    pair = interpolation.sobolev_pair(lat, s0, s1, gamma)
    mult_min = float(np.min(interpolation.generating_operator(pair)))
    gs = [spectra.random_grid(lat, cfg.opt("seed", 0) + 100 + i) for i in range(3)]
    lhs, rhs = interpolation.direct_sum_interp_check([pair] * 3, gs, p)
    passed = worst <= tol and abs(lhs - rhs) <= 1e-12 * max(rhs, 1e-300)
    report = {
        "max_ratio_deviation": worst,
        "tolerance": tol,
        "theta": p.theta,
        "regular_variation_index": rv,
        "generating_multiplier_min": mult_min,
        "direct_sum_lhs": lhs,
        "direct_sum_rhs": rhs,
        "passed": passed,
    }
    return report, 0 if passed else 1


def _cmd_plus_norm(cfg: RunConfig) -> tuple[dict, int]:
    g, region = _load_grid_file(cfg.opt("grid"))
    phi = _parse_phi(cfg.opt("phi", "1"))
    idx = spectra.AnisotropicIndex(cfg.opt("s"), cfg.opt("gamma"), phi)
    if region is None:
        window = cfg.opt("v_window")
        if window is None:
            raise ValueError("grid carries no region; pass --v-window T0 T1")
        region = plus_spaces.time_window_region(g.lattice, window[0], window[1])
    result = plus_spaces.plus_norm(g.samples, idx, region)
    report = {
        "plus_norm": result.norm,
        "extension_hnorm": spectra.hnorm(result.extension, idx),
        "trace_defect": plus_spaces.trace_defect(g, idx.gamma, idx.s),
    }
    if cfg.opt("lemma51"):
        report["lemma51_ratio"] = plus_spaces.lemma51_equivalence_ratio(g, idx, region)
    interp = cfg.opt("interp")
    if interp:
        s0, s, s1 = interp
        supported = np.where(region.t_nonneg_mask, g.samples, 0.0)
        lhs, rhs = interpolation.interp_subspace_norm(
            spectra.GridFunction(g.lattice, supported), region, s0, s, s1, idx.gamma, phi
        )
        report["interp_subspace"] = {"lhs": lhs, "rhs": rhs}
    return report, 0


def _cmd_model_verify(cfg: RunConfig) -> tuple[dict, int]:
    with open(cfg.opt("operator"), "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    A = _load_symbol(spec)
    lat = _parse_lattice(cfg.opt("lattice", "16x16x32"), cfg.opt("L_x"), cfg.opt("L_t"))
    tau = cfg.opt("tau_frac", 0.25) * lat.L_t
    op = model_problem.PeriodicParabolicOperator(symbol=A, L_x=lat.L_x, tau=tau)
    phi = _parse_phi(cfg.opt("phi", "1"))
    sigma = cfg.opt("sigma")
    seed = cfg.opt("seed", 0)
    n_ens = cfg.opt("ensemble", 20)
    ensemble = [
        model_problem.synthesize_forcing(lat, tau, seed + i) for i in range(n_ens)
    ]
    c1, c2 = model_problem.two_sided_ratio(op, ensemble, sigma, phi)
    resid = model_problem.roundtrip_residual(op, ensemble[0])
    report = {
        "c1_hat": c1,
        "c2_hat": c2,
        "spread": c2 / c1,
        "roundtrip_residual": resid,
    }
    passed = math.isfinite(c1) and math.isfinite(c2) and c1 > 0
    if cfg.opt("refine", 0) > 0:
        lat2 = lat.refine(2, 2)
        ensemble2 = [
            model_problem.synthesize_forcing(lat2, tau, seed + i) for i in range(n_ens)
        ]
        c1r, c2r = model_problem.two_sided_ratio(op, ensemble2, sigma, phi)
        change = (c2r / c1r) / (c2 / c1)
        report["refined"] = {"c1_hat": c1r, "c2_hat": c2r, "spread_change": change}
        passed = passed and 0.5 < change < 2.0
    ladder = model_problem.regularity_inheritance_check(
        op, lat, sigma, phi, levels=cfg.opt("levels", 2), seed=seed
    )
    report["ladder"] = ladder.to_json_dict()
    report["passed"] = passed and not ladder.flagged
    return report, 0 if report["passed"] else 1


def _cmd_embed_check(cfg: RunConfig) -> tuple[dict, int]:
    phi = _parse_phi(cfg.opt("phi", "1"))
    p = cfg.opt("p", 0)
    b = cfg.opt("b", 1)
    n = cfg.opt("n", 2)
    gamma = 1.0 / (2.0 * b)
    s = p + b + n / 2.0
    verdict = embedding.criterion_verdict(phi)
    r_values = cfg.opt("r_values") or [1e3, 1e6, 1e9, 1e12]
    partials = [embedding.criterion_partial(phi, R) for R in r_values]
    defects = class_m.slow_variation_defect(phi, 2.0, r_values)
    report = {
        "verdict": verdict,
        "r_values": list(r_values),
        "partial_integrals": partials,
        "slow_variation_defect": [float(d) for d in defects],
        "epsilon_bound_constant": class_m.epsilon_bound_constant(phi, 0.5, 1e6),
        "s": s,
    }
    if cfg.opt("weight_sum"):
        lat = spectra.Lattice(k=n, n_x=16, n_t=16, L_x=2 * math.pi, L_t=2 * math.pi)
        report["weight_sums"] = {
            "base": embedding.derivative_weight_sum(lat, s, gamma, phi, (0,) * n, 0),
            "doubled": embedding.derivative_weight_sum(
                lat.refine(2, 2), s, gamma, phi, (0,) * n, 0
            ),
        }
    if cfg.opt("radial"):
        rows = []
        for R in (10.0, 30.0, 100.0):
            res = embedding.radial_reduction_check(s, gamma, phi, (0,) * n, 0, R)
            rows.append({"R": R, **res.to_json_dict()})
        report["radial_reduction"] = rows
    if cfg.opt("sharpness") and verdict == "diverges":
        base = spectra.Lattice(k=n, n_x=8, n_t=8, L_x=2 * math.pi, L_t=2 * math.pi)
        lattices = [base]
        for _ in range(4):
            lattices.append(lattices[-1].refine(2, 2))
        report["sharpness"] = embedding.sharpness_demo(phi, p, lattices, b=b).to_json_dict()
    return report, 0 if verdict == "converges" else 1


_HANDLERS = {
    "sigma0": _cmd_sigma0,
    "check-parabolic": _cmd_check_parabolic,
    "norm": _cmd_norm,
    "verify-lemma71": _cmd_verify_lemma71,
    "plus-norm": _cmd_plus_norm,
    "model-verify": _cmd_model_verify,
    "embed-check": _cmd_embed_check,
}


def run(config: RunConfig) -> int:
    """Execute one command; report JSON to stdout, diagnostics to stderr."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        print(f"unknown command: {config.command}", file=sys.stderr)
        return 2
    try:
        report, code = handler(config)
    except (json.JSONDecodeError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HormspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(dumps_report(report) + "\n")
    return code


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hormspace")
    sub = ap.add_subparsers(dest="command", required=True)

    def shared(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--L-x", dest="L_x", type=float, default=2 * math.pi)
        p.add_argument("--L-t", dest="L_t", type=float, default=2 * math.pi)

    p = sub.add_parser("sigma0")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--orders", type=int, nargs="*", default=[])

    p = sub.add_parser("check-parabolic")
    p.add_argument("operator")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--frames", type=int, default=50)
    shared(p)

    p = sub.add_parser("norm")
    p.add_argument("grid")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--phi", default="1")
    p.add_argument("--embed-window", dest="embed_window", type=float, nargs=2)
    shared(p)

    p = sub.add_parser("verify-lemma71")
    p.add_argument("--lattice", default="16x16x16")
    p.add_argument("--s0", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--s1", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--phi", default="1")
    p.add_argument("--trials", type=int, default=8)
    shared(p)

    p = sub.add_parser("plus-norm")
    p.add_argument("grid")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--phi", default="1")
    p.add_argument("--v-window", dest="v_window", type=float, nargs=2)
    p.add_argument("--lemma51", action="store_true")
    p.add_argument("--interp", type=float, nargs=3, metavar=("S0", "S", "S1"))
    shared(p)

    p = sub.add_parser("model-verify")
    p.add_argument("operator")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--phi", default="1")
    p.add_argument("--ensemble", type=int, default=20)
    p.add_argument("--lattice", default="16x16x32")
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--tau-frac", dest="tau_frac", type=float, default=0.25)
    shared(p)

    p = sub.add_parser("embed-check")
    p.add_argument("--phi", required=True)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--r-values", dest="r_values", type=float, nargs="*")
    p.add_argument("--radial", action="store_true")
    p.add_argument("--sharpness", action="store_true")
    p.add_argument("--weight-sum", dest="weight_sum", action="store_true")
    shared(p)

    return ap


def main(argv=None) -> int:
    try:
        ns = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    options = {k: v for k, v in vars(ns).items() if k != "command" and v is not None}
    return run(RunConfig(command=ns.command, options=options))


if __name__ == "__main__":
    sys.exit(main())
