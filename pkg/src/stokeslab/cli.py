"""Command-line runner: experiment orchestration and report emission.

Exit codes: 0 pass, 1 a verification check failed, 2 usage or
configuration error.  All randomness is fixed by --seed; --threads (or the
STOKESLAB_THREADS variable) only changes wall time, never report bytes.
"""

import argparse
import math
import os
import sys

import numpy as np

from .bony import bony_reconstruction_error
from .errors import StokeslabError
from .experiments import (decay_forcing, rescaled_field, small_forcing)
from .field import SPECTRAL, SpectralField
from .grid import make_grid
from .io import read_field, write_field
from .ladder import INF, BesovIndex, besov_norm, build_ladder, mixed_norm
from .leray import ForcingTensor, VelocityField
from .modelops import kernel_estimate_report
from .picard import (DEFAULT_ETA, SolverConfig, decay_fit, hypothesis_check,
                     ns_residual, picard_solve)
from .randomfields import gaussian_profile, random_field
from .reports import save_figure, write_csv
from .utils import resolve_threads

EXPECTED_SLOPES = {"D0": (-2.0, 0.15), "D1": (-1.0, 0.15),
                   "Dt0": (-4.0, 0.2), "Dt1": (-3.0, 0.2)}


class ConfigError(StokeslabError):
    pass


def load_config(path):
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError("config not found: %s" % path)
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected key=value" % (path, lineno))
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def setting(args, cfg, key, cast, default):
    """Flag wins over config file wins over the built-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError:
            raise ConfigError("config key %s: cannot parse %r" % (key, cfg[key]))
    return default


def _float_or_inf(s):
    if s in ("inf", "Inf", "INF"):
        return INF
    return float(s)


def _grid_from(args, cfg, defaults):
    g = {}
    for key in ("nx", "ny", "nz"):
        g[key] = setting(args, cfg, key, int, defaults[key])
    for key in ("lx", "ly", "zmin", "zmax"):
        g[key] = setting(args, cfg, key, float, defaults[key])
    return make_grid(nx=g["nx"], ny=g["ny"], Lx=g["lx"], Ly=g["ly"],
                     nz=g["nz"], z_min=g["zmin"], z_max=g["zmax"])


def _out(args, name):
    return os.path.join(args.out, name)


def _add_common(sp):
    sp.add_argument("--config", default=None)
    sp.add_argument("--out", default=".")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None)
    for key in ("nx", "ny", "nz"):
        sp.add_argument("--" + key, type=int, default=None)
    for key in ("lx", "ly", "zmin", "zmax"):
        sp.add_argument("--" + key, type=float, default=None)


SOLVE_GRID = dict(nx=64, ny=64, nz=257, lx=2 * math.pi, ly=2 * math.pi,
                  zmin=-8.0, zmax=8.0)
BONY_GRID = dict(nx=64, ny=64, nz=33, lx=2 * math.pi, ly=2 * math.pi,
                 zmin=-8.0, zmax=8.0)
DECAY_GRID = dict(nx=64, ny=64, nz=513, lx=64 * math.pi, ly=64 * math.pi,
                  zmin=-32.0, zmax=32.0)


def _solver_config(args, cfg):
    return SolverConfig(
        eta=setting(args, cfg, "eta", float, DEFAULT_ETA),
        max_iter=setting(args, cfg, "max_iter", int, 20),
        tol_rel=setting(args, cfg, "tol_rel", float, 1e-10),
        n0=setting(args, cfg, "n0", int, 0),
    )


def _forcing_for(args, cfg, grid, ladder, solver_cfg, sigma, p, delta, seed):
    path = setting(args, cfg, "input", str, None)
    if path is not None:
        return ForcingTensor(read_field(path))
    amplitude = setting(args, cfg, "amplitude", float, 0.5)
    z_width = setting(args, cfg, "z_width", float, 4.0)
    return small_forcing(grid, ladder, seed, sigma, p, delta,
                         target_total=amplitude * solver_cfg.eta,
                         z_width=z_width, n0=solver_cfg.n0)


def cmd_solve(args):
    cfg = load_config(args.config)
    grid = _grid_from(args, cfg, SOLVE_GRID)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    sigma = setting(args, cfg, "sigma", float, 0.25)
    p = setting(args, cfg, "p", _float_or_inf, 2.0)
    delta = setting(args, cfg, "delta", float, 0.0)
    solver_cfg = _solver_config(args, cfg)
    f = _forcing_for(args, cfg, grid, ladder, solver_cfg, sigma, p, delta, seed)

    hyp = hypothesis_check(f, solver_cfg, ladder, sigma, p, delta)
    u, trace = picard_solve(f, solver_cfg, ladder)
    res = ns_residual(u, f, solver_cfg)

    write_field(u.field, _out(args, "u.sfld"))
    write_field(u.d3u3, _out(args, "u_d3.sfld"))
    write_field(f.field, _out(args, "f.sfld"))
    rows = [(n, nu, up, rat) for (n, nu, up, rat, _sec) in trace.rows]
    write_csv(_out(args, "trace.csv"),
              ["iteration", "norm", "update", "ratio"], rows)
    write_csv(_out(args, "residual.csv"),
              ["rel_div", "rel_curl", "div_pass", "curl_pass",
               "converged", "diverged", "hypothesis_pass", "reason"],
              [(res.rel_div, res.rel_curl, res.div_pass, res.curl_pass,
                trace.converged, trace.diverged, hyp.passed, trace.reason)])
    its = [r[0] for r in rows]
    save_figure(_out(args, "trace.png"),
                [("update", its, [max(r[2], 1e-300) for r in rows]),
                 ("norm", its, [max(r[1], 1e-300) for r in rows])],
                xlabel="iteration", ylabel="monitored norm", logy=True,
                title="Picard iteration")
    ok = trace.converged and res.div_pass and res.curl_pass
    return 0 if ok else 1


def cmd_norm(args):
    cfg = load_config(args.config)
    field = read_field(args.input)
    ladder = build_ladder(field.grid)
    idx = BesovIndex(
        s=setting(args, cfg, "s", float, 0.5),
        p=setting(args, cfg, "p", _float_or_inf, 2.0),
        q=setting(args, cfg, "q", _float_or_inf, 1.0),
        r=setting(args, cfg, "r", _float_or_inf, 2.0),
        part=setting(args, cfg, "part", str, "full"),
        N0=setting(args, cfg, "n0", int, 0),
        sigma=setting(args, cfg, "weight_sigma", float, 0.0),
    )
    total = besov_norm(field, idx, ladder)
    rows = []
    for j in ladder.blocks:
        blk = SpectralField(field.grid,
                            field.data * ladder.block_weight(j)[None, None],
                            SPECTRAL)
        rows.append((j, 2.0 ** (j * idx.s) * mixed_norm(blk, idx.p, idx.r)))
    write_csv(_out(args, "norm.csv"), ["j", "block_term"], rows)
    write_csv(_out(args, "norm_total.csv"), ["norm"], [(total,)])
    save_figure(_out(args, "norm.png"),
                [("block term", [r[0] for r in rows],
                  [max(r[1], 1e-300) for r in rows])],
                xlabel="block j", ylabel="2^{js} block norm", logy=True)
    print(format(total, ".17g"))
    return 0


def cmd_verify_kernel(args):
    cfg = load_config(args.config)
    grid = _grid_from(args, cfg, SOLVE_GRID)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    threads = resolve_threads(args.threads)
    kind = args.kind
    jmin = setting(args, cfg, "jmin", int, 0)
    jmax = setting(args, cfg, "jmax", int, 4)
    trials = setting(args, cfg, "trials", int, 10)
    p = setting(args, cfg, "p", _float_or_inf, 2.0)
    r = setting(args, cfg, "r", _float_or_inf, 2.0)
    sigma = setting(args, cfg, "weight_sigma", float, 0.0)
    n0 = setting(args, cfg, "n0", int, 0)
    z_width0 = setting(args, cfg, "z_width0", float, 3.0)
    width_mode = setting(args, cfg, "width_mode", str, "dyadic")

    rep = kernel_estimate_report(grid, ladder, kind, range(jmin, jmax + 1),
                                 p, r, trials, sigma=sigma, n0=n0,
                                 z_width0=z_width0, width_mode=width_mode,
                                 seed=seed, threads=threads)
    write_csv(_out(args, "kernel.csv"),
              ["j", "trial", "ratio", "weighted_ratio"], rep.rows)
    center, tol = EXPECTED_SLOPES[kind]
    ok = abs(rep.slope - center) <= tol
    if sigma > 0 and not math.isnan(rep.weighted_low_slope):
        ok = ok and rep.weighted_low_slope <= center - sigma + 0.2
    write_csv(_out(args, "kernel_fit.csv"),
              ["kind", "slope", "residual", "expected", "tolerance",
               "weighted_low_slope", "weighted_high_slope", "passed"],
              [(kind, rep.slope, rep.residual, center, tol,
                rep.weighted_low_slope, rep.weighted_high_slope, ok)])
    fit_line = [rep.slope * j + (rep.log2_means[0] - rep.slope * rep.js[0])
                for j in rep.js]
    save_figure(_out(args, "kernel.png"),
                [("measured", rep.js, rep.log2_means),
                 ("fit", rep.js, fit_line)],
                xlabel="block j", ylabel="log2 gain ratio",
                title="%s dyadic gain" % kind)
    return 0 if ok else 1


def cmd_verify_bony(args):
    cfg = load_config(args.config)
    grid = _grid_from(args, cfg, BONY_GRID)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    trials = setting(args, cfg, "trials", int, 20)
    z_width = setting(args, cfg, "z_width", float, 1.5)
    env = gaussian_profile(grid, z_width)
    rows = []
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        f = random_field(grid, rng, envelope=env)
        g = random_field(grid, rng, envelope=env)
        nf = mixed_norm(f, 2, 2)
        ng = mixed_norm(g, 2, 2)
        rel = bony_reconstruction_error(f, g, ladder)
        worst = max(worst, rel)
        rows.append((t, rel, nf, ng))
    write_csv(_out(args, "bony.csv"),
              ["trial", "reconstruction_rel", "norm_f", "norm_g"], rows)
    save_figure(_out(args, "bony.png"),
                [("reconstruction residual", [r[0] for r in rows],
                  [max(r[1], 1e-300) for r in rows])],
                xlabel="trial", ylabel="relative residual", logy=True)
    return 0 if worst <= 1e-11 else 1


def cmd_scaling_check(args):
    cfg = load_config(args.config)
    defaults = dict(nx=64, ny=64, nz=129, lx=2 * math.pi, ly=2 * math.pi,
                    zmin=-8.0, zmax=8.0)
    grid = _grid_from(args, cfg, defaults)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    rng = np.random.default_rng([seed])
    width = (grid.z_max - grid.z_min) / 8.0
    u = random_field(grid, rng, ncomp=3, envelope=gaussian_profile(grid, width))
    rows = []
    ok = True
    for (p, r) in ((2.0, 2.0), (4.0, 2.0), (2.0, INF)):
        s = 2.0 / p + (0.0 if r == INF else 1.0 / r) - 1.0
        idx = BesovIndex(s=s, p=p, q=1.0, r=r)
        n1 = besov_norm(u, idx, ladder)
        u2, lad2 = rescaled_field(u)
        n2 = besov_norm(u2, idx, lad2)
        ratio = n2 / n1 if n1 > 0 else math.nan
        ok = ok and abs(ratio - 1.0) <= 0.02
        rows.append((p, r, s, n1, n2, ratio))
    write_csv(_out(args, "scaling.csv"),
              ["p", "r", "s", "norm_base", "norm_rescaled", "ratio"], rows)
    save_figure(_out(args, "scaling.png"),
                [("ratio", list(range(len(rows))), [r[5] for r in rows])],
                xlabel="index pair", ylabel="rescaled / base")
    return 0 if ok else 1


def cmd_decay_fit(args):
    cfg = load_config(args.config)
    grid = _grid_from(args, cfg, DECAY_GRID)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    sigma_target = setting(args, cfg, "sigma_target", float, 0.40)
    w_a = setting(args, cfg, "window_lo", float, 6.0)
    w_b = setting(args, cfg, "window_hi", float, 20.0)
    path = setting(args, cfg, "input", str, None)
    solver_cfg = _solver_config(args, cfg)
    f = None
    if path is not None:
        u = VelocityField(field=read_field(path))
    else:
        amplitude = setting(args, cfg, "amplitude", float, 1e-3)
        f = decay_forcing(grid, seed, amplitude=amplitude)
        u, _trace = picard_solve(f, solver_cfg, ladder)
    rep = decay_fit(u, sigma_target, (w_a, w_b), f=f, ladder=ladder,
                    p=setting(args, cfg, "p", _float_or_inf, 2.0),
                    n0=solver_cfg.n0)
    write_csv(_out(args, "decay.csv"), ["weight_z", "sup_abs_u"], rep.samples)
    write_csv(_out(args, "decay_fit.csv"),
              ["sigma_target", "sigma_fit", "residual", "curvature_flag",
               "window_lo", "window_hi"],
              [(rep.sigma_target, rep.sigma_fit, rep.residual,
                rep.curvature_flag, w_a, w_b)])
    if rep.norms:
        write_csv(_out(args, "decay_norms.csv"), ["field", "norm", "value"],
                  [(k[0], k[1], v) for k, v in sorted(rep.norms.items())])
    ws = sorted(set(w for w, _ in rep.samples))
    env = [max(m for w2, m in rep.samples if w2 == w) for w in ws]
    fitc = env[0] * (np.asarray(ws) / ws[0]) ** (-rep.sigma_fit)
    save_figure(_out(args, "decay.png"),
                [("sup |u|", ws, env), ("fit", ws, fitc.tolist())],
                xlabel="<z>", ylabel="sup_xh |u|", logx=True, logy=True,
                title="vertical decay")
    ok = rep.sigma_fit >= sigma_target and rep.residual <= 0.05
    return 0 if ok else 1


def cmd_residual(args):
    cfg = load_config(args.config)
    uf = read_field(args.input)
    d3 = read_field(args.d3) if args.d3 else None
    u = VelocityField(field=uf, d3u3=d3)
    f = ForcingTensor(read_field(args.forcing))
    solver_cfg = _solver_config(args, cfg)
    res = ns_residual(u, f, solver_cfg)
    write_csv(_out(args, "residual.csv"),
              ["rel_div", "rel_curl", "div_pass", "curl_pass"],
              [(res.rel_div, res.rel_curl, res.div_pass, res.curl_pass)])
    save_figure(_out(args, "residual.png"),
                [("residuals", [0, 1],
                  [max(res.rel_div, 1e-300), max(res.rel_curl, 1e-300)])],
                xlabel="0 = div, 1 = curl", ylabel="relative residual",
                logy=True)
    return 0 if (res.div_pass and res.curl_pass) else 1


def cmd_hypothesis(args):
    cfg = load_config(args.config)
    grid = _grid_from(args, cfg, SOLVE_GRID)
    ladder = build_ladder(grid)
    seed = setting(args, cfg, "seed", int, 0)
    sigma = setting(args, cfg, "sigma", float, 0.25)
    p = setting(args, cfg, "p", _float_or_inf, 2.0)
    delta = setting(args, cfg, "delta", float, 0.0)
    solver_cfg = _solver_config(args, cfg)
    f = _forcing_for(args, cfg, grid, ladder, solver_cfg, sigma, p, delta, seed)
    rep = hypothesis_check(f, solver_cfg, ladder, sigma, p, delta)
    rows = [(k, v) for k, v in sorted(rep.norms.items())]
    rows.append(("total", rep.total))
    rows.append(("eta", rep.eta))
    write_csv(_out(args, "hypothesis.csv"), ["norm", "value"], rows)
    save_figure(_out(args, "hypothesis.png"),
                [("norms", list(range(len(rep.norms))),
                  [max(v, 1e-300) for _k, v in sorted(rep.norms.items())])],
                xlabel="norm index", ylabel="value", logy=True)
    return 0 if rep.passed else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="stokeslab")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve")
    _add_common(sp)
    sp.add_argument("--input", default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--max_iter", type=int, default=None)
    sp.add_argument("--tol_rel", type=float, default=None)
    sp.add_argument("--amplitude", type=float, default=None)
    sp.add_argument("--sigma", type=float, default=None)
    sp.add_argument("--p", type=_float_or_inf, default=None)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("norm")
    _add_common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--p", type=_float_or_inf, default=None)
    sp.add_argument("--q", type=_float_or_inf, default=None)
    sp.add_argument("--r", type=_float_or_inf, default=None)
    sp.add_argument("--part", default=None)
    sp.add_argument("--n0", type=int, default=None)
    sp.add_argument("--weight_sigma", type=float, default=None)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("verify-kernel")
    _add_common(sp)
    sp.add_argument("--kind", required=True, choices=sorted(EXPECTED_SLOPES))
    sp.add_argument("--jmin", type=int, default=None)
    sp.add_argument("--jmax", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--p", type=_float_or_inf, default=None)
    sp.add_argument("--r", type=_float_or_inf, default=None)
    sp.add_argument("--weight_sigma", type=float, default=None)
    sp.add_argument("--n0", type=int, default=None)
    sp.add_argument("--z_width0", type=float, default=None)
    sp.add_argument("--width_mode", choices=["dyadic", "fixed"], default=None)
    sp.set_defaults(func=cmd_verify_kernel)

    sp = sub.add_parser("verify-bony")
    _add_common(sp)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--z_width", type=float, default=None)
    sp.set_defaults(func=cmd_verify_bony)

    sp = sub.add_parser("scaling-check")
    _add_common(sp)
    sp.set_defaults(func=cmd_scaling_check)

    sp = sub.add_parser("decay-fit")
    _add_common(sp)
    sp.add_argument("--input", default=None)
    sp.add_argument("--sigma_target", type=float, default=None)
    sp.add_argument("--window_lo", type=float, default=None)
    sp.add_argument("--window_hi", type=float, default=None)
    sp.add_argument("--amplitude", type=float, default=None)
    sp.add_argument("--p", type=_float_or_inf, default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--max_iter", type=int, default=None)
    sp.add_argument("--tol_rel", type=float, default=None)
    sp.set_defaults(func=cmd_decay_fit)

    sp = sub.add_parser("residual")
    _add_common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--forcing", required=True)
    sp.add_argument("--d3", default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--max_iter", type=int, default=None)
    sp.add_argument("--tol_rel", type=float, default=None)
    sp.set_defaults(func=cmd_residual)

    sp = sub.add_parser("hypothesis")
    _add_common(sp)
    sp.add_argument("--input", default=None)
    sp.add_argument("--sigma", type=float, default=None)
    sp.add_argument("--p", type=_float_or_inf, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--amplitude", type=float, default=None)
    sp.add_argument("--max_iter", type=int, default=None)
    sp.add_argument("--tol_rel", type=float, default=None)
    sp.set_defaults(func=cmd_hypothesis)

    return ap


def run(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except StokeslabError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
