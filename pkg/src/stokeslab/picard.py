"""Nonlinear mild-form solve u = D[f - u (x) u] by Picard iteration.

Also houses the smallness (hypothesis) check on the forcing, the residual
check of the nonlinear equation, a supercritical-regularity norm ratio,
and the vertical decay-rate fit used by the decay experiments.
"""

import math
import time
from dataclasses import dataclass, field as dfield

import numpy as np

from .bony import _extract, _padded_physical
from .errors import ParameterError, PreconditionError
from .field import SPECTRAL, SpectralField, to_physical, to_spectral, zero_field
from .ladder import INF, BesovIndex, besov_norm
from .leray import ForcingTensor, VelocityField, apply_D, linear_residual
from .randomfields import dealias_mask

DEFAULT_ETA = 250.0

# Log-log quadratic coefficient above which a decay fit is not a power law:
# exponential tails bend by O(a * z) over the window, an order of magnitude
# above the mild truncation curvature of a genuine polynomial far field.
CURVATURE_THRESHOLD = 0.5


def _default_monitor():
    # critical smoothness 2/p + 1/r - 1 at p = 2, q = 1, r = 2
    return BesovIndex(s=0.5, p=2.0, q=1.0, r=2.0)


@dataclass
class SolverConfig:
    eta: float = DEFAULT_ETA
    max_iter: int = 20
    tol_rel: float = 1e-10
    monitor: BesovIndex = dfield(default_factory=_default_monitor)
    n0: int = 0
    dealias: bool = True

    def __post_init__(self):
        if self.eta <= 0:
            raise ParameterError(f"eta must be positive (got {self.eta})")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1 (got {self.max_iter})")
        if self.tol_rel <= 0:
            raise ParameterError(f"tol_rel must be positive (got {self.tol_rel})")


@dataclass
class IterationTrace:
    rows: list = dfield(default_factory=list)  # (n, norm_u, update, ratio, seconds)
    converged: bool = False
    diverged: bool = False
    reason: str = ""


def nonlinear_term(u, dealias=True):
    """The quadratic tensor u_j u_k with the horizontal mean removed."""
    uf = to_spectral(u.field)
    grid = uf.grid
    pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    if dealias:
        mx, my = 3 * grid.nx // 2, 3 * grid.ny // 2
        phys = _padded_physical(uf.data, grid, mx, my)
        prods = np.stack([phys[j] * phys[k] for j, k in pairs])
        coef = np.fft.fft2(prods, axes=(-2, -1)) / (mx * my)
        spec = _extract(coef, grid, mx, my)
        spec *= dealias_mask(grid)[None, None]
    else:
        phys = np.fft.ifft2(uf.data * (grid.nx * grid.ny), axes=(-2, -1))
        prods = np.stack([phys[j] * phys[k] for j, k in pairs])
        spec = np.fft.fft2(prods, axes=(-2, -1)) / (grid.nx * grid.ny)
    spec[..., 0, 0] = 0.0
    out = np.empty((9, grid.nz, grid.nx, grid.ny), dtype=np.complex128)
    for idx, (j, k) in enumerate(pairs):
        out[3 * j + k] = spec[idx]
        if k != j:
            out[3 * k + j] = spec[idx]
    return ForcingTensor(SpectralField(grid, out, SPECTRAL))


def _conjugate_exponent(p):
    if p == INF:
        return 1.0
    if p == 1:
        return INF
    return p / (p - 1.0)


def _two_over(p):
    return 0.0 if p == INF else 2.0 / p


@dataclass
class HypothesisReport:
    passed: bool
    eta: float
    total: float
    norms: dict


def check_decay_window(sigma, p):
    """Validate the admissible (sigma, p) range of the weighted estimates."""
    if sigma <= 0:
        raise PreconditionError(f"sigma <= 0 (got {sigma}); need 0 < sigma < 1/2")
    if sigma >= 0.5:
        raise PreconditionError(f"sigma >= 1/2 (got {sigma}); need 0 < sigma < 1/2")
    p_lo = 4.0 / (3.0 - 2.0 * sigma)
    if not (p == INF or p > p_lo):
        raise PreconditionError(
            f"p <= 4/(3 - 2*sigma) = {p_lo:.6g} (got {p}); need p > {p_lo:.6g}")


def forcing_norms(f, ladder, sigma, p, delta=0.0, n0=0):
    """Every norm entering the smallness hypothesis, keyed by role."""
    pp = _conjugate_exponent(p)
    ff = f.field
    return {
        "critical": besov_norm(
            ff, BesovIndex(s=_two_over(pp) - 1.0, p=pp, q=INF, r=1.0), ladder),
        "critical_shifted": besov_norm(
            ff, BesovIndex(s=_two_over(pp) - 1.0 - 2.0 * sigma, p=pp, q=INF, r=1.0),
            ladder),
        "high": besov_norm(
            ff, BesovIndex(s=_two_over(p) + delta, p=p, q=1.0, r=INF,
                           part="high", N0=n0), ladder),
        "high_weighted": besov_norm(
            ff, BesovIndex(s=_two_over(p) + 1.0, p=p, q=1.0, r=INF,
                           part="high", N0=n0, sigma=sigma), ladder),
        "low_weighted": besov_norm(
            ff, BesovIndex(s=_two_over(p) - 1.0 - 2.0 * sigma, p=p, q=1.0, r=INF,
                           part="low", N0=n0, sigma=sigma), ladder),
    }


def solution_norms(u, ladder, sigma, p, delta=0.0, n0=0):
    """The weighted solution norms paired with forcing_norms."""
    uf = u.field
    return {
        "high": besov_norm(
            uf, BesovIndex(s=_two_over(p) + 1.0 + delta, p=p, q=1.0, r=INF,
                           part="high", N0=n0), ladder),
        "weighted": besov_norm(
            uf, BesovIndex(s=_two_over(p), p=p, q=1.0, r=INF, sigma=sigma), ladder),
    }


def hypothesis_check(f, cfg, ladder, sigma, p, delta=0.0):
    """Compare the sum of the smallness norms of f against the budget eta."""
    check_decay_window(sigma, p)
    norms = forcing_norms(f, ladder, sigma, p, delta=delta, n0=cfg.n0)
    total = float(sum(norms.values()))
    return HypothesisReport(passed=total <= cfg.eta, eta=cfg.eta, total=total,
                            norms=norms)


def picard_solve(f, cfg, ladder):
    """Iterate u <- D[f - u (x) u] from u = 0 and record the contraction trace."""
    grid = f.grid
    ff = to_spectral(f.field)
    trace = IterationTrace()
    u = VelocityField(field=zero_field(grid, ncomp=3),
                      d3u3=zero_field(grid, ncomp=1))
    prev_update = None
    first_update = None
    consec_bad = 0
    ratios_after_2 = []

    for n in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        nl = nonlinear_term(u, dealias=cfg.dealias)
        eff = SpectralField(grid, ff.data - nl.field.data, SPECTRAL)
        u_new = apply_D(ForcingTensor(eff))
        diff = SpectralField(grid, u_new.field.data - to_spectral(u.field).data, SPECTRAL)
        update = besov_norm(diff, cfg.monitor, ladder)
        norm_u = besov_norm(u_new.field, cfg.monitor, ladder)
        ratio = update / prev_update if prev_update else math.nan
        if n > 2 and prev_update:
            ratios_after_2.append(ratio)
        trace.rows.append((n, norm_u, update, ratio, time.perf_counter() - t0))
        u = u_new

        if n == 1:
            first_update = update
            if update == 0.0:
                trace.converged = True
                trace.reason = "zero forcing"
                break
            prev_update = update
            continue
        if update / first_update <= cfg.tol_rel:
            trace.converged = all(rr <= 0.9 for rr in ratios_after_2)
            trace.reason = ("update below tolerance" if trace.converged
                            else "tolerance met but contraction ratio exceeded 0.9")
            break
        if prev_update and ratio >= 1.0:
            consec_bad += 1
        else:
            consec_bad = 0
        if consec_bad >= 3:
            trace.diverged = True
            trace.reason = "contraction ratio >= 1 for 3 consecutive iterations"
            break
        if norm_u > 10.0 * first_update:
            trace.diverged = True
            trace.reason = "norm grew past 10x the first iterate"
            break
        prev_update = update

    if not trace.converged and not trace.diverged:
        trace.reason = trace.reason or "max_iter reached without meeting tolerance"
    return u, trace


def ns_residual(u, f, cfg=None, div_tol=1e-8, curl_tol=5e-3):
    """Residual of the nonlinear equation: linear residual against f - u (x) u."""
    dealias = cfg.dealias if cfg is not None else True
    nl = nonlinear_term(u, dealias=dealias)
    ff = to_spectral(f.field)
    eff = ForcingTensor(SpectralField(u.grid, ff.data - nl.field.data, SPECTRAL))
    return linear_residual(u, eff, div_tol=div_tol, curl_tol=curl_tol)


@dataclass
class SupercriticalReport:
    lhs: float
    rhs: float
    ratio: float


def supercritical_report(u, f, sigma, p, q, ladder):
    """Norm ratio of the solution against the forcing at matching
    supercritical smoothness 2/p - 1 - sigma."""
    if not (0 < sigma < 1):
        raise PreconditionError(f"sigma outside (0, 1) (got {sigma})")
    p_hi = 4.0 / (1.0 + sigma)
    if not (p < p_hi):
        raise PreconditionError(
            f"p >= 4/(1 + sigma) = {p_hi:.6g} (got {p}); need p < {p_hi:.6g}")
    s = _two_over(p) - 1.0 - sigma
    lhs = besov_norm(u.field, BesovIndex(s=s, p=p, q=q, r=INF), ladder)
    rhs = besov_norm(f.field, BesovIndex(s=s, p=p, q=q, r=1.0), ladder)
    if lhs == 0.0:
        ratio = 0.0
    elif rhs == 0.0:
        ratio = math.inf
    else:
        ratio = lhs / rhs
    return SupercriticalReport(lhs=float(lhs), rhs=float(rhs), ratio=float(ratio))


@dataclass
class DecayReport:
    sigma_target: float
    window: tuple
    samples: list          # (<z>, sup_xh |u|) over the fitted nodes
    sigma_fit: float
    residual: float
    curvature_flag: bool
    norms: dict = dfield(default_factory=dict)


def _branch_fit(w, m):
    logw = np.log(w)
    logm = np.log(m)
    slope, intercept = np.polyfit(logw, logm, 1)
    resid = float(np.sqrt(np.mean((logm - (slope * logw + intercept)) ** 2)))
    quad = np.polyfit(logw, logm, 2)[0]
    return -float(slope), resid, float(quad)


def decay_fit(u, sigma_target, window, f=None, ladder=None, p=2.0, delta=0.0, n0=0):
    """Fit the vertical decay exponent of sup_xh |u| on both z branches.

    window is an interval in the weight variable <z> = sqrt(1 + z^2); the
    reported exponent is the smaller of the two one-sided slopes of
    log sup|u| against log <z>.
    """
    uf = to_physical(u.field)
    grid = uf.grid
    w_a, w_b = window
    if not (1.0 <= w_a < w_b):
        raise ParameterError(f"window must satisfy 1 <= a < b (got {window})")

    wz = np.sqrt(1.0 + grid.z ** 2)
    mag = np.sqrt(np.sum(np.abs(uf.data) ** 2, axis=0))  # (nz, nx, ny)
    m = mag.max(axis=(1, 2))

    height = grid.z_max - grid.z_min
    margin = 0.1 * height
    z_need = math.sqrt(w_b * w_b - 1.0)
    if z_need > grid.z_max - margin or -z_need < grid.z_min + margin:
        raise ParameterError(
            "fit window reaches within 10% of the vertical boundary")

    samples = []
    branch_stats = []
    for side in (1, -1):
        sel = (wz >= w_a) & (wz <= w_b) & (side * grid.z > 0)
        if sel.sum() < 8:
            raise ParameterError(
                f"fit window holds {int(sel.sum())} nodes on one branch; need >= 8")
        slope, resid, quad = _branch_fit(wz[sel], m[sel])
        branch_stats.append((slope, resid, quad))
        samples.extend(zip(wz[sel].tolist(), m[sel].tolist()))

    sigma_fit = min(st[0] for st in branch_stats)
    residual = max(st[1] for st in branch_stats)
    curvature = max(abs(st[2]) for st in branch_stats) > CURVATURE_THRESHOLD

    norms = {}
    if ladder is not None:
        sig = sigma_target
        norms = {("u", k): v for k, v in
                 solution_norms(u, ladder, sig, p, delta=delta, n0=n0).items()}
        if f is not None:
            norms.update({("f", k): v for k, v in
                          forcing_norms(f, ladder, sig, p, delta=delta, n0=n0).items()})

    return DecayReport(sigma_target=sigma_target, window=(w_a, w_b),
                       samples=samples, sigma_fit=float(sigma_fit),
                       residual=float(residual), curvature_flag=bool(curvature),
                       norms=norms)
