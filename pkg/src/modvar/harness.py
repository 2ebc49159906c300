"""Experiment harness: strict flat configs, named experiments, CSV/JSON output.

Config files are section-free ``key = value`` lines ('#' starts a comment).
Unknown keys are errors, as are missing required keys, so a config fully
pins an experiment.  All randomness flows through counter-based per-draw
streams keyed (seed, draw index); reductions run in fixed index order, so a
thread pool over draws cannot change any reported number.

Exit-code convention (mirrored by the CLI): 0 clean, 1 configuration error,
2 at least one checked property failed.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import arithmetic, averaging, polykit, systems, variation
from . import multipliers
from .bumpkit import DEFAULT_A0, make_bump, make_chi, scaled_weight, \
    make_psi_kernel, make_Psi, psi_floor_index
from .signalkit import CyclicSignal, Signal, modulate, modulate_cyclic
from .util import DomainError, e, stream, write_csv

# chi_s width constant for the decay probes: the default window at s <= 4 is
# nearly the whole circle (radius ~ 0.49), which cannot separate levels at
# desk scale.  Shrinking only the window (never the kernel floor) puts the
# radius near 2^(-0.8 s) where the level structure is visible.
PROBE_CHI_A0 = 0.125


def _chi_a0_for_radius(s, radius):
    """The chi_a0 value whose level-s window has exactly this radius."""
    if not 0.0 < radius < 0.5:
        raise ConfigError("window radius must lie in (0, 0.5)")
    return s / (10.0 * math.log2(math.log2(1.0 / radius)))


class ConfigError(Exception):
    """Invalid experiment configuration; the message names the field."""


_REQUIRED = object()


def _parse_int(text):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ConfigError("expected an integer, got %r" % (text,))


def _parse_float(text):
    try:
        return float(str(text).strip())
    except ValueError:
        raise ConfigError("expected a number, got %r" % (text,))


def _parse_floats(text):
    parts = [p for p in str(text).replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("expected a comma-separated number list")
    return tuple(_parse_float(p) for p in parts)


def _parse_ints(text):
    return tuple(int(round(x)) for x in _parse_floats(text))


def _parse_str(text):
    return str(text).strip()


# schema: kind -> {key: (parser, default or _REQUIRED)}
SCHEMAS = {
    "bump-check": {
        "eps0_list": (_parse_floats, (0.1, 0.25)),
        "lam_list": (_parse_floats, (1.5, 2.0)),
        "kmax": (_parse_int, 20),
        "samples": (_parse_int, 2048),
    },
    "weyl": {
        "gauss_qmax": (_parse_int, 99),
        "bound_qmax": (_parse_int, 100),
        "fit_d": (_parse_int, 3),
        "fit_qmax": (_parse_int, 64),
        "min_exponent": (_parse_float, 0.2),
        "envelope_slack": (_parse_float, 4.0),
    },
    "weyl-decay": {
        "d": (_parse_int, 2),
        "Qmax": (_parse_int, 100),
    },
    "variation": {
        "n_oracle": (_parse_int, 1000),
        "max_len": (_parse_int, 12),
        "r_list": (_parse_floats, (2.2, 2.5, 3.0, 4.0, 8.0)),
        "oracle_tol": (_parse_float, 1e-9),
        "n_jump": (_parse_int, 10000),
        "jump_len": (_parse_int, 24),
    },
    "chaining": {
        "n_inst": (_parse_int, 1000),
        "max_times": (_parse_int, 16),
        "max_dim": (_parse_int, 16),
        "telescope_tol": (_parse_float, 1e-12),
    },
    "converge": {
        "eps0": (_parse_float, 0.1),
        "n_top": (_parse_int, 100000),
        "osc_tol": (_parse_float, 0.02),
        "top_tol": (_parse_float, 0.02),
        "res_pad": (_parse_float, 0.01),
        "y0": (_parse_float, 0.3),
    },
    "carleson": {
        "eps0": (_parse_float, 0.25),
        "n_cov": (_parse_int, 100),
        "cov_len": (_parse_int, 48),
        "cov_tol": (_parse_float, 1e-9),
        "grid_len": (_parse_int, 64),
        "grid_exact_tol": (_parse_float, 1e-12),
        "theta_count": (_parse_int, 32),
        "r": (_parse_float, 3.0),
        "r_low": (_parse_float, 2.2),
        "r_high": (_parse_float, 4.0),
        "sizes": (_parse_ints, (1024, 4096, 16384)),
        "batch": (_parse_int, 30),
        "size_slack": (_parse_float, 1.5),
        "envelope_slack": (_parse_float, 10.0),
    },
    "multiplier": {
        "M": (_parse_int, 240),
        "s_list": (_parse_ints, (1, 2)),
        "J_list": (_parse_ints, (2, 3, 5)),
        "r": (_parse_float, 3.0),
        "tol": (_parse_float, 1e-8),
        "n_draw": (_parse_int, 2),
        "lam": (_parse_float, 1.5),
    },
    "sweep": {
        "operator": (_parse_str, _REQUIRED),
        "batch": (_parse_int, 30),
        "r": (_parse_float, 3.0),
        "r_low": (_parse_float, 2.2),
        "r_high": (_parse_float, 4.0),
        "M": (_parse_int, 0),        # 0 = per-operator default
        "s_min": (_parse_int, 1),
        "s_max": (_parse_int, 4),
        "J_list": (_parse_ints, (2, 3, 5)),
        "lam": (_parse_float, 1.5),
        "eps0": (_parse_float, 0.25),
        "rho0": (_parse_float, 0.125),
        "sizes": (_parse_ints, (1024, 4096, 16384)),
        "theta_count": (_parse_int, 32),
        "seq_base": (_parse_int, 64),
        "size_slack": (_parse_float, 1.5),
        "envelope_slack": (_parse_float, 10.0),
    },
}

SWEEP_OPERATORS = ("maximal-arc", "seqspace", "vr-s", "vr-sd",
                   "vr-linear-sup-theta")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: kind plus its fully-resolved parameter map."""

    kind: str
    params: dict = field(default_factory=dict)

    def get(self, key):
        return self.params[key]


def parse_config(text, kind=None, overrides=None):
    """Strict key = value parser; every key must belong to the kind's schema.

    The kind comes either from a ``kind = ...`` line or the argument (the CLI
    subcommand); both given and differing is an error.  ``overrides`` maps
    keys to raw value strings applied on top of the file entries.
    """
    entries = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key = value, got %r"
                              % (ln, raw.strip()))
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("line %d: empty key" % ln)
        if key in entries:
            raise ConfigError("line %d: duplicate key %r" % (ln, key))
        entries[key] = val
    if overrides:
        entries.update(overrides)
    file_kind = entries.pop("kind", None)
    if file_kind is not None and kind is not None and file_kind != kind:
        raise ConfigError("config kind %r contradicts requested %r"
                          % (file_kind, kind))
    kind = file_kind if file_kind is not None else kind
    if kind is None:
        raise ConfigError("missing field: kind")
    if kind not in SCHEMAS:
        raise ConfigError("unknown experiment kind %r (known: %s)"
                          % (kind, ", ".join(sorted(SCHEMAS))))
    schema = SCHEMAS[kind]
    params = {}
    for key, val in entries.items():
        if key not in schema:
            raise ConfigError("unknown key %r for experiment %r" % (key, kind))
        parser, _default = schema[key]
        try:
            params[key] = parser(val)
        except ConfigError as ex:
            raise ConfigError("key %r: %s" % (key, ex))
    for key, (parser, default) in schema.items():
        if key in params:
            continue
        if default is _REQUIRED:
            raise ConfigError("missing required key %r for experiment %r"
                              % (key, kind))
        params[key] = default
    return ExperimentConfig(kind=kind, params=params)


def default_config(kind):
    """The all-defaults config for a kind (errors if any key is required)."""
    return parse_config("", kind=kind)


# ---------------------------------------------------------------------------
# shared helpers


def _map_jobs(fn, items, jobs):
    items = list(items)
    if jobs and jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _gauss(seed, draw, n):
    g = stream(seed, draw)
    return g.standard_normal(n) + 1j * g.standard_normal(n)


def _stats(vals):
    a = np.asarray(vals, dtype=float)
    mean = float(np.mean(a))
    mx = float(np.max(a))
    se = float(np.std(a, ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
    return mean, mx, se


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError("not JSON serializable: %r" % (obj,))


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True,
                  default=_json_default)
        fh.write("\n")


def theta_sup_variation(values, bump, trunc_list, theta_count, r):
    """Pointwise sup over the theta grid of the r-variation in the truncation.

    A_M^theta f(x) = sum_n phi_M(n) e(-n theta) f(x - n) on Z/L, theta on the
    grid j/theta_count (which must divide L so every theta is a grid
    frequency).  Returns the array sup_theta V^r_M(A f).
    """
    values = np.asarray(values, dtype=complex)
    L = len(values)
    theta_count = int(theta_count)
    if L % theta_count:
        raise DomainError("theta grid %d must divide the length %d"
                          % (theta_count, L))
    step = L // theta_count
    fhat = np.fft.fft(values)
    what = np.empty((len(trunc_list), L), dtype=complex)
    for k, M in enumerate(trunc_list):
        if M >= L:
            raise DomainError("truncation %d must be below the length %d"
                              % (M, L))
        padded = np.zeros(L, dtype=complex)
        padded[: M + 1] = scaled_weight(bump, M, np.arange(M + 1))
        what[k] = np.fft.fft(padded)
    best = np.zeros(L)
    for j in range(theta_count):
        rows = np.fft.ifft(np.roll(what, -j * step, axis=1) * fhat, axis=1)
        np.maximum(best, variation.vr_batch(rows, r), out=best)
    return best


def _truncation_list(L):
    # lacunary truncations 8, 16, ... up to L/4
    out = []
    M = 8
    while M <= L // 4:
        out.append(M)
        M *= 2
    return out


# ---------------------------------------------------------------------------
# experiments


def _run_bump_check(cfg, out, seed, jobs):
    summary = {"eps0": {}, "kernels": {}}
    ok = True
    samples = cfg.get("samples")
    for eps0 in cfg.get("eps0_list"):
        bump = make_bump(eps0)
        est, rich = bump.l1_distance_to_indicator()
        l1_ok = bump.l1_defect <= eps0 and est <= eps0 + 1e-9
        T = bump.transition
        ts = np.concatenate([
            np.linspace(0.0, T, samples), np.linspace(1.0 - T, 1.0, samples),
        ])
        deriv = {}
        deriv_ok = True
        for a in range(1, 5):
            sup = float(np.max(np.abs(bump.deriv(ts, order=a))))
            bound = bump.deriv_constants[a] * eps0 ** (-a)
            deriv[a] = {"sup": sup, "bound": bound}
            deriv_ok = deriv_ok and sup <= bound
        ok = ok and l1_ok and deriv_ok
        summary["eps0"][str(eps0)] = {
            "l1_defect": bump.l1_defect, "l1_quadrature": est,
            "richardson": rich, "l1_ok": l1_ok,
            "deriv": {str(a): v for a, v in deriv.items()},
            "deriv_ok": deriv_ok,
        }
    bump = make_bump(cfg.get("eps0_list")[0])
    for lam in cfg.get("lam_list"):
        worst_tel, worst_mean = 0.0, 0.0
        for k in range(1, cfg.get("kmax") + 1):
            Psi = make_Psi(bump, lam, k)
            lo, hi = Psi.support
            ts = np.linspace(lo, hi, samples)
            acc = np.zeros_like(ts)
            for j in range(1, k + 1):
                acc = acc + make_psi_kernel(bump, lam, j)(ts)
            worst_tel = max(worst_tel, float(np.max(np.abs(acc - Psi(ts)))))
            worst_mean = max(worst_mean,
                             make_psi_kernel(bump, lam, k).mean_defect())
        lam_ok = worst_tel <= 1e-12 and worst_mean <= 1e-9
        ok = ok and lam_ok
        summary["kernels"]["lam=%s" % lam] = {
            "max_telescope": worst_tel, "max_mean_defect": worst_mean,
            "ok": lam_ok,
        }
    from .bumpkit import export_profile_csv

    export_profile_csv(bump, os.path.join(out, "bump_profile.csv"))
    summary["ok"] = ok
    _write_json(os.path.join(out, "bump_check.json"), summary)
    return ok, summary


def _run_weyl(cfg, out, seed, jobs):
    gauss_worst = 0.0
    for Q in range(1, cfg.get("gauss_qmax") + 1, 2):
        target = Q ** -0.5
        for A in arithmetic._coprime_vectors(Q, 1):
            row = np.abs(arithmetic.weyl_row(Q, A))
            gauss_worst = max(gauss_worst, float(np.max(np.abs(row - target))))
    gauss_ok = gauss_worst <= 1e-10

    bound_worst = 0.0
    for Q in range(1, cfg.get("bound_qmax") + 1):
        Bs = np.arange(1, Q + 1)
        cap = math.sqrt(2.0) * Q ** -0.5
        for A in arithmetic._all_vectors(Q, 1):
            gA = math.gcd(A[0], Q)
            mask = np.gcd(np.gcd(Bs, gA), Q) == 1
            if not np.any(mask):
                continue
            row = np.abs(arithmetic.weyl_row(Q, A))
            bound_worst = max(bound_worst,
                              float(np.max(row[mask])) - cap)
    bound_ok = bound_worst <= 1e-12

    fit = arithmetic.weyl_decay_fit(cfg.get("fit_d"), cfg.get("fit_qmax"))
    fit.to_csv(os.path.join(out, "weyl_decay.csv"))
    resid_above = float(np.max(np.asarray(fit.residuals)))
    fit_ok = (fit.exponent >= cfg.get("min_exponent")
              and resid_above <= math.log(cfg.get("envelope_slack")))
    ok = gauss_ok and bound_ok and fit_ok
    summary = {
        "gauss": {"worst_abs_error": gauss_worst, "ok": gauss_ok},
        "bound": {"worst_excess": bound_worst, "ok": bound_ok},
        "fit": {"d": fit.d, "exponent": fit.exponent,
                "constant": fit.constant, "max_residual_above": resid_above,
                "ok": fit_ok},
        "ok": ok,
    }
    _write_json(os.path.join(out, "weyl.json"), summary)
    return ok, summary


def _run_weyl_decay(cfg, out, seed, jobs):
    fit = arithmetic.weyl_decay_fit(cfg.get("d"), cfg.get("Qmax"))
    fit.to_csv(os.path.join(out, "weyl_decay.csv"))
    summary = {"d": fit.d, "Qmax": cfg.get("Qmax"),
               "exponent": fit.exponent, "constant": fit.constant,
               "ok": True}
    _write_json(os.path.join(out, "weyl_decay.json"), summary)
    return True, summary


def _run_variation(cfg, out, seed, jobs):
    tol = cfg.get("oracle_tol")
    max_len = cfg.get("max_len")
    worst = 0.0
    for i in range(cfg.get("n_oracle")):
        g = stream(seed, i)
        n = int(g.integers(2, max_len + 1))
        seq = g.standard_normal(n) + 1j * g.standard_normal(n)
        for r in cfg.get("r_list"):
            worst = max(worst, abs(variation.vr_exact(seq, r)
                                   - variation.vr_brute(seq, r)))
    oracle_ok = worst <= tol

    min_slack = math.inf
    violations = 0
    for i in range(cfg.get("n_jump")):
        g = stream(seed, 10 ** 6 + i)
        n = int(g.integers(4, cfg.get("jump_len") + 1))
        seq = g.standard_normal(n) + 1j * g.standard_normal(n)
        tau = float(g.uniform(0.05, 2.0))
        r = float(g.uniform(2.1, 8.0))
        passed, slack = variation.jump_variation_check(seq, tau, r)
        min_slack = min(min_slack, slack)
        violations += 0 if passed else 1
    jump_ok = violations == 0
    ok = oracle_ok and jump_ok
    summary = {
        "oracle": {"n": cfg.get("n_oracle"), "worst_error": worst,
                   "tol": tol, "ok": oracle_ok},
        "jump": {"n": cfg.get("n_jump"), "min_slack": min_slack,
                 "violations": violations, "ok": jump_ok},
        "ok": ok,
    }
    _write_json(os.path.join(out, "variation.json"), summary)
    return ok, summary


def _run_chaining(cfg, out, seed, jobs):
    worst_ratio = 0.0
    worst_tel = 0.0
    failures = 0
    for i in range(cfg.get("n_inst")):
        g = stream(seed, i)
        n = int(g.integers(2, cfg.get("max_times") + 1))
        dim = int(g.integers(1, cfg.get("max_dim") + 1))
        times = np.sort(g.uniform(0.0, 10.0, n))
        vals = g.standard_normal((n, dim)) + 1j * g.standard_normal((n, dim))
        vseq = variation.VecSequence(tuple(times), vals)
        try:
            cover = variation.build_chaining_cover(vseq)
            worst_ratio = max(worst_ratio,
                              variation.verify_cover(cover, vseq))
            worst_tel = max(worst_tel,
                            variation.chaining_telescope_check(cover, vseq))
        except AssertionError:
            failures += 1
    ok = (failures == 0 and worst_ratio <= 3.0 + 1e-9
          and worst_tel <= cfg.get("telescope_tol"))
    summary = {
        "n": cfg.get("n_inst"), "failures": failures,
        "worst_increment_ratio": worst_ratio,
        "worst_telescope": worst_tel, "ok": ok,
    }
    _write_json(os.path.join(out, "chaining.json"), summary)
    return ok, summary


def _converge_poly_grid():
    # 25 linear + 25 higher-class phases (alternating pure-quadratic and
    # quadratic-plus-cubic), all coefficients spread over (0, 1)
    polys = [polykit.Poly.linear((2 * i + 1) / 50.0) for i in range(25)]
    for i in range(25):
        lead = (2 * i + 1) / 50.0
        if i % 2 == 0:
            polys.append(polykit.Poly.vanish2((lead,)))
        else:
            polys.append(polykit.Poly.vanish2((lead, (i + 1) / 64.0)))
    return polys


def _run_converge(cfg, out, seed, jobs):
    eps0 = cfg.get("eps0")
    bump = make_bump(eps0)
    n_top = cfg.get("n_top")

    # scenario a: integer shift, window observable, polynomial grid
    times = [2 ** k for k in range(7, 17)] + [n_top]
    table = systems.ww_scan(systems.ZShift(), systems.obs_indicator(0, 100),
                            0, _converge_poly_grid(), times, bump)
    table.to_csv(os.path.join(out, "converge_scan.csv"))
    osc_max = max(table.oscillation.values())
    top_max = max(abs(table.values[(i, n_top)])
                  for i in range(len(table.polys)))
    a_ok = osc_max <= cfg.get("osc_tol") and top_max <= cfg.get("top_tol")

    # scenario b: rotation, character observable, resonant vs generic phase
    rot = systems.CircleRotation()
    fchar = systems.obs_char(1)
    res_tol = eps0 + cfg.get("res_pad")
    p_res = polykit.Poly.linear(1.0 - rot.alpha)
    v_res = averaging.orbit_average(rot, fchar, 0.0, bump, n_top, p_res)
    b_res = abs(v_res - bump.mass)
    p_gen = polykit.Poly.linear(0.25)
    v_gen = averaging.orbit_average(rot, fchar, 0.0, bump, n_top, p_gen)
    b_ok = b_res <= res_tol and abs(v_gen) <= 0.01

    # scenario c: skew product, quadratic resonance at x = 1/2
    skew = systems.SkewProduct()
    y0 = cfg.get("y0")
    fy = systems.obs_skew_char(1)
    p_skew = polykit.Poly.vanish2((-skew.alpha,))
    v_skew = averaging.orbit_average(skew, fy, (0.5, y0), bump, n_top, p_skew)
    c_res = abs(v_skew - e(y0) * bump.mass)
    c_ok = c_res <= res_tol

    ok = a_ok and b_ok and c_ok
    summary = {
        "scan": {"max_oscillation": osc_max, "max_top_abs": top_max,
                 "times": times, "ok": a_ok},
        "rotation": {"resonant_error": b_res, "generic_abs": abs(v_gen),
                     "tol": res_tol, "ok": b_ok},
        "skew": {"resonant_error": c_res, "tol": res_tol, "ok": c_ok},
        "ok": ok,
    }
    _write_json(os.path.join(out, "converge.json"), summary)
    return ok, summary


def _run_carleson(cfg, out, seed, jobs):
    eps0 = cfg.get("eps0")
    bump = make_bump(eps0)

    # part 1: modulation covariance on finite signals
    worst_cov = 0.0
    M_avg = 32
    for i in range(cfg.get("n_cov")):
        g = stream(seed, i)
        n = int(g.integers(8, cfg.get("cov_len") + 1))
        start = int(g.integers(-20, 21))
        f = Signal(start, g.standard_normal(n) + 1j * g.standard_normal(n))
        theta = int(g.integers(0, 256)) / 256.0
        theta2 = int(g.integers(0, 256)) / 256.0
        lhs = averaging.conv_average(modulate(f, theta), bump, M_avg,
                                     polykit.Poly.linear(-theta2), full=True)
        rhs = modulate(averaging.conv_average(
            f, bump, M_avg, polykit.Poly.linear(-(theta2 + theta)),
            full=True), theta)
        assert lhs.support_start == rhs.support_start
        worst_cov = max(worst_cov,
                        float(np.max(np.abs(lhs.values - rhs.values))))
    cov_ok = worst_cov <= cfg.get("cov_tol")

    # part 2: grid-aligned modulation leaves the theta-sup variation fixed
    L = cfg.get("grid_len")
    r = cfg.get("r")
    trunc = _truncation_list(L)
    g = stream(seed, 7777)
    base = g.standard_normal(L) + 1j * g.standard_normal(L)
    shift = int(g.integers(1, cfg.get("theta_count")))
    a1 = theta_sup_variation(base, bump, trunc, cfg.get("theta_count"), r)
    modded = modulate_cyclic(CyclicSignal(base),
                             shift * (L // cfg.get("theta_count")))
    a2 = theta_sup_variation(modded.values, bump, trunc,
                             cfg.get("theta_count"), r)
    grid_dev = float(np.max(np.abs(a1 - a2)))
    grid_ok = grid_dev <= cfg.get("grid_exact_tol")

    # part 3: l2 ratio stability across signal sizes
    sizes = cfg.get("sizes")
    batch = cfg.get("batch")
    if batch < 30:
        raise ConfigError("batch must be at least 30")
    per_size = []

    def ratio_for(L, r_val, draw):
        f = _gauss(seed, draw, L)
        best = theta_sup_variation(f, bump, _truncation_list(L),
                                   cfg.get("theta_count"), r_val)
        return float(np.linalg.norm(best) / np.linalg.norm(f))

    for L in sizes:
        vals = _map_jobs(lambda d, _L=L: ratio_for(_L, r, d),
                         range(batch), jobs)
        per_size.append(_stats(vals))
    size_ok = per_size[-1][0] <= cfg.get("size_slack") * per_size[0][0]

    # part 4: r-growth envelope at the smallest size, paired draws
    lo, hi = cfg.get("r_low"), cfg.get("r_high")
    vals_lo = _map_jobs(lambda d: ratio_for(sizes[0], lo, d),
                        range(batch), jobs)
    vals_hi = _map_jobs(lambda d: ratio_for(sizes[0], hi, d),
                        range(batch), jobs)
    m_lo, _, _ = _stats(vals_lo)
    m_hi, _, _ = _stats(vals_hi)
    envelope = (lo / (lo - 2.0)) / (hi / (hi - 2.0))
    env_cap = cfg.get("envelope_slack") * envelope
    env_ok = m_lo / m_hi <= env_cap

    rows = [(0, r, L, batch, mean, mx, se)
            for L, (mean, mx, se) in zip(sizes, per_size)]
    rows.append((0, lo, sizes[0], batch, m_lo, max(vals_lo),
                 _stats(vals_lo)[2]))
    rows.append((0, hi, sizes[0], batch, m_hi, max(vals_hi),
                 _stats(vals_hi)[2]))
    multipliers.ratio_table_csv(os.path.join(out, "carleson.csv"), rows)

    ok = cov_ok and grid_ok and size_ok and env_ok
    summary = {
        "covariance": {"worst": worst_cov, "tol": cfg.get("cov_tol"),
                       "ok": cov_ok},
        "grid_invariance": {"deviation": grid_dev, "ok": grid_ok},
        "sizes": {str(L): {"mean": m, "max": x, "stderr": s}
                  for L, (m, x, s) in zip(sizes, per_size)},
        "size_stability": {"ratio": per_size[-1][0] / per_size[0][0],
                           "slack": cfg.get("size_slack"), "ok": size_ok},
        "r_envelope": {"mean_low": m_lo, "mean_high": m_hi,
                       "growth": m_lo / m_hi, "cap": env_cap, "ok": env_ok},
        "ok": ok,
    }
    _write_json(os.path.join(out, "carleson.json"), summary)
    return ok, summary


# dense multiplier oracles: no FFT anywhere, direct O(M^2) summation


def _dense_dft_column(values, n0, M):
    # hat(b) = sum_n v(n) e(-n b / M) for integer-supported values
    b = np.arange(M)
    n = n0 + np.arange(len(values))
    return (np.asarray(values, dtype=complex)[None, :]
            * e(-(np.outer(b, n) % M) / M)).sum(axis=1)


def _dense_symbol(s, J, lambda_vec, bump, lam, M, a0=DEFAULT_A0):
    chi = make_chi(s)
    d = len(lambda_vec) + 1
    total = np.zeros(M, dtype=complex)
    grid = np.arange(M)
    for A, Q in arithmetic.arc_pairs(s, d):
        offs = []
        hit = True
        for lv, a in zip(lambda_vec, A):
            diff = (lv - a / Q) % 1.0
            diff = diff - 1.0 if diff > 0.5 else diff
            offs.append(diff)
            if abs(diff) > multipliers.arc_indicator_radius(s):
                hit = False
        if not hit:
            continue
        if not multipliers.kernel_gate(tuple(offs), J, a0):
            continue
        ker = make_Psi(bump, lam, J, s_floor=s, a0=a0)
        n0, vals = ker.at_integers()
        phases = np.zeros(len(vals))
        for k, mu in enumerate(tuple(offs), start=2):
            phases = phases + mu * (n0 + np.arange(len(vals))) ** k
        khat = _dense_dft_column(vals * e(-(phases % 1.0)), n0, M)
        for B in range(1, Q + 1):
            b0 = int(round(M * B / float(Q))) % M
            fp = arithmetic.FreqPoint(Q=Q, A=A, B=B)
            w = arithmetic.weyl_sum(fp, d)
            window = np.array([chi((b - b0) / M) for b in grid])
            total += w * np.roll(khat, b0) * window
    return total


def _dense_apply(symbol, fvals):
    # inverse DFT of symbol * DFT(f), all by direct summation
    M = len(fvals)
    b = np.arange(M)
    fhat = np.array([np.sum(fvals * e(-(n * b % M) / M)) for n in range(M)])
    prod = symbol * fhat
    return np.array([np.sum(prod * e((x * b % M) / M)) for x in range(M)]) / M


def _run_multiplier(cfg, out, seed, jobs):
    M = cfg.get("M")
    lam = cfg.get("lam")
    r = cfg.get("r")
    tol = cfg.get("tol")
    J_list = list(cfg.get("J_list"))
    bump = make_bump(0.25)
    errs = {"vr_s": 0.0, "vr_sd": 0.0, "vrd": 0.0}
    for s in cfg.get("s_list"):
        for draw in range(cfg.get("n_draw")):
            f = CyclicSignal(_gauss(seed, 100 * s + draw, M))
            got = multipliers.vr_s_operator(s, f, J_list, r, bump, lam=lam)
            symbols = [_dense_symbol(s, J, (0.0,), bump, lam, M)
                       for J in J_list]
            # per-arc symbol stacking matches the operator's sup over arcs
            per_arc = []
            chi = make_chi(s)
            for A, Q in arithmetic.arc_pairs(s, 2):
                rows = []
                for J in J_list:
                    ker = make_Psi(bump, lam, J, s_floor=s)
                    n0, vals = ker.at_integers()
                    khat = _dense_dft_column(vals, n0, M)
                    acc = np.zeros(M, dtype=complex)
                    for B in range(1, Q + 1):
                        b0 = int(round(M * B / float(Q))) % M
                        w = arithmetic.weyl_sum(
                            arithmetic.FreqPoint(Q=Q, A=A, B=B), 2)
                        window = np.array([chi((b - b0) / M)
                                           for b in range(M)])
                        acc += w * np.roll(khat, b0) * window
                    rows.append(_dense_apply(acc, f.values))
                per_arc.append(np.asarray(rows))
            want = np.zeros(M)
            for rows in per_arc:
                for x in range(M):
                    want[x] = max(want[x],
                                  variation.vr_exact(rows[:, x], r))
            errs["vr_s"] = max(errs["vr_s"],
                               float(np.max(np.abs(got.values - want))))

            # vr_sd on a 3-point lambda subset of the canonical grid
            lgrid = multipliers.lambda_grid_for(s, 2)[:3]
            got_sd = multipliers.vr_sd_operator(
                s, f, J_list, lgrid, r, bump, lam=lam, strict_modulus=False)
            want_sd = np.zeros(M)
            for lv in lgrid:
                rows = np.asarray([
                    _dense_apply(_dense_symbol(s, J, tuple(lv), bump, lam, M),
                                 f.values)
                    for J in J_list])
                for x in range(M):
                    want_sd[x] = max(want_sd[x],
                                     variation.vr_exact(rows[:, x], r))
            errs["vr_sd"] = max(errs["vr_sd"],
                                float(np.max(np.abs(got_sd.values
                                                    - want_sd))))

    # vrd on a short line signal, nested-loop oracle
    n = 48
    f = Signal(3, _gauss(seed, 9000, n))
    grid = [polykit.Poly.vanish2((0.3,)), polykit.Poly.linear(0.1)]
    ks = [1, 2, 3]
    got = multipliers.vrd_operator(f, bump, lam, grid, ks, r)
    kernels = {k: make_Psi(bump, lam, k).at_integers() for k in ks}
    polys = [polykit.Poly.zero()] + grid
    want = np.zeros(len(got))
    for xi in range(len(got)):
        x = got.support_start + xi
        best = 0.0
        for p in polys:
            vals = []
            for k in ks:
                n0, kv = kernels[k]
                tot = 0.0 + 0j
                for i, w in enumerate(kv):
                    m = n0 + i
                    j = x - m
                    if f.support_start <= j < f.support_start + len(f):
                        tot += (w * e(polykit.eval_phase(p, m))
                                * f.values[j - f.support_start])
                vals.append(tot)
            best = max(best, variation.vr_exact(np.array(vals), r))
        want[xi] = best
    errs["vrd"] = float(np.max(np.abs(got.values - want)))

    ok = all(v <= tol for v in errs.values())
    summary = {"errors": errs, "tol": tol, "M": M, "ok": ok}
    _write_json(os.path.join(out, "multiplier.json"), summary)
    return ok, summary


# ---------------------------------------------------------------------------
# sweeps


def _nonincreasing_within_se(points):
    """points: list of (mean, max, se); adjacent means may rise by <= 1 SE."""
    for (m0, _x0, s0), (m1, _x1, s1) in zip(points, points[1:]):
        if m1 - m0 > math.hypot(s0, s1):
            return False
    return True


def sweep_norm_ratio(kind, config):
    """Batched l2 norm-ratio sweep for one named operator.

    Returns a record {operator, rows, points, checks, ok}; rows are the CSV
    layout of ratio_table_csv.  Draws are paired across parameter points
    (same signals per draw index) so the decay comparisons are low-variance.
    """
    if kind not in SWEEP_OPERATORS:
        raise ConfigError("unknown operator %r (known: %s)"
                          % (kind, ", ".join(SWEEP_OPERATORS)))
    cfg = config
    batch = cfg.get("batch")
    if batch < 30:
        raise ConfigError("batch must be at least 30")
    seed = cfg.params.get("_seed", 2026)
    jobs = cfg.params.get("_jobs", 1)
    r = cfg.get("r")
    s_range = range(cfg.get("s_min"), cfg.get("s_max") + 1)
    bump = make_bump(cfg.get("eps0"))
    lam = cfg.get("lam")
    rows, points, checks = [], [], {}

    if kind == "maximal-arc":
        M = cfg.get("M") or multipliers.SUGGESTED_MODULUS
        for s in s_range:
            vals = _map_jobs(
                lambda d, _s=s: multipliers.maximal_arc_ratio(
                    _s, CyclicSignal(_gauss(seed, d, M)),
                    chi_a0=PROBE_CHI_A0),
                range(batch), jobs)
            stats = _stats(vals)
            points.append(stats)
            rows.append((s, 0.0, M, batch) + stats)
        checks["nonincreasing_in_s"] = _nonincreasing_within_se(points)
    elif kind == "seqspace":
        for s in s_range:
            freqs = multipliers.seqspace_freqs(s)
            length = cfg.get("seq_base") * 2 ** s
            vals = []
            for d in range(batch):
                c = _gauss(seed, d, len(freqs))
                vals.append(multipliers.seqspace_ratio(
                    c, s, (0, length), chi_a0=PROBE_CHI_A0))
            stats = _stats(vals)
            points.append(stats)
            rows.append((s, 0.0, length, batch) + stats)
        checks["nonincreasing_in_s"] = _nonincreasing_within_se(points)
    elif kind in ("vr-s", "vr-sd"):
        M = cfg.get("M") or multipliers.SUGGESTED_MODULUS
        J_list = list(cfg.get("J_list"))
        for s in s_range:
            # quartered window schedule: level-s arc frequencies sit at
            # spacing >= Q^-2 ~ 4^-s, so radius rho0*4^(1-s) keeps distinct
            # arcs' windows disjoint and the sup probes per-arc decay
            probe = _chi_a0_for_radius(s, cfg.get("rho0") * 0.25 ** (s - 1))
            if kind == "vr-s":
                def one(d, _s=s, _probe=probe):
                    f = CyclicSignal(_gauss(seed, d, M))
                    g = multipliers.vr_s_operator(
                        _s, f, J_list, r, bump, lam=lam,
                        chi_a0=_probe)
                    return float(np.linalg.norm(g.values.real)
                                 / np.linalg.norm(f.values))
                vals = _map_jobs(one, range(batch), jobs)
            else:
                # draw-independent symbols: build once per (lambda, J)
                stacks = []
                for lv in multipliers.lambda_grid_for(s, 2):
                    stack = np.asarray([
                        multipliers.build_arc_multiplier(
                            s, J, lv, bump, lam, M,
                            chi_a0=probe).values
                        for J in J_list])
                    stacks.append(stack)

                def one(d, _stacks=stacks):
                    f = _gauss(seed, d, M)
                    fhat = np.fft.fft(f)
                    best = np.zeros(M)
                    for stack in _stacks:
                        rows_ = np.fft.ifft(stack * fhat, axis=1)
                        np.maximum(best, variation.vr_batch(rows_, r),
                                   out=best)
                    return float(np.linalg.norm(best) / np.linalg.norm(f))
                vals = _map_jobs(one, range(batch), jobs)
            stats = _stats(vals)
            points.append(stats)
            rows.append((s, r, M, batch) + stats)
        if kind == "vr-sd":
            checks["nonincreasing_in_s"] = _nonincreasing_within_se(points)
        # vr-s levels are telescoping pieces with no per-level decay claim:
        # stats are reported, nothing asserted
    else:  # vr-linear-sup-theta
        sizes = cfg.get("sizes")
        theta_count = cfg.get("theta_count")

        def ratio_for(L, r_val, d):
            f = _gauss(seed, d, L)
            best = theta_sup_variation(f, bump, _truncation_list(L),
                                       theta_count, r_val)
            return float(np.linalg.norm(best) / np.linalg.norm(f))

        for L in sizes:
            vals = _map_jobs(lambda d, _L=L: ratio_for(_L, r, d),
                             range(batch), jobs)
            stats = _stats(vals)
            points.append(stats)
            rows.append((0, r, L, batch) + stats)
        checks["size_stable"] = (points[-1][0]
                                 <= cfg.get("size_slack") * points[0][0])
        lo, hi = cfg.get("r_low"), cfg.get("r_high")
        m_lo, x_lo, s_lo = _stats(_map_jobs(
            lambda d: ratio_for(sizes[0], lo, d), range(batch), jobs))
        m_hi, x_hi, s_hi = _stats(_map_jobs(
            lambda d: ratio_for(sizes[0], hi, d), range(batch), jobs))
        rows.append((0, lo, sizes[0], batch, m_lo, x_lo, s_lo))
        rows.append((0, hi, sizes[0], batch, m_hi, x_hi, s_hi))
        envelope = (lo / (lo - 2.0)) / (hi / (hi - 2.0))
        checks["r_envelope"] = (m_lo / m_hi
                                <= cfg.get("envelope_slack") * envelope)

    ok = all(checks.values())
    return {"operator": kind, "rows": rows,
            "points": [{"mean": m, "max": x, "stderr": s}
                       for m, x, s in points],
            "checks": checks, "ok": ok}


def _run_sweep(cfg, out, seed, jobs):
    cfg.params["_seed"] = seed
    cfg.params["_jobs"] = jobs
    record = sweep_norm_ratio(cfg.get("operator"), cfg)
    del cfg.params["_seed"], cfg.params["_jobs"]
    name = "sweep_%s" % cfg.get("operator").replace("-", "_")
    multipliers.ratio_table_csv(os.path.join(out, name + ".csv"),
                                record["rows"])
    payload = {k: v for k, v in record.items() if k != "rows"}
    _write_json(os.path.join(out, name + ".json"), payload)
    return record["ok"], payload


_RUNNERS = {
    "bump-check": _run_bump_check,
    "weyl": _run_weyl,
    "weyl-decay": _run_weyl_decay,
    "variation": _run_variation,
    "chaining": _run_chaining,
    "converge": _run_converge,
    "carleson": _run_carleson,
    "multiplier": _run_multiplier,
    "sweep": _run_sweep,
}


def run(config: ExperimentConfig, out_dir=".", seed=2026, jobs=1) -> int:
    """Execute one experiment; returns the exit code (0 ok, 2 check failed).

    Configuration problems raise ConfigError (the CLI maps them to code 1).
    Result files land in out_dir.
    """
    if config.kind not in _RUNNERS:
        raise ConfigError("unknown experiment kind %r" % (config.kind,))
    os.makedirs(out_dir, exist_ok=True)
    jobs = int(os.environ.get("MODVAR_JOBS", jobs))
    if jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    ok, summary = _RUNNERS[config.kind](config, out_dir, int(seed), jobs)
    flat = {k: v for k, v in summary.items() if not isinstance(v, dict)}
    print("[%s] %s %s" % (config.kind, "ok" if ok else "FAIL",
                          json.dumps(flat, sort_keys=True, default=str)))
    return 0 if ok else 2
