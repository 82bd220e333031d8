"""Scenario runner: headline comparisons as reproducible data products.

A scenario is described by a JSON-compatible mapping::

    {
      "scenario": "compare-orders",
      "units": "si",                          # or "scaled" (m = beta = c = |e| = 1)
      "params": {"omega0": 0.0, "lam": 0.01, "first_order": false},
      "noise": {"kind": "white"},             # or {"kind": "ou", "gamma": ...}
      "omega_grid": {"start": 1e14, "stop": 1e19, "num": 11, "spacing": "log"},
      "t_grid": {"start": 0.0, "stop": 10.0, "num": 101},
      "toggles": {"drop_oscillatory": false, "drop_runaway": true},
      "tolerances": {"bromwich": 1e-9, "quadrature": 1e-4},
      "ensemble": {"dt": 0.05, "T": 819.2, "n_traj": 200, "master_seed": 0},
      "output": {"dir": "out", "format": "csv"}
    }

Frequencies are angular (1/s in SI, m/beta in scaled units); times are
seconds or beta/m.  Every run writes its data file(s) plus a JSON sidecar
holding the fully resolved configuration.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import InvalidParameterError, ToleranceNotMetError
from .kernels import KernelOptions, eval_F, eval_G, eval_Gpm
from .noise import correlator_from_dict, NoiseCorrelator, WhiteNoise
from .oracle import bromwich_numeric, rate_quadrature
from .params import PhysicalParams, natural_params
from .roots import approx_roots, decay_rate_analytic, solve_roots
from .semiclassical import (EnsembleSpec, estimate_rate_mc, rate_semiclassical_free,
                            rate_semiclassical_harmonic)
from .spectra import (FORMULAS, RateOptions, rate_finite_time, rate_free_exact,
                      rate_free_limit_of_harmonic, rate_harmonic_asymptotic,
                      rate_perturbative_free, rate_white_baseline)

#: Environment variable naming the default output directory.
OUTPUT_ENV = "STOCHRAD_OUT"

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_IO = 0, 1, 2, 3

SCENARIOS = ("roots", "kernels", "spectrum-sweep", "finite-time", "compare-orders",
             "convergence-scan", "mc-estimate", "oracle-check")


# -- analysis ----------------------------------------------------------------

def compare_orders(omega, corr: NoiseCorrelator, params: PhysicalParams):
    """Free-particle rates obtained by different orders of limits.

    Returns a dict of arrays: the exact free rate (large time last), the
    free limit of the bound rate (large time first), the lowest-order
    free rate, the semiclassical rate and the white baseline, together
    with their ratios to the free limit and the term ``0.5 Gamma_white
    f_tilde(0)`` that separates the first two.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    rates = {
        "free_exact": rate_free_exact(w, corr, params).rate,
        "free_limit_of_harmonic": rate_free_limit_of_harmonic(w, corr, params).rate,
        "perturbative_free": rate_perturbative_free(w, corr, params).rate,
        "semiclassical_free": rate_semiclassical_free(w, corr, params).rate,
        "white": rate_white_baseline(w, params).rate,
    }
    ref = rates["free_limit_of_harmonic"]
    out = {"omega_k": w}
    out.update(rates)
    with np.errstate(divide="ignore", invalid="ignore"):
        out["ratio_exact_to_limit"] = rates["free_exact"] / ref
        out["ratio_perturbative_to_limit"] = rates["perturbative_free"] / ref
        out["ratio_semiclassical_to_limit"] = rates["semiclassical_free"] / ref
    out["unphysical_term"] = 0.5 * params.white_rate(w) * float(np.asarray(corr.f_tilde(0.0)))
    out["exact_minus_limit"] = rates["free_exact"] - ref
    return out


def decay_timescale(params: PhysicalParams):
    """Damping rate ``omega0^2 beta / 2m`` of the bound pair and its inverse.

    Also reports the exact ``-Re z2``.  For ``kappa = 0`` the rate is zero
    and ``infinite`` is set.
    """
    if params.kappa == 0 or params.beta == 0:
        return {"rate": 0.0, "time": math.inf, "exact_rate": 0.0, "infinite": True}
    rate = decay_rate_analytic(params)
    exact = solve_roots(params).decay_rate()
    return {"rate": rate, "time": 1.0 / rate, "exact_rate": exact,
            "exact_time": 1.0 / exact, "relative_difference": exact / rate - 1.0,
            "infinite": False}


@dataclass
class ConvergenceScan:
    """Finite-time rate on a time grid and the fitted decay of its deviation."""

    omega: float
    t: np.ndarray
    rate: np.ndarray
    asymptote: float
    envelope_rate: float = math.nan
    envelope_amplitude: float = math.nan
    fit_ok: bool = False

    @property
    def deviation(self):
        return np.abs(self.rate - self.asymptote)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "rate", "asymptote", "deviation"])
        for t, r, d in zip(self.t, self.rate, self.deviation):
            w.writerow([repr(float(t)), repr(float(r)), repr(float(self.asymptote)),
                        repr(float(d))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"omega_k": self.omega, "t": self.t.tolist(), "rate": self.rate.tolist(),
                "asymptote": self.asymptote, "envelope_rate": self.envelope_rate,
                "envelope_amplitude": self.envelope_amplitude, "fit_ok": self.fit_ok}


def _envelope_fit(t, dev, n_windows=12):
    """Log-linear fit to the windowed maxima of ``dev``."""
    edges = np.linspace(t[0], t[-1], n_windows + 1)
    tm, dm = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t <= hi)
        if not np.any(sel):
            continue
        k = np.argmax(np.where(sel, dev, -np.inf))
        if dev[k] > 0 and np.isfinite(dev[k]):
            tm.append(t[k])
            dm.append(dev[k])
    if len(tm) < 3:
        raise ValueError("too few windows with a nonzero deviation")
    slope, icpt = np.polyfit(tm, np.log(dm), 1)
    return -slope, math.exp(icpt)


def convergence_scan(omega, corr, params, t_grid, opts: RateOptions = None) -> ConvergenceScan:
    """Approach of the finite-time rate to the bound-particle asymptote.

    The deviation envelope is fitted by ``A exp(-g t)`` through windowed
    maxima; for a bound particle ``g`` should match the pair damping rate.
    A failed fit leaves ``fit_ok`` false and issues a warning.
    """
    if params.kappa <= 0:
        raise InvalidParameterError("convergence scan needs a bound particle (kappa > 0)")
    t = np.asarray(t_grid, dtype=float)
    rate = np.array([rate_finite_time(omega, ti, corr, params, opts) for ti in t])
    asym = float(rate_harmonic_asymptotic(omega, corr, params).rate[0])
    scan = ConvergenceScan(float(omega), t, rate, asym)
    with np.errstate(divide="ignore"):
        try:
            g, amp = _envelope_fit(t, scan.deviation)
        except (ValueError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"envelope fit failed ({exc}); returning raw series", RuntimeWarning)
            return scan
    scan.envelope_rate, scan.envelope_amplitude, scan.fit_ok = g, amp, bool(np.isfinite(g))
    return scan


# -- configuration -------------------------------------------------------------

DEFAULTS = {
    "units": "si",
    "params": {"first_order": False},
    "noise": {"kind": "white"},
    "omega_grid": {"start": 1e14, "stop": 1e19, "num": 11, "spacing": "log"},
    "t_grid": {"start": 0.0, "stop": 1.0, "num": 11, "spacing": "linear"},
    "toggles": {"drop_oscillatory": False, "drop_runaway": True, "include_runaway": False},
    "tolerances": {"bromwich": 1e-9, "quadrature": 1e-4},
    "formulas": ["white", "free_exact", "harmonic_asymptotic", "free_limit_of_harmonic",
                 "perturbative_free"],
    "kernel": {"id": "F0", "sign": "+", "omega": None, "omega_prime": None},
    "ensemble": {"dt": 0.05, "T": 819.2, "n_traj": 200, "master_seed": 0,
                 "integrator": "exact-free", "window": "rectangular", "n_segments": 2},
    "mc_mode": "free",
    "output": {"dir": None, "format": "csv"},
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _grid(spec):
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
    if spec.get("spacing", "linear") == "log":
        if start <= 0:
            raise InvalidParameterError("log grid needs a positive start")
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


def build_params(cfg) -> PhysicalParams:
    """Physical parameters from the ``units`` and ``params`` sections."""
    p = dict(cfg["params"])
    first_order = bool(p.pop("first_order", False))
    omega0 = p.pop("omega0", None)
    if cfg["units"] == "scaled":
        allowed = {"kappa", "lam", "hbar"}
        extra = set(p) - allowed
        if extra:
            raise InvalidParameterError(f"scaled units accept only {sorted(allowed)}, got {sorted(extra)}")
        params = natural_params(omega0=omega0, **p) if omega0 is not None else natural_params(**p)
    elif cfg["units"] == "si":
        params = PhysicalParams(**p)
        if omega0 is not None:
            params = params.with_omega0(float(omega0))
    else:
        raise InvalidParameterError("units must be 'si' or 'scaled'")
    return params.first_order() if first_order else params


@dataclass
class ScenarioConfig:
    """Fully resolved scenario: raw mapping plus the objects built from it."""

    raw: dict
    params: PhysicalParams
    noise: NoiseCorrelator
    omega: np.ndarray
    t: np.ndarray
    out_dir: str
    fmt: str
    extras: dict = field(default_factory=dict)

    @property
    def scenario(self):
        return self.raw["scenario"]

    @classmethod
    def from_dict(cls, d):
        if "scenario" not in d:
            raise InvalidParameterError("config needs a 'scenario' entry")
        cfg = _merge(DEFAULTS, d)
        if cfg["scenario"] not in SCENARIOS:
            raise InvalidParameterError(f"unknown scenario {cfg['scenario']!r}; choose from {SCENARIOS}")
        if cfg["output"]["format"] not in ("csv", "json"):
            raise InvalidParameterError("output format must be 'csv' or 'json'")
        params = build_params(cfg)
        noise = correlator_from_dict(cfg["noise"])
        out_dir = cfg["output"]["dir"] or os.environ.get(OUTPUT_ENV, "stochrad_out")
        cfg["output"]["dir"] = out_dir
        return cls(cfg, params, noise, _grid(cfg["omega_grid"]), _grid(cfg["t_grid"]),
                   out_dir, cfg["output"]["format"])

    @classmethod
    def from_json(cls, path, overrides=None):
        with open(path) as fh:
            d = json.load(fh)
        return cls.from_dict(_merge(d, overrides or {}))

    def resolved(self):
        """Configuration with derived constants, for the JSON sidecar."""
        r = copy.deepcopy(self.raw)
        r["resolved_params"] = self.params.to_dict()
        r["resolved_noise"] = self.noise.to_dict()
        r["omega_values"] = self.omega.tolist()
        r["t_values"] = self.t.tolist()
        r["package_version"] = __version__
        return r


# -- scenarios -----------------------------------------------------------------

def _rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _table(header, rows):
    return {"header": list(header), "rows": [list(r) for r in rows]}


def _rate_options(cfg):
    tg = cfg.raw["toggles"]
    drop_runaway = bool(tg.get("drop_runaway", True)) and not bool(tg.get("include_runaway", False))
    return RateOptions(drop_oscillatory=bool(tg.get("drop_oscillatory", False)),
                       drop_runaway=drop_runaway)


def _scenario_roots(cfg):
    p = cfg.params
    exact = solve_roots(p)
    approx = approx_roots(p)
    rows = []
    for name, z, za in zip(("z1", "z2", "z3"), (exact.z1, exact.z2, exact.z3),
                           (approx.z1, approx.z2, approx.z3)):
        if z is None:
            continue
        rows.append((name, z.real, z.imag, za.real, za.imag))
    summary = {"confluent": exact.confluent, "decay": decay_timescale(p)}
    return _table(["root", "real", "imag", "approx_real", "approx_imag"], rows), summary, True


def _scenario_kernels(cfg):
    k = cfg.raw["kernel"]
    kid = k["id"]
    p, roots = cfg.params, solve_roots(cfg.params)
    opts = KernelOptions(include_runaway=bool(cfg.raw["toggles"].get("include_runaway", False)))
    t = cfg.t
    if kid in ("F0", "F1", "F2"):
        vals = eval_F(int(kid[1]), t, roots, p, opts)
    elif kid in ("G0", "G1"):
        vals = eval_G(int(kid[1]), k["sign"], float(k["omega"]), t, roots, p, opts)
    elif kid == "Gpm":
        signs = tuple(k.get("signs", ("+", "+")))
        vals = eval_Gpm(signs, float(k["omega"]), float(k["omega_prime"]), t, roots, p, opts)
    else:
        raise InvalidParameterError(f"unknown kernel {kid!r}")
    vals = np.atleast_1d(vals)
    rows = [(ti, kid, v.real, v.imag) for ti, v in zip(t, vals)]
    return _table(["t", "kernel", "real", "imag"], rows), {"kernel": kid}, True


def _scenario_spectrum(cfg):
    rows = []
    for name in cfg.raw["formulas"]:
        if name == "semiclassical_free":
            s = rate_semiclassical_free(cfg.omega, cfg.noise, cfg.params)
        elif name == "semiclassical_harmonic":
            s = rate_semiclassical_harmonic(cfg.omega, cfg.noise, cfg.params)
        elif name in FORMULAS:
            s = FORMULAS[name](cfg.omega, cfg.noise, cfg.params)
        else:
            raise InvalidParameterError(f"unknown formula {name!r}")
        rows += [(w, r, name, "") for w, r in zip(s.omega, s.rate)]
    return _table(["omega_k", "rate", "formula", "t"], rows), {"formulas": cfg.raw["formulas"]}, True


def _scenario_finite_time(cfg):
    opts = _rate_options(cfg)
    rows = []
    for t in cfg.t:
        vals = rate_finite_time(cfg.omega, float(t), cfg.noise, cfg.params, opts)
        rows += [(w, r, "finite_time", float(t)) for w, r in zip(cfg.omega, vals)]
    return _table(["omega_k", "rate", "formula", "t"], rows), {"options": opts.__dict__}, True


COMPARE_COLUMNS = ("omega_k", "free_exact", "free_limit_of_harmonic", "perturbative_free",
                   "semiclassical_free", "white", "ratio_exact_to_limit",
                   "ratio_perturbative_to_limit", "ratio_semiclassical_to_limit",
                   "unphysical_term", "exact_minus_limit")


def _scenario_compare(cfg):
    rec = compare_orders(cfg.omega, cfg.noise, cfg.params)
    rows = list(zip(*(rec[c] for c in COMPARE_COLUMNS)))
    summary = {"ratio_exact_to_limit": [float(np.min(rec["ratio_exact_to_limit"])),
                                        float(np.max(rec["ratio_exact_to_limit"]))]}
    return _table(COMPARE_COLUMNS, rows), summary, True


def _scenario_convergence(cfg):
    omega = float(cfg.omega[0])
    scan = convergence_scan(omega, cfg.noise, cfg.params, cfg.t, _rate_options(cfg))
    rows = list(zip(scan.t, scan.rate, np.full(scan.t.size, scan.asymptote), scan.deviation))
    decay = decay_timescale(cfg.params)
    summary = {"omega_k": omega, "envelope_rate": scan.envelope_rate,
               "envelope_amplitude": scan.envelope_amplitude, "fit_ok": scan.fit_ok,
               "expected_rate": decay["rate"]}
    return _table(["t", "rate", "asymptote", "deviation"], rows), summary, True


def _scenario_mc(cfg):
    spec = EnsembleSpec(**cfg.raw["ensemble"])
    mode = cfg.raw["mc_mode"]
    res = estimate_rate_mc(spec, cfg.noise, cfg.params, mode)
    rows = list(zip(res.omega, res.rate, res.stderr))
    summary = {"mode": mode, "n_traj": res.n_traj, "bandwidth": res.bandwidth,
               "resolved_band": [float(res.omega[res.resolved][0]),
                                 float(res.omega[res.resolved][-1])]}
    return _table(["omega", "rate", "stderr"], rows), summary, True


def _oracle_kernel_rows(cfg, tol):
    p = cfg.params
    roots = solve_roots(p)
    w = float(cfg.omega[0])
    wp = float(cfg.omega[-1]) if cfg.omega.size > 1 else 1.5 * w
    rows = []
    for t in cfg.t:
        if t <= 0:
            continue
        cases = [("F0", "F0", {}, eval_F(0, t, roots, p)),
                 ("F1", "F1", {}, eval_F(1, t, roots, p))]
        for s in "+-":
            for n in (0, 1):
                cases.append((f"G{n}{s}", f"G{n}", {"sign": s, "omega": w},
                              eval_G(n, s, w, t, roots, p)))
        cases.append(("G+-", "Gpm", {"signs": ("+", "-"), "omega": w, "omega_prime": wp},
                      eval_Gpm(("+", "-"), w, wp, t, roots, p)))
        for label, kid, args, value in cases:
            ref = bromwich_numeric(kid, args, float(t), p, exclude_runaway=p.beta > 0)
            err = abs(value - ref) / max(abs(ref), 1e-300)
            rows.append(("bromwich", f"{label}@t={t:g}", abs(value), abs(ref), err, tol,
                         bool(err <= tol)))
    return rows


def _scenario_oracle(cfg):
    tols = cfg.raw["tolerances"]
    rows = _oracle_kernel_rows(cfg, float(tols["bromwich"]))
    if not isinstance(cfg.noise, WhiteNoise):
        tq = float(tols["quadrature"])
        opts = _rate_options(cfg)
        for w in cfg.omega:
            for t in cfg.t:
                if t <= 0:
                    continue
                ref = rate_finite_time(float(w), float(t), cfg.noise, cfg.params, opts)
                try:
                    val = rate_quadrature(float(w), float(t), cfg.noise, cfg.params,
                                          rtol=max(tq, 1e-12))
                except ToleranceNotMetError as exc:
                    val = exc.estimate
                err = abs(val - ref) / max(abs(ref), 1e-300)
                rows.append(("quadrature", f"w={w:g},t={t:g}", val, ref, err, tq,
                             bool(err <= tq)))
    ok = all(r[-1] for r in rows)
    summary = {"checks": len(rows), "failures": sum(not r[-1] for r in rows)}
    header = ["check", "case", "value", "reference", "rel_error", "tolerance", "passed"]
    return _table(header, rows), summary, ok


_RUNNERS = {
    "roots": _scenario_roots,
    "kernels": _scenario_kernels,
    "spectrum-sweep": _scenario_spectrum,
    "finite-time": _scenario_finite_time,
    "compare-orders": _scenario_compare,
    "convergence-scan": _scenario_convergence,
    "mc-estimate": _scenario_mc,
    "oracle-check": _scenario_oracle,
}


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


@dataclass
class ScenarioResult:
    status: int
    table: dict = None
    summary: dict = None
    files: list = field(default_factory=list)
    message: str = ""

    def format_table(self, max_rows=20):
        if not self.table:
            return self.message
        head = self.table["header"]
        lines = ["  ".join(f"{h:>14s}" for h in head)]
        for row in self.table["rows"][:max_rows]:
            cells = []
            for x in row:
                if isinstance(x, (float, np.floating)):
                    cells.append(f"{x:14.6g}")
                else:
                    cells.append(f"{str(x):>14s}")
            lines.append("  ".join(cells))
        if len(self.table["rows"]) > max_rows:
            lines.append(f"... {len(self.table['rows']) - max_rows} more rows")
        return "\n".join(lines)


def run_scenario(config, write=True) -> ScenarioResult:
    """Run a scenario from a mapping or :class:`ScenarioConfig`.

    Returns a :class:`ScenarioResult` whose ``status`` follows the exit
    codes: 0 success, 1 invalid configuration, 2 tolerance failure,
    3 I/O failure.
    """
    try:
        cfg = config if isinstance(config, ScenarioConfig) else ScenarioConfig.from_dict(config)
    except (InvalidParameterError, KeyError, TypeError, ValueError) as exc:
        return ScenarioResult(EXIT_CONFIG, message=f"invalid config: {exc}")
    try:
        table, summary, ok = _RUNNERS[cfg.scenario](cfg)
    except ToleranceNotMetError as exc:
        return ScenarioResult(EXIT_TOLERANCE, message=str(exc))
    except (InvalidParameterError, KeyError, TypeError) as exc:
        return ScenarioResult(EXIT_CONFIG, message=f"invalid config: {exc}")
    status = EXIT_OK if ok else EXIT_TOLERANCE
    result = ScenarioResult(status, table, summary)
    if not write:
        return result
    stem = cfg.scenario.replace("-", "_")
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        data_path = os.path.join(cfg.out_dir, f"{stem}.{cfg.fmt}")
        if cfg.fmt == "csv":
            text = _rows_csv(table["header"], table["rows"])
        else:
            text = json.dumps(table, indent=2, default=_json_default)
        with open(data_path, "w", newline="") as fh:
            fh.write(text)
        meta_path = os.path.join(cfg.out_dir, f"{stem}.meta.json")
        meta = {"config": cfg.resolved(), "summary": summary, "status": status,
                "data_file": os.path.basename(data_path)}
        with open(meta_path, "w") as fh:
            json.dump(meta, fh, indent=2, default=_json_default)
    except OSError as exc:
        return ScenarioResult(EXIT_IO, table, summary, message=f"I/O failure: {exc}")
    result.files = [data_path, meta_path]
    return result
