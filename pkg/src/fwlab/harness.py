"""
Experiment orchestration: single runs, (B, b) sweeps, lifespan and rate
studies, small-data and continuity probes, with deterministic persistence.

Every experiment is described by an :class:`ExperimentConfig` (kind, datum,
typed parameters) that round-trips through a key-value text file and hashes
to a short identifier.  Results are written to
``output_dir/<kind>/<config-hash>/`` together with a manifest.

Config file schema (``configparser`` syntax)::

    [experiment]
    kind = run                 ; run | sweep | bounds | decay | rate | ...
    output_dir = results

    [datum]
    kind = odd_gaussian        ; gaussian | odd_gaussian | zero | file
    lam = 1.0
    scale = 8                  ; optional u0^n(x) = n^{-1/2} u0(nx)
    path = data.txt            ; only for kind = file

    [params]
    B = 0.5
    b = 1.5
    ...                        ; see PARAMS for every key and its default
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, bounds, burgers, evolution, linear, spectral
from . import initial_data as idata
from .errors import InsufficientSamplesError
from .spectral import Field, Grid, KernelParams

KINDS = (
    "run",
    "sweep",
    "bounds",
    "decay",
    "rate",
    "burgers-compare",
    "lifespan-convergence",
    "global-probe",
    "continuity-probe",
)

NO_BLOWUP = "NO-BLOWUP-BY-HORIZON"
VERDICT_CODES = {evolution.BLOWUP: "B", NO_BLOWUP: "G", evolution.ABORTED: "A"}


def _floats(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (parser, default)
PARAMS = {
    "p": (int, 2),
    "B": (float, 0.5),
    "b": (float, 1.5),
    "half_width": (float, 20.0),
    "n_points": (int, 2048),
    "t_end": (float, 2.0),
    "cfl": (float, 0.2),
    "m_stop": (float, 1e4),
    "dt_floor": (float, 1e-12),
    "tail_tol": (float, 1e-8),
    "dealias": (_bool, True),
    "C": (float, bounds.DEFAULT_C),
    "alphas": (_floats, bounds.DEFAULT_ALPHAS),
    "rate_window": (_floats, (1e2, 1e4)),
    "escalate": (_bool, True),
    "auto_box": (_bool, True),
    # sweep
    "B_grid": (_floats, (0.01, 0.1, 1.0, 10.0)),
    "b_grid": (_floats, (0.01, 0.1, 1.0, 10.0)),
    "horizon": (float, 0.0),
    # decay
    "r_list": (_floats, (2.0, 4.0, math.inf)),
    "t_min": (float, 10.0),
    "t_max": (float, 100.0),
    "n_times": (int, 12),
    "dx": (float, 0.1),
    # burgers-compare
    "T_list": (_floats, (0.25, 0.5)),
    # lifespan-convergence: B fixed, b varies (or pairs when B_list is given)
    "b_list": (_floats, (1.0, 0.1, 0.01)),
    "B_list": (_floats, ()),
    # global-probe
    "eps_list": (_floats, (1e-2, 1e-3)),
    "contrast": (_bool, True),
    # continuity-probe
    "delta_list": (_floats, (0.04, 0.02, 0.01)),
    "probe_time": (float, 0.1),
    "probe_horizon": (float, 0.5),
}

KIND_DEFAULTS = {
    "sweep": {"n_points": 1024},
    "global-probe": {"p": 5, "horizon": 50.0},
    "burgers-compare": {"B": 1e-3},
    "lifespan-convergence": {"t_end": 3.0},
}


def parse_param(name: str, value):
    if name not in PARAMS:
        raise KeyError(f"unknown parameter {name!r}")
    return PARAMS[name][0](value)


@dataclass
class ExperimentConfig:
    kind: str
    datum: dict = field(default_factory=lambda: {"kind": "gaussian", "lam": 1.0})
    params: dict = field(default_factory=dict)
    output_dir: str = "results"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        full = {k: v for k, (_, v) in PARAMS.items()}
        full.update(KIND_DEFAULTS.get(self.kind, {}))
        for k, v in self.params.items():
            full[k] = parse_param(k, v)
        self.params = full

    def __getitem__(self, name):
        return self.params[name]

    def canonical(self) -> dict:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"kind": self.kind, "datum": dict(self.datum), "params": params}

    @property
    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, default=_json_default)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def with_params(self, **kw) -> "ExperimentConfig":
        params = dict(self.params)
        params.update(kw)
        return ExperimentConfig(self.kind, dict(self.datum), params, self.output_dir)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["experiment"] = {"kind": self.kind, "output_dir": self.output_dir}
        cp["datum"] = {k: str(v) for k, v in self.datum.items()}
        cp["params"] = {k: _fmt(v) for k, v in self.params.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        cp.read_string(text)
        exp = cp["experiment"]
        datum = dict(cp["datum"]) if cp.has_section("datum") else {"kind": "gaussian", "lam": "1.0"}
        params = dict(cp["params"]) if cp.has_section("params") else {}
        return cls(exp["kind"], _datum_spec(datum), params, exp.get("output_dir", "results"))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_ini(Path(path).read_text())


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _datum_spec(d: dict) -> dict:
    out = {"kind": d.get("kind", "gaussian")}
    if "lam" in d:
        out["lam"] = float(d["lam"])
    if "scale" in d and int(d["scale"]) != 1:
        out["scale"] = int(d["scale"])
    if "path" in d:
        out["path"] = str(d["path"])
    return out


def build_datum(spec: dict) -> idata.InitialDatum:
    """Datum from a ``[datum]`` section (``kind``, ``lam``, ``scale``, ``path``)."""
    kind = spec.get("kind", "gaussian")
    lam = float(spec.get("lam", 1.0))
    if kind == "gaussian":
        d = idata.gaussian(lam)
    elif kind == "odd_gaussian":
        d = idata.odd_gaussian(lam)
    elif kind == "zero":
        d = idata.zero()
    elif kind == "file":
        d = idata.load_custom(spec["path"])
    else:
        raise ValueError(f"unknown datum kind {kind!r}")
    n = int(spec.get("scale", 1))
    return idata.scaled(d, n) if n > 1 else d


def _kernel(B: float, b: float) -> KernelParams:
    return KernelParams(float(B), float(b), allow_zero=B == 0)


def datum_radius(f: Field, tol: float) -> float:
    """Smallest ``R`` with ``|u0(x)| < tol max|u0|`` for ``|x| > R``."""
    v = np.abs(f.values)
    if v.max() == 0:
        return 0.0
    big = np.nonzero(v >= tol * v.max())[0]
    return float(np.max(np.abs(f.grid.x[big])))


def kernel_box(grid: Grid, kernel: KernelParams, tail_tol: float, t_end: float = 0.0, radius: float = 0.0) -> Grid:
    """Enlarge ``grid`` so neither the kernel tail nor the dispersed wave reaches ``+-L``.

    The nonlocal term feeds about ``B b exp(-b|x|)`` into the far field at
    once, so ``L`` must exceed ``log(max(Bb, 1)/tail_tol)/b``; long waves move
    at up to ``2B/b``, so ``L`` must also exceed ``radius + 2 (2B/b) t_end``.
    The spacing of ``grid`` is kept (point count rounded up to a power of two).
    """
    if kernel.B == 0:
        return grid
    B, b = kernel.B, kernel.b
    need = max(
        (math.log(max(B * b, 1.0) / tail_tol) + 6.0) / b,
        radius + 6.0 + 2.0 * (2.0 * B / b) * t_end,
    )
    if need <= grid.half_width:
        return grid
    n = grid.n_points
    while grid.dx * n < 2 * need:
        n *= 2
    return Grid(n * grid.dx / 2, n)


def sim_config(cfg: ExperimentConfig, datum: Optional[idata.InitialDatum] = None, **over) -> evolution.SimConfig:
    P = {**cfg.params, **over}
    kernel = _kernel(P["B"], P["b"])
    grid = P.get("grid") or Grid(P["half_width"], P["n_points"])
    if P["auto_box"] and "grid" not in over:
        radius = datum_radius(idata.sample(datum, grid, P["tail_tol"]), P["tail_tol"]) if datum is not None else grid.half_width / 2
        grid = kernel_box(grid, kernel, P["tail_tol"], P["t_end"], radius)
    return evolution.SimConfig(
        kernel=kernel,
        grid=grid,
        p=P["p"],
        t_end=P["t_end"],
        cfl=P["cfl"],
        m_stop=P["m_stop"],
        dt_floor=P["dt_floor"],
        dealias=P["dealias"],
        tail_tol=P["tail_tol"],
        hs_order=P.get("hs_order", 3.0),
    )


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, tuple):
        return list(o)
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, default=_json_default)


def _clean(obj):
    """Replace non-finite floats by strings so output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _rows_to_csv(rows: list, path=None) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


class _Output:
    """Directory ``output_dir/<kind>/<hash>/`` with a manifest written on close."""

    def __init__(self, cfg: ExperimentConfig, write: bool):
        self.cfg = cfg
        self.write = write
        self.dir = Path(cfg.output_dir) / cfg.kind / cfg.hash
        self.files = {}
        self.start = time.perf_counter()
        if write:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / "config.ini").write_text(cfg.to_ini())

    def put(self, name: str, text: str) -> Optional[str]:
        if not self.write:
            return None
        path = self.dir / name
        path.write_text(text)
        self.files[name] = str(path)
        return str(path)

    def close(self, extra: Optional[dict] = None) -> None:
        if not self.write:
            return
        manifest = {
            "experiment": self.cfg.kind,
            "config_hash": self.cfg.hash,
            "inputs": self.cfg.canonical(),
            "code_version": __version__,
            "wall_time_s": time.perf_counter() - self.start,
            "files": sorted(self.files),
            **(extra or {}),
        }
        (self.dir / "manifest.json").write_text(_dumps(manifest))


# ---------------------------------------------------------------- run


@dataclass
class RunRecord:
    config: dict
    config_hash: str
    verdict: dict
    scalars: dict
    files: dict
    code_version: str
    sandwich: dict = field(default_factory=dict)
    escalated: bool = False

    def to_json(self) -> str:
        return _dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))

    @property
    def t0(self) -> Optional[float]:
        return self.verdict.get("t0_estimate")


def _simulate(cfg: ExperimentConfig, datum: idata.InitialDatum, **over):
    sc = sim_config(cfg, datum, **over)
    u0 = idata.sample(datum, sc.grid, sc.tail_tol)
    return evolution.run(sc, u0)


def _sandwich(result: evolution.RunResult, report: bounds.BoundsReport) -> dict:
    v = result.verdict
    if v.kind != evolution.BLOWUP:
        return {"checked": False}
    lo, hi = v.t0_bracket
    width = hi - lo
    lower = report.lifespan_lower
    upper = report.best_upper
    t0 = v.t0_estimate
    ok = lower <= t0 and (not math.isfinite(upper) or t0 <= upper + width)
    return {"checked": True, "lower": lower, "upper": upper, "t0": t0, "bracket_width": width, "holds": bool(ok)}


def cmd_run(cfg: ExperimentConfig, write: bool = True) -> RunRecord:
    """Simulate, evaluate all bounds and persist one run.

    A blow-up within 10% of the horizon, or a violated sandwich
    ``lifespan_lower <= T0 <= T_upper + bracket``, triggers one re-run at
    twice the resolution and half the Courant factor.
    """
    datum = build_datum(cfg.datum)
    kernel = _kernel(cfg["B"], cfg["b"])
    report = bounds.bounds_report(datum, kernel, C=cfg["C"], alphas=cfg["alphas"]) if cfg["p"] == 2 else None
    result = _simulate(cfg, datum)
    sandwich = _sandwich(result, report) if report else {"checked": False}
    escalated = False
    v = result.verdict
    near_horizon = v.kind == evolution.BLOWUP and v.t0_estimate >= 0.9 * cfg["t_end"]
    if cfg["escalate"] and (near_horizon or sandwich.get("holds") is False):
        escalated = True
        result = _simulate(cfg, datum, n_points=2 * cfg["n_points"], cfl=cfg["cfl"] / 2)
        sandwich = _sandwich(result, report) if report else {"checked": False}
    out = _Output(cfg, write)
    out.put("series.csv", result.series.to_csv())
    out.put("characteristics.csv", result.series.characteristics_to_csv(result.final.x0))
    scalars = {
        "t0": result.verdict.t0_estimate,
        "n_steps": result.n_steps,
        "burgers_lifespan": bounds.burgers_lifespan(datum),
        "inf_deriv": datum.inf_deriv,
    }
    if report is not None:
        out.put("bounds.json", report.to_json())
        scalars.update(lifespan_lower=report.lifespan_lower, best_upper=report.best_upper)
        scalars["criteria"] = {c.name: c.status for c in report.criteria}
    if result.verdict.kind == evolution.BLOWUP:
        try:
            fit = evolution.blowup_rate_fit(result.series, result.verdict.t0_estimate, tuple(cfg["rate_window"]))
            scalars["c_hat"] = fit.c_hat
            scalars["rate_samples"] = fit.n_samples
        except InsufficientSamplesError as exc:
            scalars["rate_error"] = str(exc)
    env = evolution.envelope_report(result, datum.l2_norm, datum.linf_norm, datum.sup_deriv)
    scalars["envelopes"] = asdict(env)
    scalars["envelopes_hold"] = env.holds()
    rec = RunRecord(
        config=cfg.canonical(),
        config_hash=cfg.hash,
        verdict=result.verdict.to_dict(),
        scalars=scalars,
        files=dict(out.files),
        code_version=__version__,
        sandwich=sandwich,
        escalated=escalated,
    )
    out.put("record.json", rec.to_json())
    out.close({"verdict": result.verdict.kind})
    return rec


def cmd_bounds(cfg: ExperimentConfig, write: bool = True) -> bounds.BoundsReport:
    datum = build_datum(cfg.datum)
    report = bounds.bounds_report(datum, _kernel(cfg["B"], cfg["b"]), C=cfg["C"], alphas=cfg["alphas"])
    out = _Output(cfg, write)
    out.put("bounds.json", report.to_json())
    out.put("bounds.txt", report.table() + "\n")
    out.close()
    return report


def cmd_rate(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Blow-up rate ``c_hat = mean m(t)(T0 - t)`` over ``|m|`` in ``rate_window``."""
    datum = build_datum(cfg.datum)
    result = _simulate(cfg, datum)
    if result.verdict.kind != evolution.BLOWUP:
        raise RuntimeError(f"run did not blow up: {result.verdict.kind} {result.verdict.reason}")
    fit = evolution.blowup_rate_fit(result.series, result.verdict.t0_estimate, tuple(cfg["rate_window"]))
    rec = {
        "config_hash": cfg.hash,
        "t0": result.verdict.t0_estimate,
        "c_hat": fit.c_hat,
        "spread": fit.residual,
        "n_samples": fit.n_samples,
        "window": list(fit.window),
        "in_expected_range": -1.1 <= fit.c_hat <= -0.9,
    }
    out = _Output(cfg, write)
    out.put("series.csv", result.series.to_csv())
    out.put("rate.json", _dumps(rec))
    out.close()
    return rec


# ---------------------------------------------------------------- sweep


@dataclass
class SweepOutcome:
    B_grid: tuple
    b_grid: tuple
    horizon: float
    cells: list  # row-major over b (rows) then B (columns)
    small_b_violations: list
    monotonicity_violations: list
    A: Optional[float]

    def cell(self, i_b: int, j_B: int) -> dict:
        return self.cells[i_b * len(self.B_grid) + j_B]

    def matrix_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["b\\B"] + [repr(B) for B in self.B_grid])
        for i, b in enumerate(self.b_grid):
            w.writerow([repr(b)] + [VERDICT_CODES[self.cell(i, j)["verdict"]] for j in range(len(self.B_grid))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return asdict(self)


def _sweep_cell(args):
    cfg_dict, datum_spec, i_b, j_B = args
    cfg = ExperimentConfig("run", datum_spec, cfg_dict)
    datum = build_datum(datum_spec)
    res = _simulate(cfg, datum)
    kind = res.verdict.kind
    verdict = NO_BLOWUP if kind == evolution.REACHED_HORIZON else kind
    return {
        "i_b": i_b,
        "j_B": j_B,
        "B": cfg["B"],
        "b": cfg["b"],
        "verdict": verdict,
        "t0": {evolution.BLOWUP: res.verdict.t0_estimate, evolution.REACHED_HORIZON: cfg["t_end"]}.get(kind, math.nan),
        "reason": res.verdict.reason,
        "config_hash": cfg.hash,
    }


def cmd_sweep(cfg: ExperimentConfig, workers: int = 1, write: bool = True) -> SweepOutcome:
    """Classify a log-spaced ``(B, b)`` grid as blow-up or no blow-up by the horizon."""
    datum = build_datum(cfg.datum)
    T_b = bounds.burgers_lifespan(datum)
    horizon = cfg["horizon"] or 3.0 * T_b
    if not math.isfinite(horizon) or horizon <= T_b:
        raise ValueError(f"horizon {horizon} must exceed the Burgers lifespan {T_b}")
    Bs, bs = tuple(cfg["B_grid"]), tuple(cfg["b_grid"])
    if not all(map(math.isfinite, Bs + bs)):
        raise ValueError("sweep grids must be finite")
    base = {k: v for k, v in cfg.params.items() if k in ("p", "half_width", "n_points", "cfl", "m_stop", "dt_floor", "tail_tol", "dealias")}
    tasks = [({**base, "B": B, "b": b, "t_end": horizon}, cfg.datum, i, j) for i, b in enumerate(bs) for j, B in enumerate(Bs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, tasks))
    else:
        cells = [_sweep_cell(t) for t in tasks]
    # merge by grid index, never by completion order
    cells.sort(key=lambda c: (c["i_b"], c["j_B"]))

    A = bounds.small_b_threshold(datum, cfg["C"]) if datum.inf_deriv < 0 else None
    cor = []
    for c in cells:
        c["small_b_region"] = bool(A is not None and c["B"] > 1 and c["b"] < 1 and c["b"] <= A * c["B"] ** (-4 / 3))
        if c["small_b_region"] and c["verdict"] != evolution.BLOWUP:
            cor.append((c["B"], c["b"]))
    outcome = SweepOutcome(Bs, bs, horizon, cells, cor, _monotonicity(cells, Bs, bs), A)
    out = _Output(cfg, write)
    out.put("summary_matrix.csv", outcome.matrix_csv())
    out.put("cells.csv", _rows_to_csv(cells))
    out.put("sweep.json", _dumps(outcome.to_dict()))
    out.close()
    return outcome


def _monotonicity(cells, Bs, bs) -> list:
    """Cells where blow-up at some parameter value is lost at a smaller one."""
    lookup = {(c["i_b"], c["j_B"]): c["verdict"] == evolution.BLOWUP for c in cells}
    found = []
    b_order = sorted(range(len(bs)), key=lambda i: -bs[i])
    B_order = sorted(range(len(Bs)), key=lambda j: -Bs[j])
    for j in range(len(Bs)):
        seen = False
        for i in b_order:
            if seen and not lookup[(i, j)]:
                found.append({"along": "b", "B": Bs[j], "b": bs[i]})
            seen |= lookup[(i, j)]
    for i in range(len(bs)):
        seen = False
        for j in B_order:
            if seen and not lookup[(i, j)]:
                found.append({"along": "B", "B": Bs[j], "b": bs[i]})
            seen |= lookup[(i, j)]
    return found


# ---------------------------------------------------------------- linear decay


def cmd_decay(cfg: ExperimentConfig, write: bool = True) -> list:
    """Fit the decay exponent of ``||T(t)u0||_{L^r}`` on ``[t_min, t_max]``."""
    datum = build_datum(cfg.datum)
    kernel = _kernel(cfg["B"], cfg["b"])
    grid = linear.decay_grid(kernel, cfg["t_max"], cfg["dx"])
    u0 = idata.sample(datum, grid, cfg["tail_tol"])
    ts = np.geomspace(cfg["t_min"], cfg["t_max"], cfg["n_times"])
    fits = [linear.measure_decay(u0, kernel, r, ts, cfg["tail_tol"]) for r in cfg["r_list"]]
    out = _Output(cfg, write)
    out.put("decay.csv", linear.decay_fits_to_csv(fits))
    out.close({"grid": {"half_width": grid.half_width, "n_points": grid.n_points}})
    return fits


# ---------------------------------------------------------------- Burgers comparison


def cmd_burgers_compare(cfg: ExperimentConfig, write: bool = True) -> list:
    """Sup-norm distance to the Burgers solution against the comparison bound."""
    datum = build_datum(cfg.datum)
    kernel = _kernel(cfg["B"], cfg["b"])
    sol = burgers.BurgersSolution(datum)
    Ts = sorted(cfg["T_list"])
    sc = sim_config(cfg, datum, t_end=max(Ts))
    res = evolution.run(sc, idata.sample(datum, sc.grid, sc.tail_tol), snapshot_every=1)
    rows = []
    for T in Ts:
        c = burgers.compare_bound(res.snapshots, sol, kernel, T)
        rows.append({"B": kernel.B, "b": kernel.b, **c.to_dict()})
    out = _Output(cfg, write)
    out.put("compare.csv", _rows_to_csv(rows))
    out.put("compare.json", _dumps({"config_hash": cfg.hash, "verdict": res.verdict.to_dict(), "rows": rows}))
    out.close()
    return rows


# ---------------------------------------------------------------- lifespan convergence


def cmd_lifespan_convergence(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Observed ``T0`` and analytic brackets along a sequence ``(B, b) -> 0``."""
    datum = build_datum(cfg.datum)
    if datum.inf_deriv >= 0:
        raise ValueError("lifespan convergence needs inf u0' < 0")
    T_b = bounds.burgers_lifespan(datum)
    bs = cfg["b_list"]
    Bs = cfg["B_list"] or (cfg["B"],) * len(bs)
    if len(Bs) != len(bs):
        raise ValueError("B_list and b_list must have equal length")
    points = bounds.candidate_points(datum)
    rows = []
    for B, b in zip(Bs, bs):
        kernel = _kernel(B, b)
        res = _simulate(cfg, datum, B=B, b=b)
        t0 = res.verdict.t0_estimate if res.verdict.kind == evolution.BLOWUP else math.nan
        lower = bounds.lifespan_lower(datum, kernel).T_lower
        per_alpha = {}
        for a in cfg["alphas"]:
            c = bounds.search_nonlocal_slope(datum, kernel, (a,), points)
            per_alpha[a] = c.time_bound if c.holds else math.inf
        upper = min(per_alpha.values())
        width = res.verdict.t0_bracket[1] - res.verdict.t0_bracket[0] if res.verdict.t0_bracket else 0.0
        rows.append(
            {
                "B": B,
                "b": b,
                "verdict": res.verdict.kind,
                "t0": t0,
                "T_lower": lower,
                "T_upper": upper,
                "bracket_width": upper - lower,
                "rel_error": abs(t0 - T_b) / T_b,
                "alpha_ok": all(u >= t0 - width for u in per_alpha.values()),
                **{f"T_upper_alpha_{a:g}": u for a, u in per_alpha.items()},
            }
        )
    errs = [r["rel_error"] for r in rows]
    widths = [r["bracket_width"] for r in rows]
    summary = {
        "burgers_lifespan": T_b,
        "monotone_approach": all(e2 < e1 for e1, e2 in zip(errs, errs[1:])),
        "final_within_2pct": errs[-1] <= 0.02,
        "brackets_tighten": all(w2 <= w1 for w1, w2 in zip(widths, widths[1:])),
        "alpha_consistent": all(r["alpha_ok"] for r in rows),
    }
    out = _Output(cfg, write)
    out.put("lifespan.csv", _rows_to_csv(rows))
    out.put("lifespan.json", _dumps({"rows": rows, "summary": summary}))
    out.close()
    return {"rows": rows, "summary": summary}


# ---------------------------------------------------------------- global probe


def small_datum(base: idata.InitialDatum, eps: float, grid: Grid) -> Field:
    """Multiple of ``base`` with ``||u0||_{H^4} + ||u0||_{W^{3,1}} = eps``."""
    f = idata.sample(base, grid)
    size = spectral.hs_norm(f, 4) + spectral.ws1_norm(f, 3)
    return Field(grid, f.values * (eps / size))


def cmd_global_probe(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Small data for ``p >= 5``: no blow-up and ``max_t ||u||_{H^4} <= 4 eps``."""
    p = cfg["p"]
    if p < 5:
        raise ValueError("the small-data probe needs p >= 5")
    base = build_datum(cfg.datum)
    kernel = _kernel(cfg["B"], cfg["b"])
    horizon = cfg["horizon"]
    # the free wave disperses over the whole horizon; size the box for it
    grid = linear.decay_grid(kernel, horizon, cfg["dx"])
    rows = []
    for eps in sorted(cfg["eps_list"], reverse=True):
        u0 = small_datum(base, eps, grid)
        sc = evolution.SimConfig(kernel, grid, p=p, t_end=horizon, cfl=cfg["cfl"], hs_order=4.0, tail_tol=cfg["tail_tol"], n_tracked=0)
        res = evolution.run(sc, u0, tracked_x0=())
        hmax = float(res.series.array("hs").max())
        rows.append(
            {
                "p": p,
                "eps": eps,
                "verdict": res.verdict.kind,
                "max_H4": hmax,
                "ratio": hmax / eps,
                "H4_initial": spectral.hs_norm(u0, 4),
            }
        )
    smallest = min(rows, key=lambda r: r["eps"])
    summary = {
        "p_star_n3": p_star(3),
        "smallest_eps": smallest["eps"],
        "holds": smallest["verdict"] == evolution.REACHED_HORIZON and smallest["ratio"] <= 4.0,
    }
    if cfg["contrast"]:
        steep = idata.scaled(idata.odd_gaussian(1.0), 8)
        c = ExperimentConfig("run", {"kind": "odd_gaussian", "lam": 1.0, "scale": 8}, {"p": 2, "B": cfg["B"], "b": cfg["b"]})
        res = _simulate(c, steep)
        summary["contrast_p2_verdict"] = res.verdict.kind
        summary["contrast_p2_t0"] = res.verdict.t0_estimate
    out = _Output(cfg, write)
    out.put("global_probe.csv", _rows_to_csv(rows))
    out.put("global_probe.json", _dumps({"rows": rows, "summary": summary}))
    out.close()
    return {"rows": rows, "summary": summary}


def p_star(n: int) -> int:
    """``floor((n + sqrt(n^2 + 4n))/2 + 2)``."""
    return int(math.floor((n + math.sqrt(n * n + 4 * n)) / 2 + 2))


# ---------------------------------------------------------------- continuity probe


def kernel_l1_difference(b1: float, b2: float) -> float:
    """``||exp(-b1|x|) - exp(-b2|x|)||_{L^1} = 2|b1 - b2| / (b1 b2)``."""
    return 2 * abs(b1 - b2) / (b1 * b2)


def cmd_continuity_probe(cfg: ExperimentConfig, write: bool = True) -> dict:
    """Deviation of solutions and lifespans under ``(B, b) -> (B + delta, b + delta)``."""
    datum = build_datum(cfg.datum)
    B, b = cfg["B"], cfg["b"]
    probe_t = cfg["probe_time"]
    times = sorted(set(np.linspace(0.0, cfg["probe_horizon"], 11).tolist()) | {probe_t})
    deltas = sorted(set(cfg["delta_list"]) | {0.0}, reverse=True)
    # one grid for every run so that fields can be subtracted: the largest box needed
    grids = [sim_config(cfg, datum, B=B + d, b=b + d).grid for d in deltas]
    grid = max(grids, key=lambda g: g.n_points)
    u0 = idata.sample(datum, grid, cfg["tail_tol"])

    def go(Bv, bv):
        sc = sim_config(cfg, datum, B=Bv, b=bv, grid=grid)
        return evolution.run(sc, u0, snapshot_times=times)

    base = go(B, b)
    base_snaps = dict(base.snapshots)
    rows = []
    for delta in deltas:
        res = go(B + delta, b + delta)
        snaps = dict(res.snapshots)
        common = [t for t in times if t in snaps and t in base_snaps]
        devs = {t: spectral.l2_norm(snaps[t] - base_snaps[t]) for t in common}
        t0a, t0b = base.verdict.t0_estimate, res.verdict.t0_estimate
        rows.append(
            {
                "delta": delta,
                "verdict": res.verdict.kind,
                "sup_l2_deviation": max(devs.values()) if devs else math.nan,
                "deviation_at_probe": devs.get(probe_t, math.nan),
                "t0": t0b,
                "t0_change": abs(t0b - t0a) if t0a is not None and t0b is not None else math.nan,
                "kernel_l1_difference": kernel_l1_difference(b + delta, b),
            }
        )
    pos = [r for r in rows if r["delta"] > 0]
    ratios = [a["deviation_at_probe"] / c["deviation_at_probe"] for a, c in zip(pos, pos[1:])]
    summary = {
        "baseline_verdict": base.verdict.kind,
        "baseline_t0": base.verdict.t0_estimate,
        "zero_delta_identical": rows[-1]["sup_l2_deviation"] == 0.0,
        "deviation_decreases": all(c["sup_l2_deviation"] < a["sup_l2_deviation"] for a, c in zip(pos, pos[1:])),
        "t0_change_decreases": all(
            not (c["t0_change"] > a["t0_change"]) for a, c in zip(pos, pos[1:])
        ),
        "halving_ratios": ratios,
        "blowup_persists": base.verdict.kind != evolution.BLOWUP or all(r["verdict"] == evolution.BLOWUP for r in rows),
    }
    out = _Output(cfg, write)
    out.put("continuity.csv", _rows_to_csv(rows))
    out.put("continuity.json", _dumps({"rows": rows, "summary": summary}))
    out.close()
    return {"rows": rows, "summary": summary}


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "decay": cmd_decay,
    "rate": cmd_rate,
    "burgers-compare": cmd_burgers_compare,
    "lifespan-convergence": cmd_lifespan_convergence,
    "global-probe": cmd_global_probe,
    "continuity-probe": cmd_continuity_probe,
}
