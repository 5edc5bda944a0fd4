"""Command-line experiment runner.

Every run is described by one JSON config (or a named preset); the subcommand
picks the mode. Reports are JSON, series payloads can also go to CSV.

Exit codes: 0 ok, 2 bad config or arguments, 3 precondition / domain /
divergence failure, 4 oracle capacity exceeded, 5 CSV requested for a
payload without a series.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import __version__
from . import certify as C
from . import dynamics as D
from .errors import CapacityError, DivergenceError, DomainError, PreconditionError
from .groups import GroupSpace, Weight, aperiodicity_window, box, validate_weight
from .orlicz import SimpleFunction, dual_ball_oracle, luxemburg_norm, modular, orlicz_norm, weighted_norm
from .young import YoungFunction, conjugate

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_CAPACITY = 4
EXIT_NO_SERIES = 5

MODES = ("norm", "conjugate", "validate-weight", "certify-transitive", "certify-mixing",
         "certify-chaotic", "orbit", "periodic", "blowup-probe")


class ConfigError(ValueError):
    """A config field is missing or malformed; ``where`` names the field."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


class NoSeriesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    group: dict = field(default_factory=lambda: {"group": "integer_line"})
    weight: dict = field(default_factory=lambda: {"weight": "constant", "c": 1.0})
    young: dict = field(default_factory=lambda: {"family": "power", "p": 2.0})
    a: Optional[list] = None
    K: object = None
    f: Optional[dict] = None
    g: Optional[dict] = None
    E: Optional[list] = None
    y: Optional[list] = None
    schedule: dict = field(default_factory=lambda: {"rule": "linear", "start": 1, "step": 1, "k_max": 30})
    L_max: int = 8
    N: int = 30
    strategy: dict = field(default_factory=lambda: {"kind": "full"})
    tol: float = 1e-9
    eps: float = 0.01
    seed: int = 0
    workers: int = 1
    oracle: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(extra[0], "unknown field")
        if "mode" not in d:
            raise ConfigError("mode", "missing")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"expected one of {', '.join(MODES)}")
        for name in ("tol", "eps"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(name, "must be a positive number")
        for name in ("L_max", "N", "seed", "workers"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                raise ConfigError(name, "must be a nonnegative integer")
        if not isinstance(self.oracle, bool):
            raise ConfigError("oracle", "must be true or false")
        self.carrier()
        self.phi()
        self.w()
        if self.mode.startswith("certify") or self.mode == "blowup-probe":
            self.n_schedule()

    # -- module objects ---------------------------------------------------------

    def carrier(self) -> GroupSpace:
        return _parse("group", GroupSpace.from_dict, self.group)

    def phi(self) -> YoungFunction:
        return _parse("young", YoungFunction.from_dict, self.young)

    def w(self) -> Weight:
        return _parse("weight", Weight.from_dict, self.weight)

    def element(self) -> tuple:
        if self.a is None:
            raise ConfigError("a", "missing")
        G = self.carrier()
        return _parse("a", lambda v: G.point(*v), self.a)

    def compact(self) -> np.ndarray:
        G = self.carrier()
        K = self.K
        if K is None:
            raise ConfigError("K", "missing")
        if isinstance(K, dict):
            if "box" in K:
                return _parse("K.box", lambda r: box(G, int(r)), K["box"])
            if "range" in K:
                return _parse("K.range", lambda r: G.as_array([G.point(i) for i in range(int(r[0]), int(r[1]) + 1)]),
                              K["range"])
            raise ConfigError("K", "expected a point list, {'box': r} or {'range': [lo, hi]}")
        return _parse("K", G.as_array, K)

    def function(self, name: str) -> SimpleFunction:
        spec = getattr(self, name)
        G = self.carrier()
        if spec is None:
            raise ConfigError(name, "missing")
        if not isinstance(spec, dict):
            raise ConfigError(name, "must be an object")
        if "random" in spec:
            r = spec["random"]
            rng = np.random.default_rng(self.seed)
            n = int(r.get("n", 5))
            radius = int(r.get("radius", 10))
            pts = rng.integers(-radius, radius + 1, size=(n, G.dim))
            amps = rng.uniform(-float(r.get("amp", 5.0)), float(r.get("amp", 5.0)), n)
            return SimpleFunction(G, pts, amps)
        return _parse(name, lambda s: SimpleFunction.from_dict(G, s), spec)

    def n_schedule(self) -> list:
        s = self.schedule
        if not isinstance(s, dict):
            raise ConfigError("schedule", "must be an object")
        rule = s.get("rule", "linear")
        k_max = int(s.get("k_max", 30))
        if k_max < 1:
            raise ConfigError("schedule.k_max", "must be >= 1")
        if rule == "linear":
            start, step = int(s.get("start", 1)), int(s.get("step", 1))
            sched = [start + step * (k - 1) for k in range(1, k_max + 1)]
        elif rule == "multiple":
            m = int(s.get("m", 1))
            sched = [m * k for k in range(1, k_max + 1)]
        elif rule == "explicit":
            sched = [int(n) for n in s.get("values", [])]
        else:
            raise ConfigError("schedule.rule", "expected linear, multiple or explicit")
        if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ConfigError("schedule", "must be positive and strictly increasing")
        return sched

    def strat(self) -> C.Strategy:
        return _parse("strategy", C.Strategy.from_dict, self.strategy)


def _parse(where, fn, value):
    try:
        return fn(value)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as e:
        raise ConfigError(where, str(e) or type(e).__name__) from None


# ---------------------------------------------------------------------------
# presets

INTEGER_K = {"range": [-3, 3]}


def _integer_preset(weight):
    return ExperimentConfig(mode="certify-transitive", group={"group": "integer_line"}, weight=weight,
                            young={"family": "power", "p": 2.0}, a=[1], K=INTEGER_K,
                            schedule={"rule": "linear", "start": 1, "step": 1, "k_max": 30})


def _heisenberg_preset():
    G = GroupSpace.from_dict({"group": "heisenberg_z"})
    M = aperiodicity_window(G, (1, 0, 3), box(G, 2)).M
    return ExperimentConfig(mode="certify-chaotic", group={"group": "heisenberg_z"},
                            weight={"weight": "exp_abs", "c": -1.0}, young={"family": "power", "p": 2.0},
                            a=[1, 0, 3], K={"box": 2}, L_max=8,
                            schedule={"rule": "multiple", "m": max(2, M + 1), "k_max": 6})


PRESETS = {
    "reals-a5": lambda: ExperimentConfig(
        mode="certify-transitive", group={"group": "lattice_line", "h": 0.25},
        weight={"weight": "exp_abs", "c": -1.0}, young={"family": "power", "p": 2.0},
        a=[20], K={"range": [-12, 12]}, schedule={"rule": "linear", "start": 1, "step": 1, "k_max": 12}),
    "heisenberg-a103": _heisenberg_preset,
    "integer-positive": lambda: _integer_preset({"weight": "exp_abs", "c": -1.0}),
    "integer-unweighted": lambda: _integer_preset({"weight": "constant", "c": 1.0}),
    "integer-obstructed": lambda: _integer_preset({"weight": "exp_abs", "c": 1.0}),
}


# ---------------------------------------------------------------------------
# runner

@dataclass
class RunReport:
    config: ExperimentConfig
    payload: dict
    series: Optional[list] = None
    columns: Optional[list] = None
    wall_time: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        d = {"artifact": "orlicz-dynamics", "version": __version__, "config": self.config.to_dict(),
             "mode": self.config.mode, "payload": self.payload}
        if timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(_jsonable(self.to_dict(timing)), indent=2, sort_keys=True) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


CERT_COLUMNS = ["k", "n_k", "E_size", "q0", "q_plus", "q_minus"]
SERIES_COLUMNS = ["series_plus", "tail_plus", "series_minus", "tail_minus"]


def _certificate_report(cfg, cert):
    cols = CERT_COLUMNS + (SERIES_COLUMNS if cert.mode == C.CHAOTIC else [])
    rows = [[s.to_dict().get(c) for c in cols] for s in cert.steps]
    return cert.to_dict(), rows, cols


def run(cfg: ExperimentConfig) -> RunReport:
    t0 = time.perf_counter()
    G, phi, w = cfg.carrier(), cfg.phi(), cfg.w()
    series = cols = None
    mode = cfg.mode
    if mode == "norm":
        f = cfg.function("f")
        payload = {"luxemburg": luxemburg_norm(f, phi).to_dict(), "orlicz": orlicz_norm(f, phi).to_dict(),
                   "weighted": weighted_norm(f, w, phi).to_dict(), "modular": modular(f, phi)}
        if cfg.oracle:
            payload["dual_oracle"] = dual_ball_oracle(f, phi, seed=cfg.seed)
    elif mode == "conjugate":
        ys = cfg.y if cfg.y is not None else [1.0]
        payload = {"y": list(map(float, ys)), "psi": [conjugate(phi, float(y)) for y in ys]}
    elif mode == "validate-weight":
        gens = [cfg.element()] if cfg.a is not None else []
        rep = validate_weight(G, w, generators=gens)
        payload = {"verdict": rep.verdict, "counterexample": rep.counterexample,
                   "pairs_checked": rep.pairs_checked,
                   "bound_constants": {",".join(map(str, k)): v for k, v in rep.bound_constants.items()}}
    elif mode.startswith("certify-"):
        a, K, strat = cfg.element(), cfg.compact(), cfg.strat()
        if mode == "certify-transitive":
            cert = C.transitivity_certificate(G, K, a, w, phi, cfg.n_schedule(), strat, cfg.tol, cfg.workers)
        elif mode == "certify-mixing":
            cert = C.mixing_certificate(G, K, a, w, phi, cfg.N, strat, cfg.tol, cfg.workers)
        else:
            cert = C.chaos_certificate(G, K, a, w, phi, cfg.n_schedule(), strat, cfg.L_max, cfg.tol, cfg.workers)
        payload, series, cols = _certificate_report(cfg, cert)
    elif mode == "orbit":
        tr = D.orbit(cfg.function("f"), cfg.element(), cfg.N, w, phi, cfg.workers)
        payload = tr.to_dict()
        series, cols = [list(r) for r in tr.rows()], ["n", "norm", "distinct_count"]
    elif mode == "periodic":
        f = cfg.function("f")
        E = cfg.E if cfg.E is not None else f.support
        n_k = cfg.n_schedule()[0] if cfg.schedule else 1
        cand = D.periodic_point(f, E, cfg.element(), n_k, cfg.L_max, w, phi)
        payload = cand.to_dict()
    else:  # blowup-probe
        res = C.blowup_collapse_probe(cfg.function("f"), cfg.function("g"), cfg.eps, cfg.element(),
                                      w, phi, cfg.n_schedule(), cfg.strat())
        payload = res.to_dict()
    return RunReport(cfg, payload, series, cols, time.perf_counter() - t0)


def emit_csv(report: RunReport, path) -> None:
    if report.series is None:
        raise NoSeriesError(f"mode {report.config.mode!r} has no series payload")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(report.columns)
    for row in report.series:
        wr.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
    atomic_write(path, buf.getvalue())


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argparse

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write the step/orbit series as CSV")
    common.add_argument("--workers", type=int, help="threads for step evaluation")
    common.add_argument("--seed", type=int, help="seed for random functions and oracle restarts")
    common.add_argument("--tol", type=float, help="certification tolerance")

    p = argparse.ArgumentParser(prog="orlicz-dynamics", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("norm", "conjugate", "validate-weight", "orbit", "periodic", "probe-blowup"):
        sub.add_parser(name, parents=[common])
    cp = sub.add_parser("certify", parents=[common])
    cp.add_argument("kind", choices=["transitive", "mixing", "chaotic"])
    pp = sub.add_parser("preset", parents=[common])
    pp.add_argument("name", choices=sorted(PRESETS))
    return p


def _mode_for(args) -> str:
    if args.command == "certify":
        return f"certify-{args.kind}"
    if args.command == "probe-blowup":
        return "blowup-probe"
    return args.command


def load_config(args) -> ExperimentConfig:
    if args.command == "preset":
        cfg = PRESETS[args.name]()
        if args.config:
            raise ConfigError("--config", "presets do not take a config file")
    else:
        if not args.config:
            raise ConfigError("--config", "required")
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{args.config}:{e.lineno}:{e.colno}", e.msg) from None
        except OSError as e:
            raise ConfigError(args.config, e.strerror or str(e)) from None
        if isinstance(raw, dict):
            raw = dict(raw, mode=_mode_for(args))
        cfg = ExperimentConfig.from_dict(raw)
    over = {k: getattr(args, k) for k in ("workers", "seed", "tol") if getattr(args, k) is not None}
    if over:
        cfg = replace(cfg, **over)
        cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        report = run(cfg)
        text = report.to_json()
        if args.csv:
            emit_csv(report, args.csv)
        if args.out:
            atomic_write(args.out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, DomainError, DivergenceError) as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CapacityError as e:
        print(f"capacity exceeded: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except NoSeriesError as e:
        print(f"no series: {e}", file=sys.stderr)
        return EXIT_NO_SERIES


if __name__ == "__main__":
    sys.exit(main())
