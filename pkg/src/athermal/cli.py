"""Command-line frontend: JSON jobs in, CSV or JSON reports out.

Exit codes: 0 success, 1 verify-suite failure, 2 invalid job, 3 solver breakdown.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .channels import (
    Channel,
    _complex,
    _hamiltonian,
    channel_from_descriptor,
    channel_to_descriptor,
    descriptor_errors,
    random_channel,
)
from .errors import AthermalError, ConvergenceError, SolverError
from .quantum import thermal_context
from .statediv import DivergenceKind

COMMANDS = ("free-energy", "divergence", "distill", "cost", "work", "entropy", "energy", "verify", "random")
KINDS = ("umegaki", "renyi", "max", "hypothesis", "smoothed_max")
FORMATS = ("json", "csv")
COLUMNS = ("beta", "quantity", "value", "converged", "restarts_used", "runtime_ms")
BETA_OPTIONAL = ("entropy", "energy")
NEEDS_EPS = ("distill", "cost")
DEFAULT_SEED = 42
DEFAULT_SAMPLES = 3
SEED_MAX = 2**64

EXIT_OK, EXIT_VERIFY, EXIT_SCHEMA, EXIT_SOLVER = 0, 1, 2, 3


class JobError(AthermalError, ValueError):
    """A job document with one or more schema violations, each as ``"field: reason"``."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class JobSpec:
    command: str
    channel: Optional[dict]
    betas: list[float]
    hamiltonian: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    alpha: Optional[float] = None
    kind: Optional[str] = None
    smoothing: str = "diamond"
    optimizer: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    out_path: Optional[str] = None
    out_format: str = "json"
    psi: Optional[np.ndarray] = None
    interaction: Optional[np.ndarray] = None
    random: dict = field(default_factory=dict)
    samples: int = DEFAULT_SAMPLES

    def optimizer_config(self):
        from .chanthermo import OptimizerConfig

        return OptimizerConfig(**{"seed": self.seed, **self.optimizer})

    def divergence_kind(self) -> DivergenceKind:
        kind = self.kind or ("renyi" if self.alpha is not None else "umegaki")
        if kind == "renyi":
            return DivergenceKind.renyi(self.alpha)
        if kind == "max":
            return DivergenceKind.max()
        if kind == "hypothesis":
            return DivergenceKind.hypothesis(self.epsilon)
        if kind == "smoothed_max":
            return DivergenceKind.smoothed_max(self.epsilon)
        return DivergenceKind.umegaki()


@dataclass
class Row:
    beta: Optional[float]
    quantity: str
    value: float
    converged: bool = True
    restarts_used: int = 0
    runtime_ms: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


@dataclass
class Report:
    command: str
    seed: int
    rows: list[Row]
    extras: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if self.command == "verify" and not r.converged]


# ---------------------------------------------------------------- parsing


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(v, name, errs, lo=None, lo_open=False, hi=None, hi_open=False, allow_inf=False):
    if allow_inf and v in ("inf", "Infinity"):
        v = math.inf
    if not _is_num(v) or math.isnan(v) or (math.isinf(v) and not allow_inf):
        errs.append(f"{name}: expected a number, got {v!r}")
        return None
    lo_bad = lo is not None and (v <= lo if lo_open else v < lo)
    hi_bad = hi is not None and (v >= hi if hi_open else v > hi)
    if lo_bad or hi_bad:
        left = "(" if lo_open else "["
        right = ")" if hi_open or hi is None else "]"
        lo_s = "-inf" if lo is None else f"{lo:g}"
        hi_s = "inf" if hi is None else f"{hi:g}"
        errs.append(f"{name}: must lie in {left}{lo_s}, {hi_s}{right}, got {v!r}")
        return None
    return float(v)


def _matrix(obj, dim, name, errs, hermitian=False):
    try:
        m = _hamiltonian(obj, name)
    except (ValueError, TypeError) as exc:
        errs.append(f"{name}: {exc}" if not str(exc).startswith(name) else str(exc))
        return None
    if m.shape != (dim, dim):
        errs.append(f"{name}: expected a {dim}x{dim} matrix, got shape {m.shape}")
        return None
    if hermitian and not np.allclose(m, m.conj().T, atol=1e-10):
        errs.append(f"{name}: must be Hermitian")
        return None
    return m


def _sweep(obj, errs) -> list[float]:
    if not isinstance(obj, dict) or set(obj) - {"start", "stop", "steps"}:
        errs.append("beta_sweep: expected an object with keys start, stop, steps")
        return []
    start = _number(obj.get("start"), "beta_sweep.start", errs, lo=0, lo_open=True)
    stop = _number(obj.get("stop"), "beta_sweep.stop", errs, lo=0, lo_open=True)
    steps = obj.get("steps")
    if not _is_int(steps) or steps < 1:
        errs.append(f"beta_sweep.steps: expected a positive integer, got {steps!r}")
        return []
    if start is None or stop is None:
        return []
    if stop < start:
        errs.append("beta_sweep.stop: must not be below start")
        return []
    if steps == 1 and start != stop:
        errs.append("beta_sweep.steps: a single step needs start == stop")
        return []
    return [float(b) for b in np.linspace(start, stop, steps)]


def parse_sweep_flag(text: str) -> dict:
    """``"a:b:n"`` into a sweep object (validated later with the rest of the job)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start:stop:steps")
    try:
        return {"start": float(parts[0]), "stop": float(parts[1]), "steps": int(parts[2])}
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep {text!r}: {exc}") from None


def parse_job(doc) -> JobSpec:
    """Validate a job (JSON text or an already-decoded object).

    Every violated field is collected before raising :class:`JobError`.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise JobError([f"job: invalid JSON ({exc})"]) from None
    if not isinstance(doc, dict):
        raise JobError(["job: expected a JSON object"])
    errs: list[str] = []
    known = {
        "command", "channel", "hamiltonian", "beta", "beta_sweep", "epsilon", "alpha", "kind",
        "smoothing", "optimizer", "seed", "output", "psi", "interaction", "random", "samples",
    }
    for key in sorted(set(doc) - known):
        errs.append(f"{key}: unknown field")

    command = doc.get("command")
    if command not in COMMANDS:
        errs.append(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")

    # channel (the random command samples its own)
    channel = doc.get("channel")
    din = dout = None
    rnd: dict = {}
    if command == "random":
        rnd = doc.get("random", {})
        if not isinstance(rnd, dict):
            errs.append("random: expected an object")
            rnd = {}
        for key in ("din", "dout"):
            v = rnd.get(key, 2)
            if not _is_int(v) or v < 1:
                errs.append(f"random.{key}: expected a positive integer, got {v!r}")
        env = rnd.get("env_dim")
        if env is not None and (not _is_int(env) or env < 1):
            errs.append(f"random.env_dim: expected a positive integer, got {env!r}")
        rnd = {"din": rnd.get("din", 2), "dout": rnd.get("dout", 2), "env_dim": env}
        din, dout = rnd["din"], rnd["dout"]
    elif channel is None:
        errs.append("channel: required")
    else:
        probe = channel
        if isinstance(channel, dict) and channel.get("kind") == "thermal" and "beta" not in channel:
            probe = {**channel, "beta": 1.0}  # the job supplies the temperature
        cerrs = descriptor_errors(probe)
        errs.extend(cerrs)
        if not cerrs:
            din, dout = channel["din"], channel["dout"]

    # temperatures
    has_b, has_s = "beta" in doc, "beta_sweep" in doc
    betas: list[float] = []
    if has_b and has_s:
        errs.append("beta: give exactly one of beta and beta_sweep, not both")
    elif has_b:
        b = _number(doc["beta"], "beta", errs, lo=0, lo_open=True)
        betas = [] if b is None else [b]
    elif has_s:
        betas = _sweep(doc["beta_sweep"], errs)
    elif command in COMMANDS and command not in BETA_OPTIONAL:
        errs.append(f"beta: one of beta and beta_sweep is required for {command}")

    eps = alpha = None
    if doc.get("epsilon") is not None:
        eps = _number(doc["epsilon"], "epsilon", errs, lo=0, hi=1, hi_open=True)
    elif command in NEEDS_EPS:
        errs.append(f"epsilon: required for {command}")
    if doc.get("alpha") is not None:
        alpha = _number(doc["alpha"], "alpha", errs, lo=0.5, allow_inf=True)

    kind = doc.get("kind")
    if kind is not None:
        if kind not in KINDS:
            errs.append(f"kind: expected one of {', '.join(KINDS)}, got {kind!r}")
        elif kind == "renyi" and alpha is None and "alpha" not in doc:
            errs.append("alpha: required for kind renyi")
        elif kind in ("hypothesis", "smoothed_max") and eps is None and "epsilon" not in doc:
            errs.append(f"epsilon: required for kind {kind}")
    smoothing = doc.get("smoothing", "diamond")
    if smoothing not in ("diamond", "purified"):
        errs.append(f"smoothing: expected diamond or purified, got {smoothing!r}")

    ham = None
    if "hamiltonian" in doc:
        if dout is not None:
            ham = _matrix(doc["hamiltonian"], dout, "hamiltonian", errs, hermitian=True)
    elif isinstance(channel, dict) and channel.get("kind") == "thermal" and dout is not None:
        ham = _hamiltonian(channel["hamiltonian"], "channel.hamiltonian")
    elif dout is not None:
        ham = np.zeros((dout, dout), dtype=complex)

    inter = None
    if "interaction" in doc and din is not None:
        inter = _matrix(doc["interaction"], din * dout, "interaction", errs, hermitian=True)

    psi = None
    if "psi" in doc and din is not None:
        try:
            psi = _complex(doc["psi"], 1, "psi")
        except (ValueError, TypeError) as exc:
            errs.append(str(exc) if str(exc).startswith("psi") else f"psi: {exc}")
        else:
            if psi.shape != (din * din,):
                errs.append(f"psi: expected {din * din} amplitudes, got {psi.size}")
            elif not np.linalg.norm(psi) > 0:
                errs.append("psi: must be nonzero")

    opt = doc.get("optimizer", {})
    overrides: dict = {}
    if not isinstance(opt, dict):
        errs.append("optimizer: expected an object")
    else:
        from .chanthermo import OptimizerConfig

        fields = {f.name: f for f in dataclasses.fields(OptimizerConfig)}
        for key, v in opt.items():
            f = fields.get(key)
            if f is None or key == "seed":
                errs.append(f"optimizer.{key}: unknown setting")
            elif f.type in ("int", int):
                if not _is_int(v) or v < 1:
                    errs.append(f"optimizer.{key}: expected a positive integer, got {v!r}")
                else:
                    overrides[key] = v
            elif f.type in ("bool", bool):
                if not isinstance(v, bool):
                    errs.append(f"optimizer.{key}: expected true or false, got {v!r}")
                else:
                    overrides[key] = v
            else:
                x = _number(v, f"optimizer.{key}", errs, lo=0, lo_open=True)
                if x is not None:
                    overrides[key] = x
        if not errs:
            try:
                OptimizerConfig(**overrides)
            except AthermalError as exc:
                errs.append(f"optimizer: {exc}")

    seed = doc.get("seed", DEFAULT_SEED)
    if not _is_int(seed) or not 0 <= seed < SEED_MAX:
        errs.append(f"seed: expected an integer in [0, 2^64), got {seed!r}")

    samples = doc.get("samples", DEFAULT_SAMPLES)
    if not _is_int(samples) or samples < 1:
        errs.append(f"samples: expected a positive integer, got {samples!r}")

    out = doc.get("output", {})
    path, fmt = None, None
    if not isinstance(out, dict):
        errs.append("output: expected an object")
    else:
        path, fmt = out.get("path"), out.get("format")
        if path is not None and (not isinstance(path, str) or not path):
            errs.append("output.path: expected a nonempty string")
        if fmt is not None and fmt not in FORMATS:
            errs.append(f"output.format: expected json or csv, got {fmt!r}")
    if fmt is None:
        fmt = "csv" if isinstance(path, str) and path.endswith(".csv") else "json"

    if errs:
        raise JobError(errs)
    return JobSpec(
        command=command,
        channel=channel,
        betas=sorted(betas),
        hamiltonian=ham,
        epsilon=eps,
        alpha=alpha,
        kind=kind,
        smoothing=smoothing,
        optimizer=overrides,
        seed=seed,
        out_path=path,
        out_format=fmt,
        psi=psi,
        interaction=inter,
        random=rnd,
        samples=samples,
    )


# ---------------------------------------------------------------- running


def _opt_row(beta, quantity, res, scale=1.0, **extra) -> Row:
    diag = {
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "restart_values": [v * scale for v in res.restart_values],
        "argmax_state": res.argmax_state,
        **extra,
    }
    return Row(beta, quantity, res.value * scale, res.converged, res.restarts_used, diagnostics=diag)


def _channel(job: JobSpec, beta: Optional[float]) -> Channel:
    if job.command == "random":
        r = job.random
        return random_channel(r["din"], r["dout"], r["env_dim"], seed=job.seed)
    return channel_from_descriptor(job.channel, beta)


def _rows_at(job: JobSpec, beta: Optional[float]) -> list[Row]:
    from . import chanthermo as ct

    n = _channel(job, beta)
    ctx = thermal_context(job.hamiltonian, beta) if beta is not None else None
    cfg = job.optimizer_config()
    cmd = job.command

    if cmd in ("free-energy", "random"):
        rep = ct.free_energy(n, ctx, job.divergence_kind(), cfg, smoothing=job.smoothing)
        d = rep.diagnostics
        conv, used = bool(d.get("converged", True)), int(d.get("restarts_used", 0))
        diag = {k: v for k, v in d.items() if k not in ("converged", "restarts_used")}
        diag["kind"] = str(rep.kind)
        return [
            Row(beta, "resource", rep.resource, conv, used, diagnostics=diag),
            Row(beta, "thermal", rep.thermal, conv, used, diagnostics={"kind": str(rep.kind)}),
        ]
    if cmd == "divergence":
        kind = job.divergence_kind()
        rep = ct.free_energy(n, ctx, kind, cfg, smoothing=job.smoothing)
        d = rep.diagnostics
        return [
            Row(
                beta,
                "divergence",
                rep.divergence,
                bool(d.get("converged", True)),
                int(d.get("restarts_used", 0)),
                diagnostics={"kind": str(kind), "argmax_state": d.get("argmax_state")},
            )
        ]
    if cmd == "distill":
        rep = ct.one_shot_distill(n, ctx, job.epsilon, cfg, witness=False)
        d = rep.diagnostics
        diag = {
            "m": rep.witness["m"],
            "conversion_error": d["conversion_error"],
            "thermal_weight": d["thermal_weight"],
            "argmax_state": rep.witness["psi"],
        }
        return [Row(beta, "distill", rep.value_nats, bool(d["converged"]), int(d["restarts_used"]), diagnostics=diag)]
    if cmd == "cost":
        rep = ct.one_shot_cost(n, ctx, job.epsilon, job.smoothing)
        diag = {k: v for k, v in rep.diagnostics.items()}
        return [Row(beta, "cost", rep.value_nats, diagnostics=diag)]
    if cmd == "work":
        if job.psi is not None:
            w = ct.work_extraction(n, job.psi, ctx)
            return [Row(beta, q, getattr(w, q)) for q in ("decoupling", "quench", "reversible", "total")]
        return [_opt_row(beta, "max_work", ct.max_extractable_work(n, ctx, cfg))]
    if cmd == "entropy":
        rows = [_opt_row(beta, "entropy", ct.channel_entropy(n, cfg))]
        if ctx is not None:
            rows.append(_opt_row(beta, "thermal_entropy", ct.thermal_entropy(n, ctx, cfg)))
        return rows
    if cmd == "energy":
        return [Row(beta, "energy", ct.channel_energy(n, job.hamiltonian, h_int=job.interaction))]
    if cmd == "verify":
        from .chanthermo.verify import SUITE_CONFIG

        if "restarts" not in job.optimizer:
            cfg = cfg.with_(restarts=SUITE_CONFIG.restarts)
        rep = ct.verify_suite(n, ctx, cfg, job.seed, job.samples)
        return [Row(beta, c.name, c.margin, c.passed, diagnostics=dict(c.detail)) for c in rep.checks]
    raise JobError([f"command: unsupported {cmd!r}"])


def run(job: JobSpec, timing: bool = False) -> Report:
    """Evaluate the job at every temperature, rows in ascending ``beta``."""
    rows: list[Row] = []
    for beta in job.betas or [None]:
        t0 = time.perf_counter()
        got = _rows_at(job, beta)
        if timing:
            ms = (time.perf_counter() - t0) * 1e3
            for r in got:
                r.runtime_ms = ms
        rows.extend(got)
    rows.sort(key=lambda r: -math.inf if r.beta is None else r.beta)
    extras = {}
    if job.command == "random":
        extras["channel"] = channel_to_descriptor(_channel(job, None))
    return Report(job.command, job.seed, rows, extras)


# ---------------------------------------------------------------- emitting


def fmt_float(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _jsonable(v: Any):
    """Reduce to JSON types, with floats cut to 12 significant digits and complex arrays as ``[re, im]`` pairs."""
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        s = fmt_float(v)
        return s if s in ("nan", "inf", "-inf") else float(s)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return _jsonable(np.stack([v.real, v.imag], axis=-1).tolist())
        return _jsonable(v.tolist())
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def render(report: Report, fmt: str) -> str:
    if not report.rows:
        raise ValueError("empty report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in report.rows:
            w.writerow(
                [
                    "" if r.beta is None else fmt_float(r.beta),
                    r.quantity,
                    fmt_float(r.value),
                    "true" if r.converged else "false",
                    r.restarts_used,
                    "" if r.runtime_ms is None else fmt_float(r.runtime_ms),
                ]
            )
        return buf.getvalue()
    body = {
        "command": report.command,
        "seed": report.seed,
        "columns": list(COLUMNS),
        "rows": [
            {
                "beta": r.beta,
                "quantity": r.quantity,
                "value": r.value,
                "converged": r.converged,
                "restarts_used": r.restarts_used,
                "runtime_ms": r.runtime_ms,
                "diagnostics": r.diagnostics,
            }
            for r in report.rows
        ],
        **report.extras,
    }
    return json.dumps(_jsonable(body), indent=2) + "\n"


def resolve_path(path: str) -> str:
    base = os.environ.get("ATHERMAL_OUT")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def emit(report: Report, fmt: str, path: Optional[str] = None, stream=None) -> Optional[str]:
    """Write the report; files are written to a sibling temporary and renamed into place."""
    text = render(report, fmt)
    if path is None:
        (stream or sys.stdout).write(text)
        return None
    path = resolve_path(path)
    folder = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=folder, prefix=".athermal-", suffix=".part")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        if isinstance(exc, OSError):
            raise OSError(f"{path}: {exc.strerror or exc}") from exc
        raise
    return path


# ---------------------------------------------------------------- entry point


HELP_EPILOG = """commands:
  free-energy   resource and thermal free energy (kind from --alpha or the job's "kind")
  divergence    channel divergence from the thermal channel (beta times the free energy)
  distill       one-shot distillable golden units at error --eps (nats)
  cost          one-shot formation cost at error --eps (nats)
  work          work from partial thermalization (at the job's "psi", else maximized)
  entropy       channel entropy, plus thermal entropy when a temperature is given
  energy        channel energy for the job's Hamiltonian (optional "interaction")
  verify        property suite; exit code 1 if any check fails
  random        sample a random channel (job "random": {din, dout, env_dim}) and report its free energy

exit codes: 0 ok, 1 verify failure, 2 invalid job, 3 solver breakdown
environment: ATHERMAL_OUT sets the directory for relative output paths
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="athermal",
        description="Thermodynamic quantities of quantum channels from a JSON job.",
        epilog=HELP_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS, metavar="command", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("--job", required=True, help="path to the JSON job file ('-' reads stdin)")
    temp = p.add_mutually_exclusive_group()
    temp.add_argument("--beta", type=float, help="inverse temperature (default: from the job)")
    temp.add_argument(
        "--beta-sweep", type=parse_sweep_flag, metavar="A:B:N", help="N evenly spaced temperatures from A to B (default: from the job)"
    )
    p.add_argument("--eps", type=float, help="smoothing / error parameter in [0, 1) (default: from the job, else unset)")
    p.add_argument("--alpha", type=str, help="Renyi order >= 1/2, or 'inf' (default: from the job, else Umegaki)")
    p.add_argument("--seed", type=int, help=f"64-bit seed for restarts and sampling (default: {DEFAULT_SEED})")
    p.add_argument("--restarts", type=int, help="optimizer restarts (default: 32)")
    p.add_argument("--out", help="output file (default: the job's output.path, else stdout)")
    p.add_argument("--format", choices=FORMATS, help="report format (default: from the job or path suffix, else json)")
    p.add_argument("--timing", action="store_true", help="fill runtime_ms (off by default so reruns are byte-identical)")
    return p


def _merge_flags(doc: dict, args) -> dict:
    doc = dict(doc)
    doc["command"] = args.command
    if args.beta is not None:
        doc.pop("beta_sweep", None)
        doc["beta"] = args.beta
    if args.beta_sweep is not None:
        doc.pop("beta", None)
        doc["beta_sweep"] = args.beta_sweep
    if args.eps is not None:
        doc["epsilon"] = args.eps
    if args.alpha is not None:
        try:
            doc["alpha"] = float(args.alpha)
        except ValueError:
            doc["alpha"] = args.alpha
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.restarts is not None:
        opt = doc.get("optimizer")
        doc["optimizer"] = {**(opt if isinstance(opt, dict) else {}), "restarts": args.restarts}
    if args.out is not None or args.format is not None:
        out = doc.get("output")
        out = dict(out) if isinstance(out, dict) else {}
        if args.out is not None:
            out["path"] = args.out
            if args.format is None:
                out.pop("format", None)
        if args.format is not None:
            out["format"] = args.format
        doc["output"] = out
    return doc


def _fail(code: int, lines, stderr) -> int:
    for line in lines:
        print(f"athermal: {line}", file=stderr)
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.job == "-":
            text = sys.stdin.read()
        else:
            with open(args.job, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        return _fail(EXIT_SCHEMA, [f"{args.job}: {exc.strerror or exc}"], stderr)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return _fail(EXIT_SCHEMA, [f"job: invalid JSON ({exc})"], stderr)
    if not isinstance(doc, dict):
        return _fail(EXIT_SCHEMA, ["job: expected a JSON object"], stderr)
    try:
        job = parse_job(_merge_flags(doc, args))
    except JobError as exc:
        return _fail(EXIT_SCHEMA, exc.errors, stderr)
    try:
        report = run(job, timing=args.timing)
    except (SolverError, ConvergenceError) as exc:
        return _fail(EXIT_SOLVER, [f"solver breakdown: {exc}"], stderr)
    except AthermalError as exc:
        return _fail(EXIT_SCHEMA, [str(exc)], stderr)
    try:
        emit(report, job.out_format, job.out_path, stdout)
    except OSError as exc:
        return _fail(EXIT_SOLVER, [f"cannot write report: {exc}"], stderr)
    if report.failures:
        return _fail(EXIT_VERIFY, [f"check failed: {r.quantity} (margin {fmt_float(r.value)})" for r in report.failures], stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
