"""Parametric-study harness: sweep one ansatz/optimizer axis and report.

A sweep varies exactly one of {optimizer, pattern, depth} while the other
two stay fixed, over a range of register sizes.  Per (case, N) the pipeline
prefix (model -> matrices -> standard form -> Pauli terms -> reference
eigenvalue) is computed once, serially; the VQE rows themselves are
independent jobs that may run on a thread pool.  Results are written in
planned order regardless of completion order, so the CSV is byte-identical
across re-runs and across worker counts.

Wall-clock fields are informational only: the CSV leaves wall_ms empty and
the JSON mirror carries the measured values, keeping the CSV deterministic.

A row-complete JSONL journal makes long sweeps crash-resumable: each
finished row is appended as one line, and a re-run with the same config
skips rows already present.  The journal header pins a hash of the config
so a stale journal cannot silently mix two different sweeps.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyList, FemVqeError, NonpositiveReference, StaleJournal
from .fem.cases import generate_case
from .fem.assembly import assemble
from .hamiltonian import (
    PauliHamiltonian,
    classical_min_eig,
    gershgorin_upper,
    pauli_decompose,
    reduce_to_standard,
    rescale_spectral,
)
from .matrixio import BoundarySet, parse_matrix_market, partition_free
from .quantum.ansatz import build_ansatz
from .vqe.runner import VqeConfig, run_vqe

OPTIMIZER_MENU = ("SPSA", "COBYLA", "LBFGSB")
PATTERN_MENU = ("CX", "CZ", "CRX")
DEPTH_MENU = tuple(range(1, 11))

_AXIS_MENUS = {
    "optimizer": OPTIMIZER_MENU,
    "pattern": PATTERN_MENU,
    "depth": DEPTH_MENU,
}

CASES = ("truss_hex", "beam", "plate_hole", "external")

CSV_COLUMNS = (
    "case", "N", "optimizer", "pattern", "depth", "shots", "seed",
    "lambda_c", "lambda_q", "error_ratio", "error_pct",
    "evaluations", "converged", "stop_reason", "wall_ms",
)


def percentage_error(lambda_q: float, lambda_c: float) -> float:
    """|lambda_q - lambda_c| / lambda_c, in percent.

    The reference must be strictly positive; a structural eigenvalue of
    zero or below means the model lost positive definiteness somewhere
    upstream and a relative error would only hide that.
    """
    if lambda_c <= 0.0:
        raise NonpositiveReference(
            f"reference eigenvalue {lambda_c!r} is not positive"
        )
    return abs(lambda_q - lambda_c) / lambda_c * 100.0


def aggregate_stats(errors) -> tuple:
    """(mean, sample standard deviation) of a list of error percentages.

    The deviation uses the n-1 divisor and is None for a single point.
    """
    values = [float(e) for e in errors]
    if not values:
        raise EmptyList("no error values to aggregate")
    me = statistics.fmean(values)
    sde = statistics.stdev(values) if len(values) >= 2 else None
    return me, sde


# --- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """One parametric study: a single varying axis over a qubit range.

    `optimizer`, `pattern` and `depth` hold the two fixed settings; the
    slot named by `axis` must be left None and takes its values from
    `axis_values` (default: the full menu for that axis).
    """

    case: str
    qubit_range: tuple = ()
    axis: str = "depth"
    axis_values: tuple = ()
    optimizer: str | None = None
    pattern: str | None = None
    depth: int | None = None
    vqe: VqeConfig = field(default_factory=VqeConfig)
    trials: int = 1
    reduction: str = "auto"
    k_path: str | None = None
    m_path: str | None = None
    journal_path: str | None = None

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.axis not in _AXIS_MENUS:
            raise ValueError(f"axis must be one of {tuple(_AXIS_MENUS)}, got {self.axis!r}")
        if not self.axis_values:
            object.__setattr__(self, "axis_values", _AXIS_MENUS[self.axis])
        object.__setattr__(self, "axis_values", tuple(self.axis_values))
        object.__setattr__(self, "qubit_range", tuple(int(n) for n in self.qubit_range))
        if getattr(self, self.axis) is not None:
            raise ValueError(f"axis {self.axis!r} varies; its fixed slot must be None")
        for name in ("optimizer", "pattern", "depth"):
            if name != self.axis and getattr(self, name) is None:
                raise ValueError(f"fixed setting {name!r} is required when axis={self.axis!r}")
        if self.case == "external":
            if not (self.k_path and self.m_path):
                raise ValueError("external case needs k_path and m_path")
        elif not self.qubit_range:
            raise ValueError("qubit_range must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def to_dict(self, include_paths: bool = True) -> dict:
        d = dataclasses.asdict(self)
        d["qubit_range"] = list(self.qubit_range)
        d["axis_values"] = list(self.axis_values)
        if not include_paths:
            d.pop("journal_path", None)
        return d

    def sha256(self) -> str:
        """Hash of the scientific content (journal location excluded)."""
        blob = json.dumps(self.to_dict(include_paths=False), sort_keys=True,
                          separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        vqe = d.pop("vqe", {})
        if not isinstance(vqe, VqeConfig):
            vqe = VqeConfig(**vqe)
        d.pop("journal_path_ignored", None)
        return cls(vqe=vqe, **d)

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        return cls.from_dict(json.loads(text))


# --- rows and reports -------------------------------------------------------


@dataclass
class SweepRow:
    case: str
    n_qubits: int
    optimizer: str
    pattern: str
    depth: int
    shots: object
    seed: int
    lambda_c: float | None = None
    lambda_q: float | None = None
    error_ratio: float | None = None
    error_pct: float | None = None
    evaluations: int = 0
    converged: bool = False
    stop_reason: str = "failed"
    wall_ms: float | None = None
    ham_sha256: str | None = None
    unit_scale: float | None = None
    error: str | None = None


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list
    aggregates: dict


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _row_csv_line(row: SweepRow) -> str:
    record = {
        "case": row.case, "N": row.n_qubits, "optimizer": row.optimizer,
        "pattern": row.pattern, "depth": row.depth, "shots": row.shots,
        "seed": row.seed, "lambda_c": row.lambda_c, "lambda_q": row.lambda_q,
        "error_ratio": row.error_ratio, "error_pct": row.error_pct,
        "evaluations": row.evaluations, "converged": row.converged,
        "stop_reason": row.stop_reason, "wall_ms": None,  # informational only
    }
    return ",".join(_fmt(record[c]) for c in CSV_COLUMNS)


def emit_report(report: SweepReport, csv_path=None, json_path=None) -> None:
    """Write the CSV (deterministic) and/or JSON mirror (with wall times)."""
    if csv_path is not None:
        lines = [",".join(CSV_COLUMNS)]
        lines += [_row_csv_line(r) for r in report.rows]
        Path(csv_path).write_text("\n".join(lines) + "\n")
    if json_path is not None:
        payload = {
            "config": report.config.to_dict(),
            "config_sha256": report.config.sha256(),
            "rows": [dataclasses.asdict(r) for r in report.rows],
            "aggregates": report.aggregates,
        }
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n")


def parse_report_csv(path) -> list:
    """Read a report CSV back into SweepRow records.

    Only CSV-resident fields are recovered; wall_ms, the Hamiltonian hash
    and error details live in the JSON mirror.
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError("unrecognized report header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"bad field count in row: {ln!r}")
        rec = dict(zip(CSV_COLUMNS, parts))
        rows.append(SweepRow(
            case=rec["case"],
            n_qubits=int(rec["N"]),
            optimizer=rec["optimizer"],
            pattern=rec["pattern"],
            depth=int(rec["depth"]),
            shots=rec["shots"] if rec["shots"] == "exact" else int(rec["shots"]),
            seed=int(rec["seed"]),
            lambda_c=float(rec["lambda_c"]) if rec["lambda_c"] else None,
            lambda_q=float(rec["lambda_q"]) if rec["lambda_q"] else None,
            error_ratio=float(rec["error_ratio"]) if rec["error_ratio"] else None,
            error_pct=float(rec["error_pct"]) if rec["error_pct"] else None,
            evaluations=int(rec["evaluations"]),
            converged=rec["converged"] == "true",
            stop_reason=rec["stop_reason"],
        ))
    return rows


# --- sweep execution --------------------------------------------------------


@dataclass(frozen=True)
class _Prepared:
    n_qubits: int
    lambda_c: float
    pauli: PauliHamiltonian
    ham_sha256: str
    unit_scale: float


def hamiltonian_sha256(matrix) -> str:
    """Canonical content hash: shape header plus C-order float64 bytes."""
    m = np.ascontiguousarray(matrix, dtype=float)
    digest = hashlib.sha256()
    digest.update(repr(m.shape).encode())
    digest.update(m.tobytes())
    return digest.hexdigest()


def _pad_pencil(kf, mf):
    """Grow an external (K, M) pair to the next power-of-two dimension.

    The stiffness gets a diagonal shift block and the mass an identity
    block, appending spurious eigenvalues at `shift`; any shift above the
    largest generalized eigenvalue leaves the smallest one untouched.
    """
    dim = kf.shape[0]
    target = 2 ** max(1, math.ceil(math.log2(dim)))
    if dim == target:
        return kf, mf
    m_min = float(np.linalg.eigvalsh(mf).min())
    if m_min <= 0.0:
        return kf, mf  # not a valid mass matrix; let the reduction report it
    bound = gershgorin_upper(kf) / m_min
    shift = bound + max(1.0, abs(bound))
    kp = np.zeros((target, target))
    kp[:dim, :dim] = kf
    kp[range(dim, target), range(dim, target)] = shift
    mp = np.eye(target)
    mp[:dim, :dim] = mf
    return kp, mp


def prepare_case(cfg: SweepConfig, n: int | None) -> _Prepared:
    """Run the classical pipeline prefix once for a (case, N) point."""
    if cfg.case == "external":
        k = parse_matrix_market(Path(cfg.k_path).read_text())
        m = parse_matrix_market(Path(cfg.m_path).read_text())
        nothing = BoundarySet(fixed=())
        kf, _ = partition_free(k, nothing)
        mf, _ = partition_free(m, nothing)
        kf, mf = _pad_pencil(kf, mf)
        sh = reduce_to_standard(kf, mf, cfg.reduction)
    else:
        model = generate_case(cfg.case, n)
        k, m = assemble(model)
        kf, _ = partition_free(k, model.bc)
        mf, _ = partition_free(m, model.bc)
        sh = reduce_to_standard(kf, mf, cfg.reduction)
    sh = rescale_spectral(sh)
    lam_c, _ = classical_min_eig(sh.matrix)
    return _Prepared(
        n_qubits=sh.n_qubits,
        lambda_c=float(lam_c),
        pauli=pauli_decompose(sh.matrix),
        ham_sha256=hamiltonian_sha256(sh.matrix),
        unit_scale=float(sh.unit_scale),
    )


@dataclass(frozen=True)
class _Plan:
    index: int
    n_requested: int
    optimizer: str
    pattern: str
    depth: int
    seed: int
    trial: int


def _trial_seed(base: int, trial: int) -> int:
    # trial 0 keeps the template seed so one-trial sweeps match plain runs
    if trial == 0:
        return int(base)
    return int(np.random.SeedSequence((int(base), trial)).generate_state(1, np.uint32)[0])


def _plan_rows(cfg: SweepConfig) -> list:
    plans = []
    points = cfg.qubit_range if cfg.case != "external" else (0,)
    index = 0
    for n in points:
        for value in cfg.axis_values:
            fixed = {"optimizer": cfg.optimizer, "pattern": cfg.pattern, "depth": cfg.depth}
            fixed[cfg.axis] = value
            for trial in range(cfg.trials):
                plans.append(_Plan(
                    index=index,
                    n_requested=int(n),
                    optimizer=str(fixed["optimizer"]),
                    pattern=str(fixed["pattern"]),
                    depth=int(fixed["depth"]),
                    seed=_trial_seed(cfg.vqe.seed, trial),
                    trial=trial,
                ))
                index += 1
    return plans


def _run_row(cfg: SweepConfig, plan: _Plan, prep) -> SweepRow:
    row = SweepRow(
        case=cfg.case, n_qubits=plan.n_requested,
        optimizer=plan.optimizer, pattern=plan.pattern, depth=plan.depth,
        shots=cfg.vqe.shots, seed=plan.seed,
    )
    if isinstance(prep, str):  # the pipeline prefix failed for this point
        row.error = prep
        return row
    row.n_qubits = prep.n_qubits
    row.lambda_c = prep.lambda_c
    row.ham_sha256 = prep.ham_sha256
    row.unit_scale = prep.unit_scale
    started = time.perf_counter()
    try:
        ansatz = build_ansatz(prep.n_qubits, plan.depth, plan.pattern)
        vqe_cfg = dataclasses.replace(cfg.vqe, optimizer=plan.optimizer, seed=plan.seed)
        result = run_vqe(prep.pauli, ansatz, vqe_cfg)
    except FemVqeError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        row.wall_ms = (time.perf_counter() - started) * 1e3
        return row
    row.wall_ms = (time.perf_counter() - started) * 1e3
    row.lambda_q = float(result.lambda_q)
    row.error_ratio = abs(row.lambda_q - row.lambda_c) / row.lambda_c
    row.error_pct = percentage_error(row.lambda_q, row.lambda_c)
    row.evaluations = int(result.evaluations)
    row.converged = bool(result.converged)
    row.stop_reason = result.stop_reason
    return row


def _load_journal(path: Path, config_sha: str) -> dict:
    done = {}
    if not path.exists():
        return done
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        return done
    header = json.loads(lines[0])
    if header.get("config_sha256") != config_sha:
        raise StaleJournal(
            f"journal {path} was written for a different sweep config"
        )
    for ln in lines[1:]:
        entry = json.loads(ln)
        done[int(entry["index"])] = SweepRow(**entry["row"])
    return done


def _aggregate(cfg: SweepConfig, rows) -> dict:
    out = {}
    for value in cfg.axis_values:
        errs = [
            r.error_pct for r in rows
            if r.error is None and r.error_pct is not None
            and getattr(r, cfg.axis) == value
        ]
        if not errs:
            continue
        me, sde = aggregate_stats(errs)
        out[str(value)] = {"me": me, "sde": sde, "n_points": len(errs)}
    return out


def run_sweep(cfg: SweepConfig, max_workers: int = 1) -> SweepReport:
    """Execute a sweep: classical prefixes serially, VQE rows on a pool.

    Per-row failures are recorded in the row's error field and never abort
    the sweep.  With a journal path set, completed rows are appended as
    they finish and a matching re-run resumes after the last complete row.
    """
    plans = _plan_rows(cfg)
    config_sha = cfg.sha256()

    journal = None
    done: dict[int, SweepRow] = {}
    if cfg.journal_path:
        jpath = Path(cfg.journal_path)
        done = _load_journal(jpath, config_sha)
        fresh = not jpath.exists() or not jpath.read_text().strip()
        journal = jpath.open("a")
        if fresh:
            journal.write(json.dumps({"config_sha256": config_sha}) + "\n")
            journal.flush()

    preps: dict[int, object] = {}
    for plan in plans:
        if plan.index in done or plan.n_requested in preps:
            continue
        try:
            preps[plan.n_requested] = prepare_case(cfg, plan.n_requested or None)
        except FemVqeError as exc:
            preps[plan.n_requested] = f"{type(exc).__name__}: {exc}"

    def finish(plan: _Plan, row: SweepRow):
        done[plan.index] = row
        if journal is not None:
            payload = {"index": plan.index, "row": dataclasses.asdict(row)}
            journal.write(json.dumps(payload) + "\n")
            journal.flush()

    pending = [p for p in plans if p.index not in done]
    try:
        if max_workers <= 1:
            for plan in pending:
                finish(plan, _run_row(cfg, plan, preps[plan.n_requested]))
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = {
                    pool.submit(_run_row, cfg, plan, preps[plan.n_requested]): plan
                    for plan in pending
                }
                for future in as_completed(futures):
                    finish(futures[future], future.result())
    finally:
        if journal is not None:
            journal.close()

    rows = [done[p.index] for p in plans]
    return SweepReport(config=cfg, rows=rows, aggregates=_aggregate(cfg, rows))
