"""Command-line entry points for the pipeline stages.

Each stage is addressable on its own so the chain can be inspected or
re-entered at any point: generate matrices, decompose them into Pauli
terms, minimize, or sweep a whole study axis.  All deliberate failures
derive from FemVqeError and surface as clean one-line errors.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import click

from .bench import SweepConfig, emit_report, run_sweep
from .errors import FemVqeError
from .fem.assembly import assemble
from .fem.cases import generate_case
from .hamiltonian import (
    PauliHamiltonian,
    pauli_decompose,
    reduce_to_standard,
    rescale_spectral,
)
from .matrixio import (
    BoundarySet,
    DofLabel,
    parse_abaqus_mtx,
    parse_matrix_market,
    partition_free,
    write_matrix,
)
from .quantum.ansatz import build_ansatz
from .quantum.backend import backend_name
from .vqe.runner import VqeConfig, result_to_json, run_vqe

_PATTERNS = {"cx": "CX", "cz": "CZ", "crx": "CRX"}
_OPTIMIZERS = {"spsa": "SPSA", "cobyla": "COBYLA", "lbfgsb": "LBFGSB"}


def _fail(exc: FemVqeError):
    raise click.ClickException(f"{type(exc).__name__}: {exc}")


def _read_matrix(path: str):
    text = Path(path).read_text()
    if text.lstrip().startswith("%%MatrixMarket"):
        return parse_matrix_market(text)
    return parse_abaqus_mtx(text)


@click.group()
@click.version_option(package_name="femvqe")
def main():
    """FEM eigenvalue pipeline on a statevector VQE."""


# --- fem ---------------------------------------------------------------------


@main.group()
def fem():
    """Finite-element model generation."""


@fem.command("generate")
@click.option("--case", required=True,
              type=click.Choice(["truss_hex", "beam", "plate_hole"]))
@click.option("--qubits", required=True, type=int, help="Target N with 2^N free DOFs.")
@click.option("--out-k", required=True, type=click.Path(dir_okay=False))
@click.option("--out-m", required=True, type=click.Path(dir_okay=False))
@click.option("--out-model", required=True, type=click.Path(dir_okay=False))
def fem_generate(case, qubits, out_k, out_m, out_model):
    """Build a benchmark case and write K, M and a model descriptor."""
    try:
        model = generate_case(case, qubits)
        k, m = assemble(model)
    except FemVqeError as exc:
        _fail(exc)
    Path(out_k).write_text(write_matrix(k))
    Path(out_m).write_text(write_matrix(m))
    descriptor = {
        "case": case,
        "n_qubits": qubits,
        "unit_system": "SI",
        "mass_formulation": model.mass_formulation,
        "n_all_dof": model.n_all_dof,
        "n_fixed_dof": model.n_fixed_dof,
        "n_free_dof": model.n_free_dof,
        "material": dataclasses.asdict(model.material),
        "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in model.mesh.nodes],
        "elements": [
            {"id": e.id, "kind": e.kind, "node_ids": list(e.node_ids),
             "section": dict(e.section)}
            for e in model.mesh.elements
        ],
        "bc": {"fixed": [[d.node_id, d.dof_index] for d in model.bc.fixed]},
    }
    Path(out_model).write_text(json.dumps(descriptor, indent=2) + "\n")
    click.echo(f"{case}: {model.n_free_dof} free DOFs "
               f"({model.n_all_dof} total, {model.n_fixed_dof} fixed)")


# --- decompose ---------------------------------------------------------------


@main.command("decompose")
@click.option("--k", "k_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--m", "m_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bc", "bc_path", type=click.Path(exists=True, dir_okay=False),
              help="Model descriptor JSON; omit if the matrices are already free-only.")
@click.option("--reduction", default="auto",
              type=click.Choice(["auto", "diagonal_mass", "cholesky"]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def decompose(k_path, m_path, bc_path, reduction, out_path):
    """Reduce (K, M) to standard form and write its Pauli expansion."""
    k = _read_matrix(k_path)
    m = _read_matrix(m_path)
    fixed = ()
    if bc_path:
        descriptor = json.loads(Path(bc_path).read_text())
        fixed = tuple(DofLabel(int(n), int(d))
                      for n, d in descriptor.get("bc", {}).get("fixed", []))
    bc = BoundarySet(fixed=fixed)
    try:
        kf, _ = partition_free(k, bc)
        mf, _ = partition_free(m, bc)
        sh = rescale_spectral(reduce_to_standard(kf, mf, reduction))
        ph = pauli_decompose(sh.matrix)
    except FemVqeError as exc:
        _fail(exc)
    Path(out_path).write_text(ph.to_json(indent=2) + "\n")
    click.echo(f"{ph.n_qubits} qubits, {len(ph)} Pauli terms "
               f"({sh.reduction} reduction, unit scale {sh.unit_scale:.6g})")


# --- vqe ---------------------------------------------------------------------


@main.group()
def vqe():
    """Variational minimization."""


@vqe.command("run")
@click.option("--ham", "ham_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--depth", default=1, type=int, show_default=True)
@click.option("--pattern", default="cz", type=click.Choice(sorted(_PATTERNS)),
              show_default=True)
@click.option("--optimizer", default="lbfgsb", type=click.Choice(sorted(_OPTIMIZERS)),
              show_default=True)
@click.option("--shots", default="exact", show_default=True,
              help="'exact' or a positive sample count.")
@click.option("--tol", default=1e-4, type=float, show_default=True)
@click.option("--maxiter", default=100_000, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--restarts", default=1, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def vqe_run(ham_path, depth, pattern, optimizer, shots, tol, maxiter, seed,
            restarts, out_path):
    """Minimize a serialized Hamiltonian and write the result record."""
    ph = PauliHamiltonian.from_json(Path(ham_path).read_text())
    shots_value = shots if shots == "exact" else int(shots)
    cfg = VqeConfig(tol=tol, maxiter=maxiter, shots=shots_value, seed=seed,
                    optimizer=_OPTIMIZERS[optimizer], n_restarts=restarts)
    try:
        ansatz = build_ansatz(ph.n_qubits, depth, _PATTERNS[pattern])
        result = run_vqe(ph, ansatz, cfg)
    except FemVqeError as exc:
        _fail(exc)
    record = json.loads(result_to_json(result, cfg))
    record["config"].update(depth=depth, pattern=_PATTERNS[pattern], ham=str(ham_path))
    Path(out_path).write_text(json.dumps(record, indent=2) + "\n")
    click.echo(f"lambda_q = {result.lambda_q:.12g} "
               f"({result.stop_reason}, {result.evaluations} evaluations)")


# --- sweep -------------------------------------------------------------------


@main.command("sweep")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "csv_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-json", "json_path", type=click.Path(dir_okay=False))
@click.option("--workers", default=1, type=int, show_default=True)
@click.option("--journal", "journal_path", type=click.Path(dir_okay=False),
              help="Row-complete journal enabling crash resume.")
def sweep(config_path, csv_path, json_path, workers, journal_path):
    """Run a parametric study from a JSON config."""
    try:
        cfg = SweepConfig.from_json(Path(config_path).read_text())
        if journal_path:
            cfg = dataclasses.replace(cfg, journal_path=journal_path)
        report = run_sweep(cfg, max_workers=workers)
    except FemVqeError as exc:
        _fail(exc)
    emit_report(report, csv_path=csv_path, json_path=json_path)
    failures = sum(1 for r in report.rows if r.error is not None)
    click.echo(f"{len(report.rows)} rows ({failures} failed) -> {csv_path}")
    for value, stats in report.aggregates.items():
        sde = "n/a" if stats["sde"] is None else f"{stats['sde']:.6g}"
        click.echo(f"  {cfg.axis}={value}: ME {stats['me']:.6g}%  SDE {sde}  "
                   f"(n={stats['n_points']})")


# --- kernels -----------------------------------------------------------------


@main.group()
def kernels():
    """Compiled-kernel diagnostics."""


@kernels.command("info")
def kernels_info():
    """Report which statevector kernel implementation is active."""
    try:
        from .quantum import _kernels  # noqa: F401
        compiled = "available"
    except ImportError:
        compiled = "unavailable"
    click.echo(f"active backend: {backend_name()}")
    click.echo(f"compiled extension: {compiled}")
    click.echo("set FEMVQE_PURE_PYTHON=1 to force the numpy fallback")


if __name__ == "__main__":
    main()
