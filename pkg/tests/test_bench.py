"""Sweep harness tests: error metric, aggregation, determinism, resume."""
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import femvqe.bench as bench
from femvqe.bench import (
    CSV_COLUMNS,
    SweepConfig,
    SweepReport,
    SweepRow,
    aggregate_stats,
    emit_report,
    parse_report_csv,
    percentage_error,
    prepare_case,
    run_sweep,
)
from femvqe.errors import EmptyList, NonpositiveReference, StaleJournal
from femvqe.hamiltonian import classical_min_eig
from femvqe.vqe.runner import VqeConfig


class TestPercentageError:
    def test_equal_values_give_zero(self):
        assert percentage_error(0.5, 0.5) == 0.0

    # reference pairings with printed three-decimal targets
    @pytest.mark.parametrize("lam_q, lam_c, expected", [
        (0.0688, 0.0572, 20.28),
        (0.0606, 0.0604, 0.331),
        (0.0343, 0.0343, 0.000),
    ])
    def test_reference_pairings(self, lam_q, lam_c, expected):
        assert percentage_error(lam_q, lam_c) == pytest.approx(expected, abs=5e-3)

    def test_overshoot_and_undershoot_symmetric(self):
        assert percentage_error(1.2, 1.0) == pytest.approx(percentage_error(0.8, 1.0))

    @pytest.mark.parametrize("bad", [0.0, -1e-9, -3.5])
    def test_nonpositive_reference_rejected(self, bad):
        with pytest.raises(NonpositiveReference):
            percentage_error(0.1, bad)


class TestAggregateStats:
    def test_single_point_has_no_deviation(self):
        assert aggregate_stats([5.0]) == (5.0, None)

    def test_two_point_formula(self):
        me, sde = aggregate_stats([1.0, 3.0])
        assert me == pytest.approx(2.0)
        assert sde == pytest.approx(math.sqrt(2.0))

    def test_empty_rejected(self):
        with pytest.raises(EmptyList):
            aggregate_stats([])

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=1e3), min_size=2, max_size=40))
    def test_matches_two_pass_oracle(self, values):
        me, sde = aggregate_stats(values)
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        assert me == pytest.approx(mean, rel=1e-12, abs=1e-12)
        assert sde == pytest.approx(math.sqrt(var), rel=1e-12, abs=1e-12)


def quick_vqe(**kw):
    base = dict(tol=1e-4, maxiter=3000, shots="exact", seed=5, n_restarts=2)
    base.update(kw)
    return VqeConfig(**base)


class TestSweepConfig:
    def test_axis_slot_must_stay_open(self):
        with pytest.raises(ValueError, match="must be None"):
            SweepConfig(case="beam", qubit_range=(3,), axis="depth",
                        optimizer="LBFGSB", pattern="CZ", depth=1)

    def test_fixed_pair_required(self):
        with pytest.raises(ValueError, match="pattern"):
            SweepConfig(case="beam", qubit_range=(3,), axis="depth", optimizer="LBFGSB")

    def test_unknown_case_rejected(self):
        with pytest.raises(ValueError, match="unknown case"):
            SweepConfig(case="bridge", qubit_range=(3,), axis="depth",
                        optimizer="LBFGSB", pattern="CZ")

    def test_axis_values_default_to_menu(self):
        cfg = SweepConfig(case="beam", qubit_range=(3,), axis="optimizer",
                          pattern="CZ", depth=1)
        assert cfg.axis_values == ("SPSA", "COBYLA", "LBFGSB")
        cfg = SweepConfig(case="beam", qubit_range=(3,), axis="depth",
                          optimizer="LBFGSB", pattern="CZ")
        assert cfg.axis_values == tuple(range(1, 11))

    def test_external_needs_paths(self):
        with pytest.raises(ValueError, match="k_path"):
            SweepConfig(case="external", axis="depth", optimizer="LBFGSB", pattern="CZ")

    def test_json_round_trip(self):
        cfg = SweepConfig(case="beam", qubit_range=(3, 5), axis="pattern",
                          axis_values=("CX", "CZ"), optimizer="LBFGSB", depth=2,
                          vqe=quick_vqe(seed=9), trials=2)
        again = SweepConfig.from_json(json.dumps(cfg.to_dict()))
        assert again == cfg

    def test_sha_ignores_journal_location(self, tmp_path):
        kw = dict(case="beam", qubit_range=(3,), axis="depth",
                  optimizer="LBFGSB", pattern="CZ")
        a = SweepConfig(**kw)
        b = SweepConfig(journal_path=str(tmp_path / "j.jsonl"), **kw)
        assert a.sha256() == b.sha256()


def smallest_cfg(**kw):
    base = dict(case="beam", qubit_range=(3,), axis="depth", axis_values=(1,),
                optimizer="LBFGSB", pattern="CZ", vqe=quick_vqe())
    base.update(kw)
    return SweepConfig(**base)


class TestRunSweep:
    def test_smallest_sweep(self):
        rep = run_sweep(smallest_cfg())
        assert len(rep.rows) == 1
        row = rep.rows[0]
        assert row.error is None
        assert row.error_pct >= 0.0
        # stored metric fields are exactly the recomputed ones
        assert row.error_pct == percentage_error(row.lambda_q, row.lambda_c)
        assert row.error_ratio * 100.0 == row.error_pct
        assert row.evaluations > 0
        assert "1" in rep.aggregates

    def test_unreachable_point_recorded_not_raised(self):
        rep = run_sweep(smallest_cfg(qubit_range=(4,)))  # no beam mesh hits 16 DOFs
        row = rep.rows[0]
        assert row.error is not None and "TargetUnreachable" in row.error
        assert row.lambda_q is None and row.lambda_c is None
        assert row.stop_reason == "failed"
        assert rep.aggregates == {}

    def test_mixed_sweep_keeps_going_past_failures(self):
        rep = run_sweep(smallest_cfg(qubit_range=(4, 3)))
        assert [r.error is not None for r in rep.rows] == [True, False]

    def test_trials_derive_distinct_seeds(self):
        rep = run_sweep(smallest_cfg(trials=2))
        assert len(rep.rows) == 2
        assert rep.rows[0].seed == 5  # trial 0 keeps the template seed
        assert rep.rows[1].seed != rep.rows[0].seed
        again = run_sweep(smallest_cfg(trials=2))
        assert [r.seed for r in again.rows] == [r.seed for r in rep.rows]

    def test_csv_identical_across_runs_and_workers(self, tmp_path):
        cfg = smallest_cfg(axis="pattern", axis_values=("CX", "CZ"), depth=1,
                           pattern=None)
        blobs = []
        for tag, workers in (("a", 1), ("b", 3), ("c", 1)):
            path = tmp_path / f"{tag}.csv"
            emit_report(run_sweep(cfg, max_workers=workers), csv_path=path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]

    def test_lambda_c_matches_archived_hamiltonian(self):
        cfg = smallest_cfg()
        rep = run_sweep(cfg)
        row = rep.rows[0]
        prep = prepare_case(cfg, 3)  # independent pipeline re-run
        assert prep.ham_sha256 == row.ham_sha256
        assert row.lambda_c == pytest.approx(prep.lambda_c, rel=1e-12, abs=1e-15)

    def test_aggregates_are_me_sde_over_axis(self):
        cfg = smallest_cfg(axis="pattern", axis_values=("CX", "CZ"), depth=1,
                           pattern=None, trials=2)
        rep = run_sweep(cfg)
        for value in ("CX", "CZ"):
            errs = [r.error_pct for r in rep.rows if r.pattern == value]
            me, sde = aggregate_stats(errs)
            assert rep.aggregates[value]["me"] == pytest.approx(me)
            assert rep.aggregates[value]["n_points"] == 2
            if sde is None:
                assert rep.aggregates[value]["sde"] is None
            else:
                assert rep.aggregates[value]["sde"] == pytest.approx(sde)


class TestJournal:
    def test_resume_skips_completed_rows(self, tmp_path, monkeypatch):
        jpath = tmp_path / "sweep.jsonl"
        cfg = smallest_cfg(axis="pattern", axis_values=("CX", "CZ"), depth=1,
                           pattern=None, journal_path=str(jpath))
        full = run_sweep(cfg)
        lines = jpath.read_text().splitlines()
        assert len(lines) == 3  # header + one line per row

        # keep header + first row: simulate a crash after row 0
        jpath.write_text("\n".join(lines[:2]) + "\n")
        calls = []
        real = bench.run_vqe

        def counting(*args, **kw):
            calls.append(1)
            return real(*args, **kw)

        monkeypatch.setattr(bench, "run_vqe", counting)
        resumed = run_sweep(cfg)
        assert len(calls) == 1  # only the missing row was recomputed
        assert [r.lambda_q for r in resumed.rows] == [r.lambda_q for r in full.rows]

    def test_complete_journal_means_no_work(self, tmp_path, monkeypatch):
        jpath = tmp_path / "sweep.jsonl"
        cfg = smallest_cfg(journal_path=str(jpath))
        full = run_sweep(cfg)

        def explode(*args, **kw):  # resume must not re-enter the optimizer
            raise AssertionError("row recomputed despite complete journal")

        monkeypatch.setattr(bench, "run_vqe", explode)
        resumed = run_sweep(cfg)
        assert [r.lambda_q for r in resumed.rows] == [r.lambda_q for r in full.rows]

    def test_mismatched_journal_rejected(self, tmp_path):
        jpath = tmp_path / "sweep.jsonl"
        run_sweep(smallest_cfg(journal_path=str(jpath)))
        other = smallest_cfg(vqe=quick_vqe(seed=6), journal_path=str(jpath))
        with pytest.raises(StaleJournal):
            run_sweep(other)


def tiny_rows():
    return [SweepRow(
        case="beam", n_qubits=3, optimizer="LBFGSB", pattern="CZ", depth=1,
        shots="exact", seed=5, lambda_c=0.00718927132445, lambda_q=0.0431706901227,
        error_ratio=5.00487701387, error_pct=500.487701387,
        evaluations=600, converged=True, stop_reason="tolerance_met",
        wall_ms=123.4, ham_sha256="ab" * 32, unit_scale=2.0e9,
    )]


class TestEmitAndParse:
    def test_empty_report_is_header_only(self, tmp_path):
        cfg = smallest_cfg()
        path = tmp_path / "r.csv"
        emit_report(SweepReport(config=cfg, rows=[], aggregates={}), csv_path=path)
        assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_single_row_is_two_lines(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(SweepReport(config=smallest_cfg(), rows=tiny_rows(),
                                aggregates={}), csv_path=path)
        assert len(path.read_text().splitlines()) == 2

    def test_wall_ms_left_blank_in_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(SweepReport(config=smallest_cfg(), rows=tiny_rows(),
                                aggregates={}), csv_path=path)
        assert path.read_text().splitlines()[1].endswith(",")

    def test_round_trip(self, tmp_path):
        path = tmp_path / "r.csv"
        report = SweepReport(config=smallest_cfg(), rows=tiny_rows(), aggregates={})
        emit_report(report, csv_path=path)
        parsed = parse_report_csv(path)
        assert len(parsed) == 1
        src, back = report.rows[0], parsed[0]
        for name in ("case", "n_qubits", "optimizer", "pattern", "depth", "shots",
                     "seed", "evaluations", "converged", "stop_reason"):
            assert getattr(back, name) == getattr(src, name)
        for name in ("lambda_c", "lambda_q", "error_ratio", "error_pct"):
            assert getattr(back, name) == pytest.approx(getattr(src, name), rel=1e-11)
        # a second emit of the parsed rows reproduces the bytes
        path2 = tmp_path / "r2.csv"
        emit_report(SweepReport(config=smallest_cfg(), rows=parsed,
                                aggregates={}), csv_path=path2)
        assert path2.read_bytes() == path.read_bytes()

    def test_error_pct_recomputable_from_stored_columns(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(run_sweep(smallest_cfg()), csv_path=path)
        row = parse_report_csv(path)[0]
        recomputed = percentage_error(row.lambda_q, row.lambda_c)
        assert row.error_pct == pytest.approx(recomputed, rel=1e-12, abs=1e-12)

    def test_unrecognized_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("who,what\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            parse_report_csv(path)

    def test_json_mirror_carries_config_and_walls(self, tmp_path):
        cfg = smallest_cfg()
        rep = run_sweep(cfg)
        jpath = tmp_path / "r.json"
        emit_report(rep, json_path=jpath)
        payload = json.loads(jpath.read_text())
        assert payload["config"]["case"] == "beam"
        assert payload["config_sha256"] == cfg.sha256()
        assert payload["rows"][0]["wall_ms"] > 0
        assert payload["rows"][0]["ham_sha256"] == rep.rows[0].ham_sha256
        assert payload["aggregates"] == rep.aggregates


MM_SYM = """%%MatrixMarket matrix coordinate real symmetric
{n} {n} {nnz}
{body}"""


def write_mm(path, diag):
    n = len(diag)
    body = "\n".join(f"{i+1} {i+1} {v}" for i, v in enumerate(diag))
    path.write_text(MM_SYM.format(n=n, nnz=n, body=body) + "\n")


class TestExternalMatrices:
    def test_external_pair_runs_end_to_end(self, tmp_path):
        kp, mp = tmp_path / "k.mtx", tmp_path / "m.mtx"
        write_mm(kp, [4.0, 6.0])   # K = diag(4, 6)
        write_mm(mp, [2.0, 2.0])   # M = 2I, eigenvalues 2 and 3
        cfg = SweepConfig(case="external", axis="depth", axis_values=(1,),
                          optimizer="LBFGSB", pattern="CZ",
                          k_path=str(kp), m_path=str(mp),
                          vqe=quick_vqe(n_restarts=3))
        rep = run_sweep(cfg)
        row = rep.rows[0]
        assert row.error is None
        assert row.n_qubits == 1
        # rescaled reference: lambda_min / lambda_max of diag(2, 3)
        assert row.lambda_c == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert row.lambda_c * row.unit_scale == pytest.approx(2.0, rel=1e-12)
        assert row.error_pct < 1e-6

    def test_external_odd_dimension_padded(self, tmp_path):
        kp, mp = tmp_path / "k.mtx", tmp_path / "m.mtx"
        write_mm(kp, [4.0, 6.0, 10.0])
        write_mm(mp, [2.0, 2.0, 2.0])
        cfg = SweepConfig(case="external", axis="depth", axis_values=(1,),
                          optimizer="LBFGSB", pattern="CZ",
                          k_path=str(kp), m_path=str(mp),
                          vqe=quick_vqe(n_restarts=3))
        rep = run_sweep(cfg)
        row = rep.rows[0]
        assert row.error is None
        assert row.n_qubits == 2  # padded from dim 3 to 4
        # the padding eigenvalue dominates the rescale, but the physical
        # minimum of the original pencil survives it
        assert row.lambda_c * row.unit_scale == pytest.approx(2.0, rel=1e-12)
        assert row.error_pct < 1e-6
