import pytest

from pargrid.bench import (
    amdahl_limit,
    amdahl_speedup,
    emit_plot,
    fit_parallel_fraction,
    read_report,
    speedup_table,
    time_kernel,
    write_report,
)
from pargrid.exceptions import AmdahlDomainError, BenchError, DigestMismatchError, MissingBaselineError
from pargrid.models.configs import BatchJob
from pargrid.models.records import SpeedupRow, TimingRecord

HEADER = "kernel,workers,mean_time_s,speedup,efficiency,amdahl_bound"


def record(workers, wall_time_s, trial=0, digest="abc", kernel_id="batch"):
    return TimingRecord(
        kernel_id=kernel_id, workers=workers, trial=trial, wall_time_s=wall_time_s, config_digest=digest
    )


def sample_rows():
    return speedup_table([record(1, 100.0), record(2, 50.0), record(4, 30.0)], declared_fraction=0.9)


class TestAmdahl:
    def test_limits_from_profiled_fractions(self):
        assert amdahl_limit(0.9) == 10
        assert amdahl_limit(0.99) == 100
        assert amdahl_limit(0.675) == pytest.approx(3.0769, abs=1e-4)

    @pytest.mark.parametrize("f", [1.0, 1.5, -0.1])
    def test_limit_domain(self, f):
        with pytest.raises(AmdahlDomainError):
            amdahl_limit(f)

    def test_speedup_edges(self):
        assert amdahl_speedup(1.0, 4) == 4
        assert amdahl_speedup(0.0, 64) == 1

    def test_speedup_approaches_limit(self):
        assert abs(amdahl_speedup(0.675, 10**6) - amdahl_limit(0.675)) < 1e-3

    @pytest.mark.parametrize("f, workers", [(1.1, 2), (-0.5, 2), (0.5, 0)])
    def test_speedup_domain(self, f, workers):
        with pytest.raises(AmdahlDomainError):
            amdahl_speedup(f, workers)

    def test_monotone_and_bounded(self):
        fractions = [i / 20 for i in range(20)]
        for f in fractions:
            previous = 0.0
            for workers in range(1, 65):
                value = amdahl_speedup(f, workers)
                assert value >= previous
                assert value <= amdahl_limit(f)
                previous = value
        for workers in (2, 8, 32):
            values = [amdahl_speedup(f, workers) for f in fractions]
            assert values == sorted(values)

    def test_fit_inverts_the_finite_law(self):
        for f in (0.5, 0.675, 0.9):
            assert fit_parallel_fraction(amdahl_speedup(f, 8), 8) == pytest.approx(f, rel=1e-12)

    def test_fit_needs_several_workers(self):
        with pytest.raises(AmdahlDomainError):
            fit_parallel_fraction(1.0, 1)


class TestSpeedupTable:
    def test_linear_speedup(self):
        rows = speedup_table([record(1, 100.0), record(4, 25.0)])

        assert [(r.workers, r.speedup, r.efficiency) for r in rows] == [(1, 1.0, 1.0), (4, 4.0, 1.0)]

    def test_speedups(self):
        rows = speedup_table([record(4, 30.0), record(1, 100.0), record(2, 50.0)])

        assert [r.workers for r in rows] == [1, 2, 4]
        assert [r.speedup for r in rows][:2] == [1.0, 2.0]
        assert rows[2].speedup == pytest.approx(10 / 3)

    def test_mean_of_trials(self):
        rows = speedup_table([record(1, 9.0, 0), record(1, 11.0, 1), record(2, 4.0, 0), record(2, 6.0, 1)])

        assert [r.mean_time_s for r in rows] == [10.0, 5.0]
        assert rows[1].speedup == 2.0

    def test_efficiency_of_measured_speedup(self):
        rows = speedup_table([record(1, 2.6), record(32, 1.0)])
        assert rows[1].efficiency == pytest.approx(0.08125)

    def test_bound_defaults_to_ideal(self):
        assert [r.amdahl_bound for r in speedup_table([record(1, 1.0), record(3, 0.5)])] == [1.0, 3.0]

    def test_declared_fraction_bound(self):
        rows = sample_rows()
        assert rows[2].amdahl_bound == pytest.approx(1 / (0.1 + 0.9 / 4))

    def test_efficiency_never_exceeds_speedup(self):
        for row in sample_rows():
            assert row.efficiency <= row.speedup

    def test_missing_baseline(self):
        with pytest.raises(MissingBaselineError):
            speedup_table([record(2, 1.0)])
        with pytest.raises(MissingBaselineError):
            speedup_table([])

    def test_mixed_configs(self):
        with pytest.raises(DigestMismatchError):
            speedup_table([record(1, 1.0, digest="a"), record(2, 1.0, digest="b")])


class TestReport:
    def test_header_only_for_no_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_report([], path)

        assert path.read_bytes() == (HEADER + "\n").encode()

    def test_layout(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report(list(reversed(sample_rows())), path)
        lines = path.read_text().split("\n")

        assert len(path.read_text().splitlines()) == 4
        assert lines[0] == HEADER
        assert lines[1] == "batch,1,100,1,1,1"
        assert lines[3].startswith("batch,4,30,3.33333333,0.833333333,")
        assert "\r" not in path.read_text()

    def test_round_trip_at_nine_digits(self, tmp_path):
        path = tmp_path / "report.csv"
        rows = sample_rows()
        write_report(rows, path)
        parsed = read_report(path)

        assert [r.workers for r in parsed] == [r.workers for r in rows]
        for original, copy in zip(rows, parsed):
            assert copy.kernel_id == original.kernel_id
            for field in ("mean_time_s", "speedup", "efficiency", "amdahl_bound"):
                assert getattr(copy, field) == float(f"{getattr(original, field):.9g}")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(BenchError):
            write_report(sample_rows(), tmp_path / "missing" / "report.csv")

    def test_foreign_header(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(BenchError):
            read_report(path)


class TestPlot:
    def test_deterministic(self, tmp_path):
        first, second = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_plot(sample_rows(), 0.9, first)
        emit_plot(sample_rows(), 0.9, second)

        assert first.read_bytes() == second.read_bytes()

    def test_single_point(self, tmp_path):
        path = tmp_path / "one.svg"
        emit_plot([SpeedupRow(kernel_id="sar", workers=1, mean_time_s=2.0, speedup=1.0, efficiency=1.0, amdahl_bound=1.0)], None, path)
        text = path.read_text()

        assert text.startswith("<?xml")
        assert text.rstrip().endswith("</svg>")
        assert "<circle" in text

    def test_bound_asymptote(self, tmp_path):
        path = tmp_path / "bound.svg"
        emit_plot(sample_rows(), 0.9, path)
        text = path.read_text()

        assert "Amdahl limit 10" in text
        assert 'stroke-dasharray="6,4"' in text

    def test_no_bound_without_fraction(self, tmp_path):
        path = tmp_path / "plain.svg"
        emit_plot(sample_rows(), None, path)

        assert "Amdahl limit" not in path.read_text()

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(BenchError):
            emit_plot(sample_rows(), None, tmp_path / "missing" / "plot.svg")


class TestTimeKernel:
    def test_one_record_per_trial(self, settings):
        job = BatchJob(n_items=8, work_cost=10)
        records = time_kernel("batch", job, 2, trials=3, settings=settings)

        assert [r.trial for r in records] == [0, 1, 2]
        assert all(r.workers == 2 and r.wall_time_s > 0 for r in records)
        assert len({r.config_digest for r in records}) == 1
        assert records[0].config_digest == job.digest("batch")

    def test_accepts_plain_dict_config(self, settings):
        records = time_kernel("batch", {"n_items": 4, "work_cost": 2}, 1, trials=1, settings=settings)
        assert records[0].config_digest == BatchJob(n_items=4, work_cost=2).digest("batch")

    def test_rejects_zero_workers(self, settings):
        with pytest.raises(BenchError):
            time_kernel("batch", BatchJob(), 0, settings=settings)

    def test_wraps_worker_failures(self, settings, monkeypatch):
        import pargrid.kernels.batch as batch

        def broken(n, p):
            raise RuntimeError("partition exploded")

        monkeypatch.setattr(batch, "block_partition", broken)
        with pytest.raises(BenchError, match="trial 0"):
            time_kernel("batch", BatchJob(n_items=4, work_cost=1), 2, trials=1, settings=settings)


def test_digest_depends_on_config():
    assert BatchJob(n_items=3).digest("batch") != BatchJob(n_items=4).digest("batch")
