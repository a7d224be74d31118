# tests/test_tasks.py

from morphforge.tasks.pool import run_tasks


def _square(value: int) -> int:
    return value * value


class TestRunTasks:
    """Test the per-item process pool."""

    def test_in_process(self):
        """Test a single worker runs in process."""
        assert run_tasks(_square, [3, 1, 2], workers=1) == [9, 1, 4]

    def test_empty(self):
        """Test no items give no results."""
        assert run_tasks(_square, [], workers=4) == []

    def test_worker_processes_keep_order(self):
        """Test results keep item order across worker processes."""
        assert run_tasks(_square, range(10), workers=2) == [k * k for k in range(10)]

    def test_workers_from_settings(self, monkeypatch, mocker):
        """Test the worker count falls back to settings."""
        monkeypatch.setenv("MORPHFORGE_WORKERS", "1")
        executor = mocker.patch("morphforge.tasks.pool.ProcessPoolExecutor")
        assert run_tasks(_square, [1, 2, 3]) == [1, 4, 9]
        executor.assert_not_called()
