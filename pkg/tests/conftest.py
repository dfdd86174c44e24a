import pytest


@pytest.fixture
def report(capsys):
    """Print one ``PASS``/``FAIL`` line straight to the terminal."""

    def _report(label: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        return ok

    return _report
