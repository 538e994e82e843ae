from stretchlab.selftest import run_selftests


def test_all_selftests_pass():
    results = run_selftests()
    failures = [r for r in results if not r.ok]
    assert not failures, "\n".join(f"{r.name}: {r.detail}" for r in failures)
    assert len(results) >= 25
