from collections import defaultdict

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = defaultdict(list)


def record(criterion: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[criterion].append((bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        detail = "; ".join(f"{'ok' if ok else 'FAILED'}: {d}" for ok, d in checks)
        terminalreporter.write_line(f"criterion {n:2d} {status}  {detail}")
