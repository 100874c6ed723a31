"""Shared registry of acceptance-criterion outcomes, printed by conftest at the end of the run."""

LINES: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(LINES[n])
    return ok
