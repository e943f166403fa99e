"""Collects one line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    LINES.append(line)
    print(line)
