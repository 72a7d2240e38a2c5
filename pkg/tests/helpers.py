import re
from pathlib import Path

CORPUS = Path(__file__).parent / "corpus"
LISTING_PATH = CORPUS / "sqrt.mp"
LISTING = LISTING_PATH.read_text()


def listing_with_main(body: str) -> str:
    """The sqrt listing with ``main``'s body replaced."""
    out, n = re.subn(r"procedure main\(\) \{[^}]*\}", f"procedure main() {{{body}}}", LISTING)
    assert n == 1
    return out


def brute_sqrt(r: int) -> int:
    """Smallest n >= 1 with n*n > r, by counting up."""
    n = 1
    while n * n <= r:
        n += 1
    return n


def span_text(source: str, span) -> str:
    """Source text under ``span`` (first line only for multi-line spans)."""
    line = source.splitlines()[span.start_line - 1]
    end = span.end_col if span.end_line == span.start_line else len(line) + 1
    return line[span.start_col - 1 : end - 1]


