from pathlib import Path

import pytest

BENCH_DIR = Path(__file__).resolve().parent.parent / "benchmarks"

MP_SRC = """
vars x = 0, y = 0;
thread t1 { a: store x 1; b: store y 1; }
thread t2 { c: r1 = load y; d: r2 = load x; }
assert (r1 != 1 || r2 == 1);
"""

SB_SRC = """
vars x = 0, y = 0;
thread t1 { a: store x 1; c: r1 = load y; }
thread t2 { b: store y 1; d: r2 = load x; }
assert (r1 == 1 || r2 == 1);
"""

WHY_IC_SRC = """
vars x = 0;
thread t1 { a: store x 1; b: store x 2; }
thread t2 { c: r1 = load x; d: r2 = load x; }
assert (r1 != 2 || r2 != 1);
"""


@pytest.fixture
def mp_program():
    from ramosaic.litmus import parse

    return parse(MP_SRC)


def corpus_files():
    return sorted(BENCH_DIR.glob("*.lit"))
