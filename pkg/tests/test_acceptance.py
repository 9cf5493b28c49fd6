"""Full-size acceptance criteria; each test prints one PASS/FAIL line."""
import pytest

from bmid.harness.acceptance import CRITERIA, run_criterion
from bmid.harness.cli import main

SEED = 42


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, capsys):
    res = run_criterion(number, seed=SEED)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.details


def test_verify_twice_is_byte_identical(tmp_path):
    outs = []
    for i, threads in enumerate(("1", "2")):
        out = tmp_path / f"run{i}"
        main(["verify", "--seed", str(SEED), "--scale", "0.01", "--threads", threads,
              "--only", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "--out", str(out)])
        outs.append((out / "acceptance.jsonl").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].count(b"\n") == 10
