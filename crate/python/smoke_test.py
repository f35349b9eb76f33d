"""Builds the pyrcv extension and exercises it end to end.

    python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module(dest: Path) -> None:
    subprocess.run(["cargo", "build", "--release", "-p", "rcv-outcomes-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libpyrcv.so"
    shutil.copy(lib, dest / "pyrcv.so")


def main() -> int:
    tmp = Path(tempfile.mkdtemp(prefix="pyrcv-"))
    build_module(tmp)
    sys.path.insert(0, str(tmp))
    import pyrcv

    complete = pyrcv.Profile(["A", "B", "C"], 3, [["A"]] * 3 + [["B"]] * 2 + [["C"]])
    assert pyrcv.count(complete) == ["C", "B", "A"]

    toy = pyrcv.Profile(["A", "B"], 2, [["A"], ["A"], ["B"]], unbound_count=2)
    report = pyrcv.outcomes(toy)
    assert report.possible_winners == ["A", "B"], report
    assert sorted(report.orders) == [["A", "B"], ["B", "A"]]
    assert pyrcv.exhaustive_winners(toy) == ["A", "B"]
    assert pyrcv.brute_force(toy).orders == report.orders

    bounds = pyrcv.min_bound(toy, report)
    assert bounds["B"][0] == 2, bounds

    dot = pyrcv.emit(report, "dot")
    assert dot.startswith("digraph"), dot
    graph = json.loads(pyrcv.emit(report, "json", compressed=False))
    assert len(graph["nodes"]) == 5

    path = tmp / "toy.json"
    toy.save(str(path))
    again = pyrcv.Profile.load(str(path))
    assert again.ballots() == toy.ballots() and again.unbound_count == 2

    try:
        pyrcv.count(toy)
    except ValueError as e:
        assert "unbound ballots present" in str(e)
    else:
        raise AssertionError("count accepted outstanding ballots")

    big = pyrcv.Profile.random(6, 2000, 400, 4, seed=3)
    memo = pyrcv.outcomes(big)
    assert memo.orders == pyrcv.outcomes(big, memoize=False).orders
    print(f"ok: {report!r}, {memo!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
