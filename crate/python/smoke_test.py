"""Smoke test for the divgame_py extension.

Install it first with `pip install --no-build-isolation -e crates/py`.
"""

from pathlib import Path

import divgame_py

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"


def read(name):
    return (DATA / name).read_text()


def main():
    fig1 = read("fig1.wg")
    values = divgame_py.solve(fig1)
    assert values == {
        "v1": "-inf", "v2": -9, "v3": -9, "v4": "+inf", "v5": 1,
        "v6": 1, "v7": "+inf", "v8": 0, "v9": 2, "vt": 0,
    }, values
    assert divgame_py.brute_force(fig1) == values
    assert divgame_py.is_divergent(fig1)

    wait1 = read("wait1.wtg")
    assert divgame_py.timed_value(wait1, "s0", "1/2") == "1/2"
    grid = divgame_py.solve_grid(wait1, 2)
    assert grid["granularity"] == 2
    assert "states" in divgame_py.solve_timed_game(read("loopP.wtg"))

    loop0 = read("loop0.wtg")
    assert not divgame_py.is_divergent(loop0)
    try:
        divgame_py.solve_timed_game(loop0)
    except divgame_py.NotDivergentError:
        pass
    else:
        raise AssertionError("loop0 should be refused")
    try:
        divgame_py.solve("game untimed\nvertex a\n")
    except ValueError:
        pass
    else:
        raise AssertionError("syntax error expected")
    print("smoke test passed")


if __name__ == "__main__":
    main()
