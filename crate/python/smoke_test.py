"""Smoke test for the lexroad extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`, then
run `python python/smoke_test.py` from the repository root.
"""

import math
import pathlib
import sys

import lexroad

ROOT = pathlib.Path(__file__).resolve().parent.parent
PACK = ROOT / "rulepack"


def main():
    rule = lexroad.load_rule(str(PACK / "99-100-r1.rule"))
    assert rule.rule_id == "UK-HC-99-100/1"
    assert rule.equations() == {
        "B": "(q ∨ (r ∨ s)) ∧ y",
        "D": "(q ∨ (r ∨ s)) ∧ ¬y",
    }
    assert rule.evaluate({"q": True, "y": True}) == {"B": True, "D": False}
    assert rule.evaluate({"y": True}) == {"B": None, "D": False}
    assert rule.overlapping_pairs() == []
    assert len(rule.truth_table()) == 16

    net = rule.bayes_net()
    post = net.infer()
    assert math.isclose(post["B"], 7 / 16, abs_tol=1e-9)
    agree, total, validated = net.validate()
    assert agree == total == 16 and validated == 2
    assert net.infer({"q": True}, method="elimination")["D"] == net.infer({"q": True}, method="enumeration")["D"]

    try:
        net.infer({"B": True, "y": False})
    except lexroad.InferenceError:
        pass
    else:
        raise AssertionError("impossible evidence accepted")

    lawmap = rule.lawmap()
    assert lawmap.outcome({"q": True, "r": False, "s": False, "y": False}) == ["D"]
    assert lawmap.to_dot().startswith("digraph")
    try:
        lawmap.trace({"q": True})
    except lexroad.IncompleteScenarioError:
        pass
    else:
        raise AssertionError("incomplete trace accepted")

    inline = lexroad.compile_rule(
        "IF: [A] Vehicle is moving. @var(m) EXCEPT: [C] Where stopped in traffic; @var(s) "
        "THEN: [X] May wait. @var(W) ELSE: [Y] MUST proceed. @var(P)",
        rule_id="demo",
    )
    assert inline.equations(ascii=True) == {"W": "m & s", "P": "m & !s"}
    assert "IF:" in inline.pretty()

    try:
        lexroad.compile_rule("IF: [A] x.", rule_id="bad")
    except lexroad.RuleSyntaxError as e:
        assert "ELSE" in str(e)
    else:
        raise AssertionError("missing ELSE accepted")

    pack = lexroad.Rulepack(str(PACK))
    assert len(pack.rule_ids) == 7
    assert pack.vehicles == ["vauxhall-insignia", "mitsubishi-shogun-sport", "bmw-740li"]
    ratings = {g: r for g, r, _ in pack.rate("bmw-740li")}
    assert ratings["113"] == "GREEN" and ratings["99-100"] == "RED"
    report = pack.check()
    assert report == (ROOT / "crates/cli/tests/golden/shipped_report.txt").read_text(encoding="utf-8")

    print("lexroad", lexroad.__version__, "smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
