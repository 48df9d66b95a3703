#!/usr/bin/env python3
"""Smoke test for the `seer` Python extension module.

Build the module and run this script:

    cargo build --release -p seer-py
    cp target/release/libseer.so python/seer.so   # .dylib on macOS
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import seer  # noqa: E402


def parse_answers(tsv):
    out = {}
    for line in tsv.strip().splitlines():
        qid, _, field = line.partition("\t")
        out[qid] = field
    return out


def main():
    # Deterministic scene from the default generator family.
    config_json, trace_json, truth_json = seer.generate("{}", seed=7)
    config = json.loads(config_json)
    assert config["frame_count"] == 128
    again = seer.generate("{}", seed=7)
    assert again[1] == trace_json, "generation must be deterministic"

    # Facts and events look sane.
    facts = seer.reconstruct_facts(trace_json)
    assert "object(0)." in facts
    assert "next_time(0,1)." in facts
    events = seer.detect(trace_json)
    assert "happens(" in events

    # Questions round-trip and the reasoner agrees with the oracle.
    questions, oracle_tsv = seer.generate_questions(
        truth_json, descriptive=25, explanatory=5, seed=7
    )
    n_questions = len(questions.strip().splitlines())
    assert n_questions >= 25, f"too few questions: {n_questions}"
    for line in questions.strip().splitlines():
        body = line.rsplit("#", 1)[0].strip()
        qtype, canonical = seer.check_question(body)
        assert canonical == body, (canonical, body)

    answers_tsv = seer.answer(trace_json, questions)
    predicted = parse_answers(answers_tsv)
    expected = parse_answers(oracle_tsv)
    agree = sum(1 for k in expected if predicted.get(k) == expected[k])
    ratio = agree / len(expected)
    assert ratio >= 0.95, f"reasoner agrees with oracle on only {ratio:.0%}"

    report = seer.score(answers_tsv, oracle_tsv, questions)
    assert "overall" in report

    # The rule engine answers a hand-written program.
    model = seer.evaluate_program(
        "edge(1,2). edge(2,3). reach(X,Y) :- edge(X,Y). "
        "reach(X,Z) :- reach(X,Y), edge(Y,Z)."
    )
    assert "reach(1,3)." in model

    # The full rule file parses and is non-trivial.
    rules = seer.rule_file("H2")
    assert "holdsAt(F, T+1)" in rules
    checked = seer.check_program(rules)
    assert "happens" in checked

    print(f"smoke test OK: {n_questions} questions, reasoner/oracle agreement {ratio:.0%}")


if __name__ == "__main__":
    main()
