"""Scripted multi-party runs: accounting, failure steps, replayability."""

import json

import pytest

from chainsse.config import SimConfig
from chainsse.errors import ScenarioError
from chainsse.protocol.scenario import ScenarioRunner, run_scenario
from chainsse.sse.corpus import Document, write_corpus

B_CFG = SimConfig(scheme="B")
A_CFG = SimConfig(scheme="A", iota=16384)

HAPPY = """\
owner ingest corpus
uprime ask kw00 50 t=6
world mine
q fulfill offer-1
world mine
uprime collect offer-1
world balances
"""


@pytest.fixture
def corpus_dir(tmp_path):
    # six docs, query words cycle through kw00..kw02, noise is unique
    docs = []
    for i in range(1, 7):
        pt = f"kw{(i - 1) % 3:02d} zz{i:03d}".encode()
        docs.append(Document(i, pt, frozenset(pt.decode().split())))
    write_corpus(tmp_path / "corpus", docs)
    return tmp_path


def test_happy_path_transcript(corpus_dir):
    runner = ScenarioRunner(B_CFG, seed=1, base_dir=corpus_dir)
    transcript = runner.run(HAPPY)
    assert [e["step"] for e in transcript] == [1, 2, 3, 4, 5, 6, 7]
    by_action = {e["action"]: e for e in transcript}

    assert by_action["ingest"]["detail"].startswith("docs=6")
    assert by_action["ask"]["detail"] == "offer-1 w=kw00 d_t=50 t=6"
    assert by_action["collect"]["txid"] == by_action["ask"]["txid"]

    # the block that buries the claim moves the deposit, nothing else does
    landing = transcript[4]
    assert landing["action"] == "mine"
    assert landing["q_delta"] == 50 and landing["owner_delta"] == 0
    assert sum(e["q_delta"] for e in transcript) == 50
    assert sum(e["owner_delta"] for e in transcript) == -50
    assert runner.ledger.check_conservation()


def test_scheme_A_script_works_with_room(corpus_dir):
    transcript = run_scenario(HAPPY, config=A_CFG, seed=3, base_dir=corpus_dir)
    collected = next(e for e in transcript if e["action"] == "collect")
    assert collected["detail"].startswith("documents=")


def test_balance_deltas_sum_to_final_state(corpus_dir):
    runner = ScenarioRunner(B_CFG, seed=9, base_dir=corpus_dir)
    start_owner = runner.owner_wallet.balance()
    start_q = runner.q_wallet.balance()
    transcript = runner.run(HAPPY)
    assert start_owner + sum(e["owner_delta"] for e in transcript) == \
        runner.owner_wallet.balance()
    assert start_q + sum(e["q_delta"] for e in transcript) == \
        runner.q_wallet.balance()


def test_refund_script(corpus_dir):
    script = """\
owner ingest corpus
uprime ask kw00 40 t=6
world mine 4
uprime refund offer-1
world mine
"""
    runner = ScenarioRunner(B_CFG, seed=2, base_dir=corpus_dir)
    transcript = runner.run(script)
    assert transcript[-2]["detail"] == "refund submitted"
    assert transcript[-1]["owner_delta"] == 40  # deposit came home
    # nobody searched, so there is nothing to collect
    with pytest.raises(ScenarioError) as err:
        runner.run(["uprime collect offer-1"])
    assert err.value.step == 1


def test_hold_then_abort_script(corpus_dir):
    script = """\
owner ingest corpus
uprime ask kw00 40 t=6
world hold offer-1
world mine 2
uprime abort offer-1
world mine
world balances
"""
    runner = ScenarioRunner(B_CFG, seed=4, base_dir=corpus_dir)
    transcript = runner.run(script)
    assert transcript[2]["detail"] == "hold"
    assert sum(e["owner_delta"] for e in transcript) == 0  # fee is zero
    assert not runner.ledger.confirmed(runner.offers["offer-1"][0].ask_txid)


def test_release_lets_the_ask_land(corpus_dir):
    script = """\
owner ingest corpus
uprime ask kw01 30 t=8
world hold offer-1
world mine
world release offer-1
world mine
q fulfill offer-1
world mine
"""
    runner = ScenarioRunner(B_CFG, seed=5, base_dir=corpus_dir)
    runner.run(script)
    assert runner.ledger.confirmed(runner.offers["offer-1"][0].ask_txid)


def test_refusing_searcher_stops_the_ask(corpus_dir):
    script = """\
owner ingest corpus
q policy refuse-presign
uprime ask kw00 40 t=7
"""
    with pytest.raises(ScenarioError) as err:
        run_scenario(script, config=B_CFG, seed=6, base_dir=corpus_dir)
    assert err.value.step == 3
    assert "pre-sign" in str(err.value)


def test_policy_flip_back_to_honest(corpus_dir):
    script = """\
owner ingest corpus
q policy refuse-presign
q policy honest
uprime ask kw00 40 t=7
world mine
q fulfill offer-1
world mine
"""
    transcript = run_scenario(script, config=B_CFG, seed=6, base_dir=corpus_dir)
    assert transcript[-1]["q_delta"] == 40


@pytest.mark.parametrize(
    "line,step,hint",
    [
        ("owner dance", 1, "unknown action"),
        ("uprime ask w 50", 1, "missing argument"),
        ("uprime ask w 50 late", 1, "expected t="),
        ("uprime ask w fifty t=9", 1, "expected an integer"),
        ("q fulfill offer-9", 1, "unknown offer"),
        ("uprime ask w 50 t=9", 1, "before any ingest"),
    ],
)
def test_bad_lines_fail_with_their_step(line, step, hint, corpus_dir):
    with pytest.raises(ScenarioError) as err:
        run_scenario([line], config=B_CFG, seed=0, base_dir=corpus_dir)
    assert err.value.step == step
    assert hint in str(err.value)


def test_step_numbers_are_line_numbers(corpus_dir):
    script = [
        "# a comment",
        "",
        "owner ingest corpus",
        "",
        "world mine",
    ]
    transcript = run_scenario(script, config=B_CFG, seed=0, base_dir=corpus_dir)
    assert [e["step"] for e in transcript] == [3, 5]


def test_empty_script_yields_empty_transcript(corpus_dir):
    assert run_scenario([], config=B_CFG, seed=0, base_dir=corpus_dir) == []


def test_wrapped_errors_name_the_failing_step(corpus_dir):
    script = """\
owner ingest corpus
uprime ask kw00 40 t=6
q fulfill offer-1
"""
    # the ask is still unmined at step 3, a protocol error, not a crash
    with pytest.raises(ScenarioError) as err:
        run_scenario(script, config=B_CFG, seed=1, base_dir=corpus_dir)
    assert err.value.step == 3


def test_replay_is_deterministic(corpus_dir):
    def one_run():
        runner = ScenarioRunner(B_CFG, seed="replay", base_dir=corpus_dir)
        t = runner.run(HAPPY)
        return t, runner.ledger.dump()

    t1, chain1 = one_run()
    t2, chain2 = one_run()
    assert t1 == t2
    assert chain1 == chain2


def test_different_seed_different_chain(corpus_dir):
    a = ScenarioRunner(B_CFG, seed=1, base_dir=corpus_dir)
    b = ScenarioRunner(B_CFG, seed=2, base_dir=corpus_dir)
    a.run(HAPPY)
    b.run(HAPPY)
    assert a.ledger.dump() != b.ledger.dump()


def test_transcript_file_is_jsonl(corpus_dir, tmp_path):
    runner = ScenarioRunner(B_CFG, seed=1, base_dir=corpus_dir)
    runner.run(HAPPY)
    out = tmp_path / "t.jsonl"
    runner.write_transcript(out)
    lines = out.read_text().splitlines()
    assert [json.loads(line) for line in lines] == runner.transcript
    assert all(line == json.dumps(json.loads(line), sort_keys=True) for line in lines)
