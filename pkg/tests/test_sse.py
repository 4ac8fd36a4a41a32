"""Index building blocks: postings, chunks, tokens, entries, storage."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsse import crypto
from chainsse.chain.tx import TAG_CHUNK, TAG_OPAQUE
from chainsse.config import SimConfig
from chainsse.entropy import SeededEntropy
from chainsse.errors import (
    ConfigError,
    IntegrityError,
    ParameterError,
    StoreTimeoutError,
)
from chainsse.sse.chunks import chunk_ciphertext, chunk_count, reassemble
from chainsse.sse.corpus import Document, dictionary_of, load_corpus, write_corpus
from chainsse.sse.index import (
    IndexEntry,
    build_index_A,
    decrypt_record,
    encrypt_record,
    entry_lengths,
    parse_array,
    parse_record,
    serialize_array,
    serialize_record,
)
from chainsse.sse.postings import (
    PostingList,
    build_posting_lists,
    parse_postings,
    serialize_postings,
)
from chainsse.sse.store import (
    build_index_B,
    encrypt_document,
    ingest,
    publish_index_A,
    read_broadcast,
    store_ciphertext_A,
    store_ciphertext_B,
    write_broadcast,
)
from chainsse.sse.search import resolve_ciphertext, walk_index_B
from chainsse.sse.tokens import chain_key, derive_trapdoor

from conftest import make_corpus, make_world

P = 32  # id width under the default config

# scheme A wants the whole array in one output; give those worlds room
ARRAY_CFG = SimConfig(iota=16384, scheme="A")


def docs_fixed():
    return [
        Document(1, b"alpha beta", frozenset({"alpha", "beta"})),
        Document(2, b"beta", frozenset({"beta"})),
        Document(3, b"gamma beta", frozenset({"beta", "gamma"})),
    ]


def txids_for(docs):
    return {d.doc_id: bytes([d.doc_id]) * P for d in docs}


# -- posting lists -------------------------------------------------------


def test_postings_padded_to_delta_in_doc_order():
    docs = docs_fixed()
    pls = build_posting_lists(docs, txids_for(docs), p_bytes=P)
    assert set(pls) == {"alpha", "beta", "gamma"}
    assert all(len(pl.entries) == 3 for pl in pls.values())  # delta = |beta|
    beta = pls["beta"]
    assert beta.match_count == 3
    assert beta.matches == (b"\x01" * P, b"\x02" * P, b"\x03" * P)
    alpha = pls["alpha"]
    assert alpha.match_count == 1
    assert alpha.entries == (b"\x01" * P, bytes(P), bytes(P))


def test_postings_dictionary_superset_gets_pad_lists():
    docs = docs_fixed()
    pls = build_posting_lists(
        docs, txids_for(docs), p_bytes=P, dictionary=["beta", "unused"]
    )
    assert pls["unused"].match_count == 0
    assert set(pls["unused"].entries) == {bytes(P)}


def test_postings_missing_doc_txid():
    docs = docs_fixed()
    with pytest.raises(ParameterError):
        build_posting_lists(docs, {1: b"\x01" * P}, p_bytes=P)


def test_postings_serialize_parse_round_trip():
    docs = docs_fixed()
    pls = build_posting_lists(docs, txids_for(docs), p_bytes=P)
    for pl in pls.values():
        blob = serialize_postings(pl, P)
        assert len(blob) == 3 * P
        assert parse_postings(blob, P) == list(pl.matches)


def test_postings_serialize_rejects_width_mismatch():
    bad = PostingList("w", (b"\x01" * 16,), 1)
    with pytest.raises(ParameterError):
        serialize_postings(bad, P)
    with pytest.raises(ParameterError):
        parse_postings(b"\x00" * 33, P)


@given(n_docs=st.integers(1, 12), seed=st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_postings_uniform_length_property(n_docs, seed):
    rng = random.Random(seed)
    docs = make_corpus(rng, max_docs=n_docs, chunky=False)
    pls = build_posting_lists(docs, txids_for(docs), p_bytes=P)
    lengths = {len(pl.entries) for pl in pls.values()}
    assert len(lengths) <= 1
    delta = max(pl.match_count for pl in pls.values())
    assert lengths == {delta}


# -- chunk arithmetic ----------------------------------------------------


def test_chunk_count_spot_values():
    assert chunk_count(100, 64, 32) == 4
    assert chunk_count(10, 80, 32) == 1
    assert chunk_count(0, 80, 32) == 0
    assert chunk_count(48, 80, 32) == 1
    assert chunk_count(49, 80, 32) == 2


def test_chunk_pieces_spot_case():
    plan = chunk_ciphertext(bytes(100), 64, 32)
    assert plan.s == 4
    assert [len(c) for c in plan.chunks] == [32, 32, 32, 4]


def test_chunk_rejects_bad_widths():
    with pytest.raises(ParameterError):
        chunk_count(10, 32, 32)
    with pytest.raises(ParameterError):
        chunk_count(-1, 80, 32)
    with pytest.raises(ParameterError):
        chunk_count(10, 80, 0)


@given(c=st.binary(max_size=700), iota=st.integers(33, 120))
@settings(max_examples=60, deadline=None)
def test_chunk_reassemble_round_trip(c, iota):
    plan = chunk_ciphertext(c, iota, 32)
    assert reassemble(plan.chunks) == c
    assert plan.s == chunk_count(len(c), iota, 32)
    assert all(len(piece) <= iota - 32 for piece in plan.chunks)


# -- tokens --------------------------------------------------------------


def test_trapdoor_deterministic_and_scheme_shaped():
    keys = crypto.gen(256, entropy=SeededEntropy("t"))
    a1 = derive_trapdoor(keys, "w", "A", p_bytes=P)
    a2 = derive_trapdoor(keys, "w", "A", p_bytes=P)
    assert a1 == a2
    assert a1.k11 is None
    b = derive_trapdoor(keys, "w", "B", p_bytes=P)
    assert (b.t_w, b.l_w, b.k_w) == (a1.t_w, a1.l_w, a1.k_w)
    assert b.k11 == chain_key(keys, P)
    assert b.token_len == len(keys.k2) == 32


def test_trapdoor_tokens_are_prf_outputs():
    keys = crypto.gen(256, entropy=SeededEntropy("t2"))
    t = derive_trapdoor(keys, "pay", "A")
    assert t.t_w == crypto.prf(1, keys.k2, b"pay")
    assert t.l_w == crypto.prf(2, keys.k2, b"pay")
    assert t.k_w == crypto.prf(3, keys.k2, b"pay")
    assert chain_key(keys, P) == crypto.prf(2, keys.k2, bytes(P))


def test_trapdoors_distinct_across_keywords():
    keys = crypto.gen(256, entropy=SeededEntropy("t3"))
    seen = set()
    for w in [f"w{i}" for i in range(50)]:
        t = derive_trapdoor(keys, w, "A")
        seen.update({t.t_w, t.l_w, t.k_w})
    assert len(seen) == 150


# -- index entries -------------------------------------------------------


def build_fixed_index():
    keys = crypto.gen(256, entropy=SeededEntropy("inx"))
    docs = docs_fixed()
    doc_txids = txids_for(docs)
    ent = SeededEntropy("inx-ct")
    cts = {
        doc_txids[d.doc_id]: encrypt_document(keys, d.plaintext, ent) for d in docs
    }
    pls = build_posting_lists(docs, doc_txids, p_bytes=P)
    return keys, docs, doc_txids, cts, pls, build_index_A(keys, pls, cts, p_bytes=P)


def test_entries_sorted_and_length_regular():
    keys, docs, doc_txids, cts, pls, entries = build_fixed_index()
    tokens = [derive_trapdoor(keys, w, "A").t_w for w in ["alpha", "beta", "gamma"]]
    assert [e.t_w for e in entries] == tokens  # ascending keyword bytes
    t_len, e_len, h_len = entry_lengths(32, 3, P)
    assert all((len(e.t_w), len(e.e_w), len(e.h_w)) == (t_len, e_len, h_len) for e in entries)
    assert (t_len, e_len, h_len) == (32, 3 * P + 16, 32)


def test_entry_digest_covers_matches_only():
    keys, docs, doc_txids, cts, pls, entries = build_fixed_index()
    trap = derive_trapdoor(keys, "alpha", "A")
    expected = crypto.keyed_hash(trap.k_w, cts[doc_txids[1]])
    assert entries[0].h_w == expected


def test_entry_digest_for_zero_matches_is_empty_mac():
    keys = crypto.gen(256, entropy=SeededEntropy("inx0"))
    docs = docs_fixed()
    pls = build_posting_lists(
        docs, txids_for(docs), p_bytes=P, dictionary=["nothing"]
    )
    cts = {t: b"c" for t in txids_for(docs).values()}
    entries = build_index_A(keys, pls, cts, p_bytes=P)
    trap = derive_trapdoor(keys, "nothing", "A")
    nothing = next(e for e in entries if e.t_w == trap.t_w)
    assert nothing.h_w == crypto.keyed_hash(trap.k_w, b"")


def test_build_index_requires_all_ciphertexts():
    keys, docs, doc_txids, cts, pls, _ = build_fixed_index()
    del cts[doc_txids[2]]
    with pytest.raises(IntegrityError):
        build_index_A(keys, pls, cts, p_bytes=P)


def test_array_serialize_parse_round_trip():
    *_, entries = build_fixed_index()
    blob = serialize_array(entries)
    assert parse_array(blob) == entries
    assert parse_array(serialize_array([])) == []
    with pytest.raises(ParameterError):
        parse_array(blob + b"\x00")
    ragged = [entries[0], IndexEntry(b"t", b"e", b"h")]
    with pytest.raises(ParameterError):
        serialize_array(ragged)


def test_record_serialize_parse_round_trip():
    *_, entries = build_fixed_index()
    prev = bytes(range(P))
    blob = serialize_record(entries[1], prev)
    entry, link = parse_record(blob, 32, P)
    assert (entry, link) == (entries[1], prev)
    with pytest.raises(ParameterError):
        parse_record(b"\x00" * 10, 32, P)


def test_record_encryption_round_trip_and_wrong_key():
    *_, entries = build_fixed_index()
    k11 = crypto.prf(2, bytes(32), bytes(P))
    r = encrypt_record(k11, entries[0], bytes(P))
    entry, prev = decrypt_record(k11, r, 32, P)
    assert entry == entries[0] and prev == bytes(P)
    with pytest.raises(IntegrityError):
        decrypt_record(bytes(32), r, 32, P)


# -- storing ciphertexts -------------------------------------------------


def test_store_small_ciphertext_single_tx():
    world = make_world("store-s")
    c = b"c" * world.config.iota
    for store in (store_ciphertext_A, store_ciphertext_B):
        txid = store(world.owner, c)
        world.ledger.mine_block()
        tx = world.ledger.get_tx(txid)
        assert tx.outputs[0].payload_tag == TAG_OPAQUE
        assert resolve_ciphertext(world.ledger, txid) == c


def test_store_large_ciphertext_scheme_A_multi_output():
    world = make_world("store-a", config=ARRAY_CFG.replace(iota=100))
    c = bytes(range(256)) + bytes(14)  # 270 bytes, iota 100
    txid = store_ciphertext_A(world.owner, c)
    world.ledger.mine_block()
    tx = world.ledger.get_tx(txid)
    data_outs = [o for o in tx.outputs if o.payload]
    assert [len(o.payload) for o in data_outs] == [100, 100, 70]
    assert resolve_ciphertext(world.ledger, txid) == c


def test_store_large_ciphertext_scheme_B_linked_chunks():
    world = make_world("store-b")
    cfg = world.config
    c = SeededEntropy("blob").read(200)
    txid = store_ciphertext_B(world.owner, c)
    world.ledger.mine_block()
    # the posting entry points at the LAST chunk; walk back and count
    s = chunk_count(len(c), cfg.iota, cfg.p_bytes)
    link, hops = txid, 0
    while link != cfg.zero_id:
        tx = world.ledger.get_tx(link)
        assert tx.outputs[0].payload_tag == TAG_CHUNK
        link = b"".join(tx.payloads())[-cfg.p_bytes :]
        hops += 1
    assert hops == s == 5
    assert resolve_ciphertext(world.ledger, txid) == c


# -- publishing indexes --------------------------------------------------


def test_publish_array_too_big_is_config_error():
    world = make_world("pub-a")  # iota 80: even a 1-entry array exceeds it
    *_, entries = build_fixed_index()
    with pytest.raises(ConfigError):
        publish_index_A(world.owner, entries[:1])
    assert world.ledger.mempool == []  # nothing was submitted


def test_build_index_B_modes_and_walk_order():
    keys = crypto.gen(256, entropy=SeededEntropy("modes"))
    # one keyword per doc keeps delta at 1, the only width where the
    # three-way split fits iota=80 (48-byte body plus a 32-byte link)
    docs = [
        Document(i, f"only{i}".encode(), frozenset({f"only{i}"})) for i in (1, 2, 3)
    ]
    for mode in ("auto", "split3", "spread"):
        world = make_world(f"mode-{mode}")
        res_docs = {}
        cts = {}
        ent = SeededEntropy(f"ct-{mode}")
        for d in docs:
            c = encrypt_document(keys, d.plaintext, ent)
            t = store_ciphertext_B(world.owner, c)
            res_docs[d.doc_id] = t
            cts[t] = c
        pls = build_posting_lists(docs, res_docs, p_bytes=P)
        entries = build_index_A(keys, pls, cts, p_bytes=P)
        k11 = chain_key(keys, P)
        head = build_index_B(world.owner, k11, entries, mode=mode)
        world.ledger.mine_block()
        walked = [e for e, _ in walk_index_B(world.ledger, k11, 32, head)]
        assert walked == list(reversed(entries))  # head is the newest record


def test_build_index_B_bad_inputs():
    world = make_world("bad-b")
    *_, entries = build_fixed_index()
    with pytest.raises(ParameterError):
        build_index_B(world.owner, bytes(32), entries, mode="zigzag")
    with pytest.raises(ParameterError):
        build_index_B(world.owner, bytes(32), [])


def test_record_mode_requires_room():
    # an encrypted record never fits iota=80 here, so pinning "record" fails
    world = make_world("rec")
    *_, entries = build_fixed_index()
    from chainsse.errors import TxRejected

    with pytest.raises(TxRejected):
        build_index_B(world.owner, bytes(32), entries, mode="record")


# -- ingest pipeline -----------------------------------------------------


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_ingest_round_trip(scheme):
    cfg = ARRAY_CFG.replace(scheme=scheme)
    world = make_world(f"ingest-{scheme}", config=cfg)
    rng = random.Random(77)
    docs = make_corpus(rng, max_docs=12)
    res = ingest(world.owner, world.keys, docs, scheme, world.entropy.fork("ingest"))
    assert res.scheme == scheme
    assert set(res.doc_txids) == {d.doc_id for d in docs}
    assert world.ledger.confirmed(res.locator)
    for doc in docs:
        txid = res.doc_txids[doc.doc_id]
        c = resolve_ciphertext(world.ledger, txid)
        assert c == res.ciphertexts[txid]
        assert crypto.sym_decrypt(world.keys.k1, c) == doc.plaintext
    assert res.delta == max(pl.match_count for pl in res.posting_lists.values())


def test_ingest_unmined_store_times_out(world):
    real_mine = world.ledger.mine_block

    def mine_with_a_lost_tx():
        # first stored doc never propagates, so confirmation must fail
        first = world.ledger.mempool[0].txid(world.config.p_bytes)
        world.ledger.hold_tx(first)
        return real_mine()

    world.ledger.mine_block = mine_with_a_lost_tx
    try:
        with pytest.raises(StoreTimeoutError):
            ingest(world.owner, world.keys, docs_fixed(), "B", world.entropy.fork("x"))
    finally:
        world.ledger.mine_block = real_mine


def test_broadcast_file_round_trip(tmp_path):
    path = tmp_path / "head.json"
    write_broadcast(path, "B", b"\xab" * 32)
    assert read_broadcast(path) == ("B", b"\xab" * 32)
    with pytest.raises(ConfigError):
        read_broadcast(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        read_broadcast(tmp_path / "bad.json")


# -- corpus files --------------------------------------------------------


def test_corpus_write_load_round_trip(tmp_path):
    rng = random.Random(3)
    docs = make_corpus(rng, max_docs=8)
    write_corpus(tmp_path / "c", docs)
    back = load_corpus(tmp_path / "c")
    assert back == sorted(docs, key=lambda d: d.doc_id)
    assert dictionary_of(back) == sorted(
        {w for d in docs for w in d.keywords}, key=lambda w: w.encode()
    )


def test_corpus_without_manifest_tokenizes(tmp_path):
    d = tmp_path / "plain"
    d.mkdir()
    (d / "a.txt").write_text("pay invoice pay")
    (d / "b.txt").write_text("ship")
    docs = load_corpus(d)
    assert [doc.doc_id for doc in docs] == [1, 2]
    assert docs[0].keywords == frozenset({"pay", "invoice"})
    assert docs[1].plaintext == b"ship"


def test_corpus_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_corpus(tmp_path / "nope")
    d = tmp_path / "badmanifest"
    d.mkdir()
    (d / "keywords.tsv").write_text("one\tw\n")
    with pytest.raises(ConfigError):
        load_corpus(d)
    d2 = tmp_path / "orphan"
    d2.mkdir()
    (d2 / "keywords.tsv").write_text("7\tw\n")
    with pytest.raises(ConfigError):
        load_corpus(d2)
