"""Command-line front end.

One subcommand per workflow step: init, keygen, ingest, index, ask,
mine, fulfill, refund, abort, decrypt, inspect, bench. Global flags
come first (`chainsse --workspace W --scheme B index`); each one also
reads a CHAINSSE_* environment variable, and the workspace config file
supplies whatever is left. Ledger-shaping knobs (iota, p-bits,
max-delay, fee, seed) are fixed when the workspace is created; passing
a different value later is an error rather than a silent divergence.
The scheme flag stays live because the index can be rebuilt either way.

Every command claims one step number, takes the workspace lock, and
appends one transcript line. Module errors surface as exit code 1 with
the error class named, not as tracebacks.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import click
from filelock import FileLock, Timeout

from .chain import tx as txm
from .config import SimConfig
from .errors import ChainSSEError, ConfigError, NotFoundError, StoreTimeoutError
from .protocol import escrow
from .sse import store
from .sse.corpus import load_corpus
from .sse.index import build_index_A
from .sse.postings import build_posting_lists
from .sse.search import resolve_ciphertext
from .sse.tokens import chain_key
from .workspace import BROADCAST_FILE, CONFIG_FILE, KEYS_FILE, LOCK_FILE, Workspace

_KIND_NAMES = {
    txm.KIND_DATA: "data",
    txm.KIND_PAY_TO_PUBKEY: "p2pk",
    txm.KIND_MULTISIG_2OF2: "multisig-2of2",
    txm.KIND_PAYLOAD_GATE: "payload-gate",
}
_TAG_NAMES = {
    txm.TAG_OPAQUE: "opaque",
    txm.TAG_SPLIT_HASH: "split-hash",
    txm.TAG_SPLIT_BODY: "split-body",
    txm.TAG_SPLIT_TOKEN: "split-token",
    txm.TAG_CHUNK: "chunk",
}
# tags whose payload ends in a p-byte link to another transaction
_LINKED_TAGS = {txm.TAG_SPLIT_HASH, txm.TAG_SPLIT_BODY, txm.TAG_SPLIT_TOKEN, txm.TAG_CHUNK}

_FIXED_KNOBS = ("iota", "p_bits", "max_delay", "fee")


@click.group()
@click.option("--workspace", "workspace_dir", envvar="CHAINSSE_WORKSPACE",
              default="chainsse-ws", show_default=True,
              help="Directory holding config, keys, ledger and transcripts.")
@click.option("--seed", envvar="CHAINSSE_SEED", type=int, default=None,
              help="Deterministic seed; consumed by init.")
@click.option("--scheme", envvar="CHAINSSE_SCHEME", type=click.Choice(["A", "B"]),
              default=None, help="Index flavour: flat array (A) or record chain (B).")
@click.option("--iota", envvar="CHAINSSE_IOTA", type=int, default=None,
              help="Per-transaction payload budget in bytes; fixed at init.")
@click.option("--p-bits", envvar="CHAINSSE_P_BITS", type=int, default=None,
              help="Transaction id width in bits; fixed at init.")
@click.option("--max-delay", envvar="CHAINSSE_MAX_DELAY", type=int, default=None,
              help="Worst-case ticks from submission to inclusion; fixed at init.")
@click.option("--fee", envvar="CHAINSSE_FEE", type=int, default=None,
              help="Flat per-transaction fee; fixed at init.")
@click.pass_context
def main(ctx, workspace_dir, seed, scheme, iota, p_bits, max_delay, fee):
    """Keyword search over ciphertexts stored on a simulated ledger."""
    overrides = {"scheme": scheme, "iota": iota, "p_bits": p_bits,
                 "max_delay": max_delay, "fee": fee}
    ctx.obj = {
        "dir": Path(workspace_dir),
        "seed": seed,
        "overrides": {k: v for k, v in overrides.items() if v is not None},
    }


def _fail(exc: ChainSSEError) -> click.ClickException:
    return click.ClickException(f"{type(exc).__name__}: {exc}")


@contextmanager
def _session(ctx):
    """Lock the workspace, load it, claim a step, translate errors."""
    obj = ctx.obj
    root: Path = obj["dir"]
    try:
        if not (root / CONFIG_FILE).is_file():
            raise ConfigError(f"{root} is not an initialized workspace; run init")
        with FileLock(root / LOCK_FILE).acquire(timeout=10):
            ws = Workspace(root)
            for knob in _FIXED_KNOBS:
                want = obj["overrides"].get(knob)
                have = getattr(ws.config, knob)
                if want is not None and want != have:
                    raise ConfigError(
                        f"--{knob.replace('_', '-')} {want} conflicts with the "
                        f"workspace value {have}; these are fixed at init"
                    )
            if obj["seed"] is not None and obj["seed"] != ws.state["seed"]:
                raise ConfigError(
                    f"--seed {obj['seed']} conflicts with the workspace seed "
                    f"{ws.state['seed']}; the seed is fixed at init"
                )
            ws.begin_step()
            yield ws
    except Timeout as exc:
        raise click.ClickException("workspace is locked by another command") from exc
    except ChainSSEError as exc:
        raise _fail(exc) from exc


def _resolve_scheme(ws: Workspace, ctx) -> str:
    """Apply a --scheme override, persisting it so later commands agree."""
    scheme = ctx.obj["overrides"].get("scheme")
    if scheme is None or scheme == ws.config.scheme:
        return ws.config.scheme
    ws.config = ws.config.replace(scheme=scheme)
    ws.ledger.config = ws.ledger.config.replace(scheme=scheme)
    ws.config.save(ws.root / CONFIG_FILE)
    return scheme


@main.command()
@click.pass_context
def init(ctx):
    """Create the workspace: config file, funded ledger, transcript dir."""
    obj = ctx.obj
    try:
        cfg = SimConfig().replace(**obj["overrides"])
        seed = obj["seed"] if obj["seed"] is not None else 0
        ws = Workspace.create(obj["dir"], cfg, seed)
    except ChainSSEError as exc:
        raise _fail(exc) from exc
    click.echo(
        f"workspace {ws.root} ready: scheme {cfg.scheme}, iota {cfg.iota}, "
        f"id width {cfg.p_bits} bits, seed {seed}"
    )


@main.command()
@click.pass_context
def keygen(ctx):
    """Derive the owner's secret keys and write the key file (mode 600)."""
    with _session(ctx) as ws:
        keys = ws.write_keys()
        ws.record("keygen", [])
        click.echo(f"owner keys ({keys.bits}-bit) written to {ws.root / KEYS_FILE}")


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.pass_context
def ingest(ctx, corpus_dir):
    """Encrypt every document under CORPUS_DIR and store it on the ledger."""
    with _session(ctx) as ws:
        scheme = _resolve_scheme(ws, ctx)
        keys = ws.read_keys()
        docs = load_corpus(corpus_dir)
        entropy = ws.step_entropy()
        stored = {}
        for doc in sorted(docs, key=lambda d: d.doc_id):
            c = store.encrypt_document(keys, doc.plaintext, entropy)
            if scheme == "A":
                stored[doc.doc_id] = store.store_ciphertext_A(ws.owner_wallet, c)
            else:
                stored[doc.doc_id] = store.store_ciphertext_B(ws.owner_wallet, c)
        ws.ledger.mine_block()
        missing = [t for t in stored.values() if not ws.ledger.confirmed(t)]
        if missing:
            raise StoreTimeoutError(
                f"{len(missing)} store transactions not mined; first {missing[0].hex()}"
            )
        ws.state["docs"] = {str(k): v.hex() for k, v in stored.items()}
        ws.state["corpus_dir"] = str(Path(corpus_dir).resolve())
        ws.save_state()
        ws.save_ledger()
        ws.record("ingest", [str(corpus_dir)],
                  detail=f"{len(stored)} documents, scheme {scheme}")
        click.echo(
            f"stored {len(stored)} encrypted documents (scheme {scheme}); "
            f"clock {ws.ledger.clock}"
        )


@main.command()
@click.option("--mode", type=click.Choice(store.INDEX_MODES), default="auto",
              show_default=True, help="Record layout for the chained index.")
@click.pass_context
def index(ctx, mode):
    """Build the keyword index over the stored documents and publish it."""
    with _session(ctx) as ws:
        scheme = _resolve_scheme(ws, ctx)
        keys = ws.read_keys()
        if not ws.state["docs"]:
            raise ConfigError("nothing ingested yet; run ingest first")
        docs = load_corpus(ws.state["corpus_dir"])
        doc_txids = {int(k): bytes.fromhex(v) for k, v in ws.state["docs"].items()}
        unknown = sorted(d.doc_id for d in docs if d.doc_id not in doc_txids)
        if unknown:
            raise ConfigError(
                f"corpus changed since ingest; documents {unknown[:3]} were never stored"
            )
        cts = {t: resolve_ciphertext(ws.ledger, t) for t in doc_txids.values()}
        plists = build_posting_lists(docs, doc_txids, p_bytes=ws.config.p_bytes)
        entries = build_index_A(keys, plists, cts, p_bytes=ws.config.p_bytes)
        if scheme == "A":
            locator = store.publish_index_A(ws.owner_wallet, entries)
        else:
            locator = store.build_index_B(
                ws.owner_wallet, chain_key(keys, ws.config.p_bytes), entries, mode=mode
            )
        ws.ledger.mine_block()
        if not ws.ledger.confirmed(locator):
            raise StoreTimeoutError(f"index transaction {locator.hex()} not mined")
        store.write_broadcast(ws.root / BROADCAST_FILE, scheme, locator)
        ws.save_ledger()
        ws.record("index", [scheme, mode], txid=locator.hex(),
                  detail=f"{len(entries)} keywords")
        click.echo(
            f"index published (scheme {scheme}, {len(entries)} keywords); "
            f"head {locator.hex()}"
        )


@main.command()
@click.argument("keyword")
@click.option("--deposit", "-d", type=int, default=50, show_default=True,
              help="Deposit locked behind the result gate.")
@click.option("--deadline", "-t", type=int, required=True,
              help="Absolute clock tick at which the refund unlocks.")
@click.option("--hold", is_flag=True,
              help="Keep the ask out of blocks, as if the broadcast "
                   "never propagated; pairs with the abort command.")
@click.pass_context
def ask(ctx, keyword, deposit, deadline, hold):
    """Broadcast a paid search offer for KEYWORD."""
    with _session(ctx) as ws:
        keys = ws.read_keys()
        bscheme, _locator = store.read_broadcast(ws.root / BROADCAST_FILE)
        if bscheme != ws.ledger.config.scheme:
            raise ConfigError(
                f"published index uses scheme {bscheme} but the workspace is set "
                f"to {ws.ledger.config.scheme}; rerun index"
            )
        offer, fuse = escrow.make_ask(
            ws.owner_wallet, keys, keyword, deposit, deadline, _locator,
            escrow.Searcher(ws.q_wallet),
        )
        if hold:
            ws.ledger.hold_tx(offer.ask_txid)
        name = ws.save_offer(offer, fuse, keyword)
        ws.save_ledger()
        ws.record("ask", [keyword, str(deposit), str(deadline)],
                  txid=offer.ask_txid.hex(),
                  detail=name + (" (held)" if hold else ""))
        click.echo(
            f"{name}: ask {offer.ask_txid.hex()} submitted "
            f"(deposit {deposit}, deadline {deadline}); mine to confirm"
        )


@main.command()
@click.argument("offer_name")
@click.pass_context
def fulfill(ctx, offer_name):
    """Run the search for a mined offer and claim its deposit."""
    with _session(ctx) as ws:
        offer, _fuse = ws.load_offer(offer_name)
        claim = escrow.fulfill(escrow.Searcher(ws.q_wallet), offer)
        ws.save_ledger()
        ws.record("fulfill", [offer_name], txid=claim.return_txid.hex(),
                  detail=f"{len(claim.ciphertexts)} matches")
        click.echo(
            f"return {claim.return_txid.hex()} submitted with "
            f"{len(claim.ciphertexts)} matching ciphertexts; mine to settle"
        )


@main.command()
@click.argument("offer_name")
@click.pass_context
def refund(ctx, offer_name):
    """Broadcast the pre-signed refund for an expired offer."""
    with _session(ctx) as ws:
        offer, fuse = ws.load_offer(offer_name)
        txid = escrow.refund_after_timeout(ws.ledger, offer, fuse)
        ws.save_ledger()
        ws.record("refund", [offer_name], txid=txid.hex())
        click.echo(f"refund {txid.hex()} submitted; mine to settle")


@main.command()
@click.argument("offer_name")
@click.pass_context
def abort(ctx, offer_name):
    """Recover the funding of an offer whose ask never reached the chain."""
    with _session(ctx) as ws:
        offer, _fuse = ws.load_offer(offer_name)
        recovery = escrow.abort_before_inclusion(ws.owner_wallet, offer)
        txid = recovery.txid(ws.config.p_bytes)
        ws.save_ledger()
        ws.record("abort", [offer_name], txid=txid.hex())
        click.echo(f"abort recovery {txid.hex()} submitted; mine to settle")


@main.command()
@click.argument("offer_name")
@click.pass_context
def decrypt(ctx, offer_name):
    """Read a settled offer's return transaction and print the documents."""
    with _session(ctx) as ws:
        offer, _fuse = ws.load_offer(offer_name)
        results = escrow.collect_results(ws.ledger, ws.read_keys(), offer)
        ws.record("decrypt", [offer_name], detail=f"{len(results)} documents")
        click.echo(f"{len(results)} matching documents")
        for i, plaintext in enumerate(results, 1):
            click.echo(f"--- document {i} ---")
            click.echo(plaintext.decode("utf-8", errors="replace"))


@main.command()
@click.argument("blocks", type=int, default=1, required=False)
@click.pass_context
def mine(ctx, blocks):
    """Mine BLOCKS blocks (default 1), advancing the clock."""
    with _session(ctx) as ws:
        if blocks < 1:
            raise ConfigError("need at least one block")
        for _ in range(blocks):
            ws.ledger.mine_block()
        ws.save_ledger()
        ws.record("mine", [str(blocks)], detail=f"clock {ws.ledger.clock}")
        click.echo(
            f"mined {blocks} block(s); height {len(ws.ledger.blocks) - 1}, "
            f"clock {ws.ledger.clock}"
        )


@main.command()
@click.argument("txid_hex")
@click.pass_context
def inspect(ctx, txid_hex):
    """Describe a transaction: script kinds, payload sizes, record links.

    Payload bytes themselves are never printed; for link-bearing records
    only the trailing transaction id is shown.
    """
    with _session(ctx) as ws:
        try:
            txid = bytes.fromhex(txid_hex)
        except ValueError as exc:
            raise ConfigError(f"not a hex transaction id: {txid_hex!r}") from exc
        try:
            tx = ws.ledger.get_tx(txid)
            status = "confirmed"
        except NotFoundError:
            found = [t for t in ws.ledger.mempool
                     if t.txid(ws.config.p_bytes) == txid]
            if not found:
                raise
            tx, status = found[0], "in mempool"
        p = ws.config.p_bytes
        ws.record("inspect", [txid_hex])
        click.echo(f"tx {txid_hex} ({status}), locktime {tx.locktime}")
        for tin in tx.inputs:
            click.echo(
                f"  in  {tin.prev.txid.hex()}:{tin.prev.index} "
                f"({len(tin.signatures)} signature(s))"
            )
        for i, out in enumerate(tx.outputs):
            line = f"  out[{i}] value {out.value} {_KIND_NAMES[out.script.kind]}"
            if out.payload:
                line += f", {_TAG_NAMES[out.payload_tag]} payload, {len(out.payload)} bytes"
                if out.payload_tag in _LINKED_TAGS and len(out.payload) >= p:
                    line += f", link {out.payload[-p:].hex()}"
            click.echo(line)


@main.command()
@click.option("--pairs", default="100,200,400,800", show_default=True,
              help="Comma-separated keyword-document pair counts.")
@click.option("--samples", type=int, default=8, show_default=True,
              help="Probed keyword positions per pair count.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory [default: WORKSPACE/bench].")
@click.pass_context
def bench(ctx, pairs, samples, out_dir):
    """Sweep index sizes; write an ops/time table and plots."""
    with _session(ctx) as ws:
        try:
            counts = tuple(int(x) for x in pairs.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --pairs value {pairs!r}") from exc
        # numpy and matplotlib load only when benchmarking
        from .bench import run_bench
        from .report import build_series, linear_fit, render_figures, write_tsv

        rows = run_bench(
            counts, samples=samples, seed=ws.state["seed"],
            config=ws.config.replace(scheme="B"),
        )
        out = Path(out_dir) if out_dir else ws.root / "bench"
        out.mkdir(parents=True, exist_ok=True)
        tsv = write_tsv(rows, out / "bench.tsv")
        figures = render_figures(rows, out)
        xs, ys = build_series(rows)
        slope, intercept, r2 = linear_fit([float(x) for x in xs], [float(y) for y in ys])
        ws.record("bench", [pairs, str(samples)], detail=f"{len(rows)} rows")
        click.echo(f"{len(rows)} samples over pair counts {list(counts)}")
        click.echo(f"index ops fit: {slope:.2f} per pair + {intercept:.2f}, R^2 {r2:.6f}")
        for path in [tsv, *figures]:
            click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
