"""Deposit, gated claim, and time-locked refund around one search."""

from . import verifiers  # registers the return gate on import
from .offers import AskOffer, FuseRefund, ReturnClaim
from .escrow import (
    Searcher,
    abort_before_inclusion,
    build_return_tx,
    collect_results,
    fulfill,
    make_ask,
    refund_after_timeout,
)
from .scenario import ScenarioRunner, run_scenario

__all__ = [
    "AskOffer",
    "FuseRefund",
    "ReturnClaim",
    "ScenarioRunner",
    "Searcher",
    "abort_before_inclusion",
    "build_return_tx",
    "collect_results",
    "fulfill",
    "make_ask",
    "refund_after_timeout",
    "run_scenario",
    "verifiers",
]
