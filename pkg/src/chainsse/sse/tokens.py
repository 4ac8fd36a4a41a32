"""Per-keyword search tokens and the index chain key.

Three domain-separated PRF instances turn (master key, keyword) into the
search token t_w (located by equality in the index), the list key l_w
(decrypts the posting list) and the digest key k_w (checks the result
MAC). The chain key is the second instance applied to the all-zero id
string, so it is shared by every keyword of one owner but reveals
nothing about any keyword.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import crypto
from ..crypto import KeyBundle


@dataclass(frozen=True)
class Trapdoor:
    """What a searcher needs for one keyword; never contains master keys."""

    scheme: str
    t_w: bytes
    l_w: bytes
    k_w: bytes
    k11: bytes | None = None

    @property
    def token_len(self) -> int:
        return len(self.t_w)


def chain_key(keys: KeyBundle, p_bytes: int) -> bytes:
    return crypto.prf(2, keys.k2, bytes(p_bytes))


def derive_trapdoor(keys: KeyBundle, w: str, scheme: str, *, p_bytes: int = 32) -> Trapdoor:
    """Tokens for keyword `w`; unknown keywords yield tokens matching nothing."""
    wb = w.encode()
    return Trapdoor(
        scheme=scheme,
        t_w=crypto.prf(1, keys.k2, wb),
        l_w=crypto.prf(2, keys.k2, wb),
        k_w=crypto.prf(3, keys.k2, wb),
        k11=chain_key(keys, p_bytes) if scheme == "B" else None,
    )
