"""IP-to-AS translation and AS / IXP level path change rules.

AS paths are tuples of string labels:

``"AS3356"``
    a public autonomous system number
``"IXP:<name>"``
    a hop inside an exchange point's peering LAN
``"*"``
    no response at that hop
``"?"``
    address with no public origin AS (private space, unannounced, malformed)
"""

from __future__ import annotations

import ipaddress
import logging
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

NORESPONSE = "*"
UNMAPPED = "?"

_PRIVATE_ASNS = ((0, 0), (23456, 23456), (64496, 65551), (4200000000, 4294967295))


def is_public_asn(label: str | None) -> bool:
    if not label or not label.startswith("AS"):
        return False
    try:
        asn = int(label[2:])
    except ValueError:
        return False
    return not any(lo <= asn <= hi for lo, hi in _PRIVATE_ASNS)


def is_ixp(label: str | None) -> bool:
    return bool(label) and label.startswith("IXP:")


class PrefixTable:
    """Longest-prefix-match table for IPv4 and IPv6.

    When the same prefix is loaded twice with different values the smallest
    value (by string order) is kept, so the result never depends on load
    order.
    """

    def __init__(self, entries: Iterable[tuple[str, str]] = ()) -> None:
        self._nets: dict[tuple[int, int], dict[int, str]] = {}
        self._lengths: dict[int, list[int]] = {4: [], 6: []}
        for prefix, value in entries:
            self.add(prefix, value)

    def add(self, prefix: str, value: str) -> None:
        net = ipaddress.ip_network(prefix.strip(), strict=False)
        key = (net.version, net.prefixlen)
        bucket = self._nets.setdefault(key, {})
        addr = int(net.network_address)
        old = bucket.get(addr)
        bucket[addr] = value if old is None else min(old, value)
        lengths = self._lengths[net.version]
        if net.prefixlen not in lengths:
            lengths.append(net.prefixlen)
            lengths.sort(reverse=True)

    def __len__(self) -> int:
        return sum(len(b) for b in self._nets.values())

    def lookup(self, address: str | ipaddress._BaseAddress) -> str | None:
        ip = ipaddress.ip_address(address) if isinstance(address, str) else address
        bits = 32 if ip.version == 4 else 128
        value = int(ip)
        for plen in self._lengths[ip.version]:
            net = value >> (bits - plen) << (bits - plen) if plen else 0
            hit = self._nets[(ip.version, plen)].get(net)
            if hit is not None:
                return hit
        return None

    @classmethod
    def load(cls, path) -> "PrefixTable":
        """Read ``prefix/len<TAB>value`` lines; blank and ``#`` lines are skipped."""
        table = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t") if "\t" in line else line.split(None, 1)
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'prefix<TAB>value'")
                table.add(parts[0], parts[1].strip())
        return table


def _asn_label(value: str) -> str:
    v = value.strip()
    if v.upper().startswith("AS"):
        v = v[2:]
    return f"AS{int(v)}"


def collapse(labels: Iterable[str]) -> tuple[str, ...]:
    """Merge runs of the same AS or IXP label; ``*`` and ``?`` are kept."""
    out: list[str] = []
    for label in labels:
        if out and label == out[-1] and label not in (NORESPONSE, UNMAPPED):
            continue
        out.append(label)
    return tuple(out)


def map_as_path(
    ip_path: Sequence[str | None],
    prefix_table: PrefixTable,
    ixp_table: PrefixTable | None = None,
) -> tuple[str, ...]:
    labels = []
    for hop in ip_path:
        if hop is None or hop == NORESPONSE:
            labels.append(NORESPONSE)
            continue
        try:
            ip = ipaddress.ip_address(hop)
        except ValueError:
            logger.warning("malformed hop address %r", hop)
            labels.append(UNMAPPED)
            continue
        ixp = ixp_table.lookup(ip) if ixp_table is not None else None
        if ixp is not None:
            labels.append(f"IXP:{ixp}")
            continue
        asn = prefix_table.lookup(ip)
        label = UNMAPPED
        if asn is not None:
            try:
                label = _asn_label(asn)
            except ValueError:
                logger.warning("non-numeric origin %r for %s", asn, hop)
            if not is_public_asn(label):
                label = UNMAPPED
        labels.append(label)
    return collapse(labels)


def responsive(path: Sequence[str]) -> tuple[str, ...]:
    return collapse(label for label in path if label != NORESPONSE)


def _gaps_explain(pattern: Sequence[str], target: Sequence[str]) -> bool:
    """Can each run of ``r`` silent hops in ``pattern`` stand for 0..r labels of ``target``?"""
    tokens: list[tuple[str, int]] = []
    for label in pattern:
        if label == NORESPONSE and tokens and tokens[-1][0] == NORESPONSE:
            tokens[-1] = (NORESPONSE, tokens[-1][1] + 1)
        else:
            tokens.append((label, 1))
    n = len(target)
    reach = {0}
    for label, run in tokens:
        nxt: set[int] = set()
        for j in reach:
            if label == NORESPONSE:
                nxt.update(range(j, min(j + run, n) + 1))
            elif j < n and target[j] == label:
                nxt.add(j + 1)
        reach = nxt
        if not reach:
            return False
    return n in reach


def classify_as_change(before: Sequence[str], after: Sequence[str]) -> str | None:
    """``"AS"``, ``"IXP"`` or ``None`` for two consecutive AS paths.

    The first differing position of the responsive-only paths decides: any
    IXP label there means an IXP change, public ASNs on both sides an AS
    change. Differences that silent hops on either side can account for are
    not changes.
    """
    a, b = responsive(before), responsive(after)
    if a == b:
        return None
    if _gaps_explain(collapse(before), b) or _gaps_explain(collapse(after), a):
        return None
    i = 0
    while i < len(a) and i < len(b) and a[i] == b[i]:
        i += 1
    la = a[i] if i < len(a) else None
    lb = b[i] if i < len(b) else None
    if is_ixp(la) or is_ixp(lb):
        return "IXP"
    if is_public_asn(la) and is_public_asn(lb):
        return "AS"
    return None
