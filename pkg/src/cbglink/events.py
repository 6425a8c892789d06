"""Line-delimited event log shared by the simulator and the KPI module.

One JSON object per line, keys sorted for byte-stable output.  Record
types:

  meta      scheme, seed, load, cells, n_prb, slot_ms, pdb_ms, horizon_ms
  arrival   t_ms, ue, pkt, bits
  tx        slot, cell, ue, hid, attempt, first, mcs, n_prb, cbg_ok
  slot      slot, cell, used, avail            (downlink-capable slots)
  delivery  t_ms, ue, pkt
  drop      t_ms, ue, pkt
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, List


def dumps_event(event: dict) -> str:
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


def write_events(events: Iterable[dict], path) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(dumps_event(event))
            fh.write("\n")


def read_events(path) -> List[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def iter_type(events: Iterable[dict], kind: str) -> Iterator[dict]:
    return (e for e in events if e["type"] == kind)
