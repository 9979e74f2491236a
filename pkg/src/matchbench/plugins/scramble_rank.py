#!/usr/bin/env python3
"""Diagnostic external matcher: keeps name_edit's shortlist but scrambles its order.

Finds the same top-k targets as the edit-distance matcher, then reorders them
by a deterministic hash, so recall stays comparable while ranks (and MRR)
degrade. Useful as a fixture for the ranking-quality diagnostics.
"""

import hashlib
import json
import sys

from matchbench.textutil import canonical, edit_similarity


def main() -> None:
    request = json.loads(sys.stdin.readline())
    k = request["k"]
    targets = [t["name"] for t in request["target"]]
    for src in request["source"]:
        scored = [(edit_similarity(canonical(src["name"]), canonical(t)), t) for t in targets]
        scored.sort(key=lambda st: (-st[0], st[1]))
        shortlist = [t for s, t in scored[:k] if s > 0.0]
        shortlist.sort(
            key=lambda t: hashlib.md5(f"{src['name']}::{t}".encode()).hexdigest()
        )
        matches = [
            {"target": t, "score": round(1.0 - i / (len(shortlist) + 1.0), 6)}
            for i, t in enumerate(shortlist)
        ]
        sys.stdout.write(json.dumps({"source": src["name"], "matches": matches}) + "\n")
    sys.stdout.write(json.dumps({"op": "done"}) + "\n")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
