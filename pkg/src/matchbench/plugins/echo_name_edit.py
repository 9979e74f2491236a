#!/usr/bin/env python3
"""Reference external matcher: edit-distance name similarity over the wire protocol."""

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
        matches = [{"target": t, "score": s} for s, t in scored[:k] if s > 0.0]
        sys.stdout.write(json.dumps({"source": src["name"], "matches": matches}) + "\n")
    sys.stdout.write(json.dumps({"op": "done"}) + "\n")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
