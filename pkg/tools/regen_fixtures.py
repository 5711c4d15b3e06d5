#!/usr/bin/env python3
"""Regenerate the canonical fixture files under fixtures/ from the built-in
model and rule constructors."""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from efmct import fixtures as FX  # noqa: E402
from efmct.documents import serialize_model, serialize_rule  # noqa: E402
from efmct.rules import apply, find_rule_matches  # noqa: E402
from efmct.smt import SolverConfig  # noqa: E402


def main() -> None:
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
    os.makedirs(os.path.join(root, "rules"), exist_ok=True)
    os.makedirs(os.path.join(root, "configs"), exist_ok=True)

    with open(os.path.join(root, "lock-excerpt.model"), "w", encoding="utf-8") as fh:
        fh.write(serialize_model(FX.lock_excerpt()))
    excerpt = FX.lock_excerpt()
    hoist = FX.rule_hoist_attribute()
    match = find_rule_matches(hoist, excerpt)[0]
    hoisted = apply(hoist, match, excerpt, SolverConfig()).result
    with open(os.path.join(root, "lock-excerpt-hoisted.model"), "w", encoding="utf-8") as fh:
        fh.write(serialize_model(hoisted))
    with open(os.path.join(root, "lock-full.model"), "w", encoding="utf-8") as fh:
        fh.write(serialize_model(FX.lock_full()))
    for rule in FX.edit_rules():
        with open(os.path.join(root, "rules", f"{rule.name}.rule"), "w", encoding="utf-8") as fh:
            fh.write(serialize_rule(rule))
    with open(os.path.join(root, "configs", "keycard-msec.json"), "w", encoding="utf-8") as fh:
        json.dump(FX.keycard_only_selection(msec_selected=True), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(root, "configs", "keycard-only.json"), "w", encoding="utf-8") as fh:
        json.dump(FX.keycard_only_selection(msec_selected=False), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"fixtures written under {os.path.normpath(root)}")


if __name__ == "__main__":
    main()
