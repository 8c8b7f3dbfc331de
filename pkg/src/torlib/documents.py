"""Action documents: the JSON interchange format of the CLI.

A document is a single JSON object with a mandatory integer ``version``
field (currently 1) and either a linear action

    {"version": 1, "p": 2, "q": 3, "generators": [[[...]], ...]}

or an affine action, which adds ``symbols`` (the ordered pool) and
``translations`` (one vector of {"rat": ..., "sym": {...}} entries per
generator).  Documents are validated on load; loaders raise
DocumentError with a message naming the offending field.
"""

from __future__ import annotations

import json
from pathlib import Path

from .action_model import AffineZpAction, ZpAction

FORMAT_VERSION = 1


class DocumentError(ValueError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DocumentError(msg)


def parse_action_document(data: dict) -> ZpAction | AffineZpAction:
    _require(isinstance(data, dict), "document must be a JSON object")
    _require("version" in data, "missing 'version' field")
    _require(data["version"] == FORMAT_VERSION,
             f"unsupported version {data['version']!r}")
    for field in ("p", "q", "generators"):
        _require(field in data, f"missing '{field}' field")
    p, q = data["p"], data["q"]
    _require(isinstance(p, int) and p >= 1, "'p' must be a positive integer")
    _require(isinstance(q, int) and q >= 1, "'q' must be a positive integer")
    gens = data["generators"]
    _require(isinstance(gens, list) and len(gens) == p,
             f"'generators' must list exactly p = {p} matrices")
    for i, g in enumerate(gens):
        _require(isinstance(g, list) and len(g) == q and
                 all(isinstance(row, list) and len(row) == q for row in g),
                 f"generator {i} must be a {q}x{q} nested array")
        _require(all(isinstance(x, int) for row in g for x in row),
                 f"generator {i} must have integer entries")
    affine = "translations" in data or "symbols" in data
    if not affine:
        action = ZpAction.from_json(data)
    else:
        _require("translations" in data, "affine document missing 'translations'")
        trans = data["translations"]
        _require(isinstance(trans, list) and len(trans) == p,
                 f"'translations' must list exactly p = {p} vectors")
        for i, t in enumerate(trans):
            _require(isinstance(t, list) and len(t) == q,
                     f"translation {i} must have length q = {q}")
        try:
            action = AffineZpAction.from_json(data)
        except Exception as exc:
            raise DocumentError(f"bad translation data: {exc}") from exc
    violations = action.validate()
    _require(not violations, "invalid action: " + "; ".join(violations))
    return action


def load_action_document(path: str | Path) -> ZpAction | AffineZpAction:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON in {path}: {exc}") from exc
    return parse_action_document(data)


def dump_action_document(action: ZpAction | AffineZpAction) -> dict:
    data = action.to_json()
    data["version"] = FORMAT_VERSION
    return data


def save_action_document(action: ZpAction | AffineZpAction,
                         path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(dump_action_document(action), fh, indent=2)
        fh.write("\n")
