# SPDX-License-Identifier: Apache-2.0
"""Scan process memory dumps for residual credentials."""

import json

from ._dumpscout import (
    Dump,
    DumpscoutError,
    Matcher,
    count_occurrences,
    decode_candidates,
    encode_text,
    find_occurrences,
)
from . import _dumpscout as _core

__all__ = [
    "Dump",
    "DumpscoutError",
    "Matcher",
    "build_matrix",
    "classify",
    "compile_signatures",
    "count_occurrences",
    "decode_candidates",
    "encode_text",
    "find_occurrences",
    "load_profiles",
    "mine",
    "new_vault",
    "render_matrix",
    "scan",
    "simulate",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def compile_signatures(signatures):
    """Compile a signature set given as a list of dicts or JSON text."""
    return _core.compile_signatures(_text(signatures))


def scan(dump, signatures, threads=1):
    """Return findings as a list of dicts in (region, offset, signature) order."""
    matcher = signatures if isinstance(signatures, Matcher) else compile_signatures(signatures)
    return [json.loads(line) for line in _core.scan_jsonl(dump, matcher, threads).splitlines() if line]


def new_vault(seed, n_entries=4):
    return json.loads(_core.new_vault(seed, n_entries))


def load_profiles(pack):
    """Parse a profile pack given as a path, JSON text or list of dicts."""
    if hasattr(pack, "__fspath__"):
        with open(pack, encoding="utf-8") as fh:
            pack = fh.read()
    return json.loads(_core.profile_pack(_text(pack)))


def simulate(profile, scenario, vault, seed, format="minidump"):
    """Return (dump bytes, truth dict) for one synthetic run."""
    data, truth = _core.simulate(_text(profile), scenario, _text(vault), seed, format)
    return data, json.loads(truth)


def mine(dumps, secrets, context_len=64, min_len=8, max_len=32, window_len=300, id_prefix="mined"):
    """Mine candidate signatures from the contexts around known secrets."""
    return json.loads(
        _core.mine(list(dumps), list(secrets), context_len, min_len, max_len, window_len, id_prefix)
    )


def classify(findings, vault, focus_entry=None):
    lines = "\n".join(json.dumps(f) for f in findings)
    return _core.classify(lines, _text(vault), focus_entry)


def build_matrix(runs, merge=False, format="json"):
    """Aggregate runs into a leak matrix; JSON output is decoded."""
    out = _core.build_matrix(list(runs), merge, format)
    return json.loads(out) if format == "json" else out


def render_matrix(matrix, format="markdown"):
    return _core.render_matrix(_text(matrix), format)
