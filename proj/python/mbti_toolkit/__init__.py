"""Python access to the MBTI corpus-to-classifier toolkit."""

import json

from . import _core
from ._core import (
    MbtiError,
    detect_language,
    function_stack,
    mask_types,
    opposite_type,
    parse_type,
    pipeline_terms,
    project,
    split_sizes,
    stem,
    tokenize,
    version,
)

__all__ = [
    "MbtiError",
    "clean",
    "detect_language",
    "function_stack",
    "label_spaces",
    "mask_types",
    "merge_predictions",
    "opposite_type",
    "parse_type",
    "pipeline_terms",
    "project",
    "run_cli",
    "score_predictions",
    "split_sizes",
    "stem",
    "synth",
    "tokenize",
    "version",
]


def label_spaces():
    return json.loads(_core.label_spaces_json())


def clean(comment, min_length=50, token="[TYPE]"):
    """Cleaned record dict, or the name of the rule that rejected it."""
    out = json.loads(_core.clean_json(json.dumps(comment), min_length, token))
    return out.get("record", out.get("rejected"))


def score_predictions(csv_text):
    return json.loads(_core.score_csv(csv_text))


def merge_predictions(csv_text, space, mode="argmax-map"):
    return _core.merge_csv(csv_text, space, mode)


def synth(distinctiveness=0.5, docs_per_class=100, seed=0):
    return [json.loads(line) for line in _core.synth_jsonl(distinctiveness, docs_per_class, seed).splitlines()]


def run_cli(*args):
    """Runs an `mbti` subcommand in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
