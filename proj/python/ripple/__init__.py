"""Variation-aware Chinese text spam detection."""

from ._ripple import (
    Config,
    FormatError,
    Graph,
    IoError,
    MissingArtifact,
    ParseError,
    RippleError,
    Syllable,
    UnknownCharacter,
    ValidationError,
    parse_syllable,
    pinyin_similarity,
    read_manifest,
    run_benchmark,
    run_stage,
    stages,
    stroke_similarity,
    zhengma_similarity,
)

__all__ = [
    "Config",
    "FormatError",
    "Graph",
    "IoError",
    "MissingArtifact",
    "ParseError",
    "RippleError",
    "Syllable",
    "UnknownCharacter",
    "ValidationError",
    "nearest",
    "parse_syllable",
    "pinyin_similarity",
    "read_manifest",
    "run_benchmark",
    "run_pipeline",
    "run_stage",
    "stages",
    "stroke_similarity",
    "zhengma_similarity",
]

_TRAINING = ["build-graph", "walk", "train-vfge", "pretrain-lm", "train", "eval"]


def run_pipeline(config, force=False, **overrides):
    """Run every training stage in order; returns the per-stage results."""
    return [run_stage(s, config, force=force, overrides=_strings(overrides)) for s in _TRAINING]


def nearest(config, character, k=0):
    """Most similar characters as (character, score) pairs."""
    result = run_stage("nearest", config, query=character, k=k)
    ranked = []
    for line in result["report_kv"].splitlines():
        key, _, value = line.partition("=")
        if key.startswith("rank_"):
            char, score = value.rsplit(" ", 1)
            ranked.append((int(key[len("rank_"):]), char, float(score)))
    return [(c, s) for _, c, s in sorted(ranked)]


def _strings(overrides):
    return {k: str(v) for k, v in overrides.items()}
