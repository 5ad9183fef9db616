"""Footprint corpus generation, rendering, QA export and evaluation."""

import json

from . import _core
from ._core import PadkitError, __version__, count_errors, parse_prediction, question

__all__ = [
    "PadkitError",
    "__version__",
    "answer_text",
    "build_conversation",
    "build_manifest",
    "canonical_answers",
    "canonical_predictions",
    "count_errors",
    "evaluate",
    "export_kicad",
    "generate",
    "import_eda_xml",
    "layout_iou",
    "parse_prediction",
    "question",
    "render_overlay",
    "render_svg",
]


def _text(geometry):
    return geometry if isinstance(geometry, str) else json.dumps(geometry)


def render_svg(geometry, **options):
    return _core.render_svg(_text(geometry), **options)


def render_overlay(pred, truth):
    return _core.render_overlay(_text(pred), _text(truth))


def layout_iou(pred, truth):
    return _core.layout_iou(_text(pred), _text(truth))


def canonical_answers(geometry):
    return _core.canonical_answers(_text(geometry))


def answer_text(geometry, task):
    return _core.answer_text(_text(geometry), task)


def build_conversation(geometry, image, strategy="S1", source="synthetic"):
    """Conversation samples as JSONL lines."""
    return _core.build_conversation(_text(geometry), image, strategy, source)


def export_kicad(geometry, name):
    return _core.export_kicad(_text(geometry), name)


def generate(count, seed=0, spec=None, threads=1):
    """Sampled footprints as geometry dicts."""
    spec_text = None if spec is None else _text(spec)
    return [json.loads(g) for g in _core.sample_corpus(count, seed, spec_text, threads)]


def build_manifest(synthetic, real_world, strategy, seed=0):
    return json.loads(_core.build_manifest(list(synthetic), list(real_world), strategy, seed))


def canonical_predictions(geometry):
    return [json.loads(line) for line in _core.canonical_predictions(_text(geometry))]


def evaluate(truths, predictions, matching="index", threads=1, seed=0):
    """Score predictions (records or JSONL text) against truth geometries.

    Returns (report dict, list of per-sample dicts, text table).
    """
    if not isinstance(predictions, str):
        predictions = "".join(json.dumps(p) + "\n" for p in predictions)
    report, samples, table = _core.evaluate(
        [_text(t) for t in truths], predictions, matching, threads, seed
    )
    return json.loads(report), [json.loads(s) for s in samples.splitlines()], table


def import_eda_xml(text, source_id=""):
    geometry, warnings = _core.import_eda_xml(text, source_id)
    return json.loads(geometry), warnings
