import json
import zlib

import numpy as np
import pytest

from biomatch import FeatureTemplate, TemplateSet


def make_template(subject, session, features, source="real", layer="fc"):
    return FeatureTemplate(subject, session, source, layer, np.asarray(features, float))


def make_set(rows):
    """rows: iterable of (subject, session, features[, source[, layer]])."""
    return TemplateSet.from_templates([make_template(*r) for r in rows])


def synthetic_set(rng, subjects, sessions, dim, noise=0.05, source="real", layer="fc"):
    """Separable fixture: one non-negative archetype per subject plus noise.

    The archetype is seeded from the subject name, so the same subject
    carries the same signature across independently generated sets (probe
    vs gallery vs validation files match up).
    """
    templates = []
    for subject in subjects:
        seed = zlib.crc32(subject.encode("utf-8"))
        archetype = np.random.default_rng(seed).uniform(0.2, 1.0, size=dim)
        for session in sessions:
            feats = np.abs(archetype + rng.normal(0.0, noise, size=dim))
            templates.append(FeatureTemplate(subject, session, source, layer, feats))
    return TemplateSet.from_templates(templates)


def write_jsonl(path, rows):
    """rows: iterable of (subject, session, source, layer, features)."""
    with open(path, "w", encoding="utf-8") as fh:
        for subject, session, source, layer, features in rows:
            fh.write(json.dumps({
                "subject": subject, "session": session, "source": source,
                "layer": layer, "features": [float(x) for x in features],
            }) + "\n")


def set_to_rows(ts):
    return [
        (t.subject_id, t.session_id, t.source_tag, t.layer_tag, t.features)
        for t in ts
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20190806)
