import numpy as np
import pytest

from biomatch import (
    FeatureTemplate,
    LoadError,
    TemplateSet,
    l1_normalize,
    load_templates,
    save_templates,
    split_folds,
)

from conftest import make_set, make_template, set_to_rows, synthetic_set, write_jsonl


def test_load_jsonl_well_formed(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [
        ("A", "S1", "real", "fc", [1, 2, 3, 4]),
        ("B", "S1", "real", "fc", [0, 1, 0, 1]),
        ("A", "S2", "real", "fc", [2, 2, 2, 2]),
    ])
    ts = load_templates(path)
    assert len(ts) == 3
    assert ts.dimension == 4
    assert ts.subject_roster == {"A", "B"}


def test_load_csv_well_formed(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(
        "subject,session,source,layer,f0,f1\n"
        "A,S1,real,fc,1.5,2.5\n"
        "B,S2,real,fc,0.25,0.75\n",
        encoding="utf-8",
    )
    ts = load_templates(path)
    assert len(ts) == 2
    assert ts.dimension == 2
    assert ts.templates[0].features.tolist() == [1.5, 2.5]


def test_load_is_bom_tolerant(tmp_path):
    jsonl = tmp_path / "bom.jsonl"
    jsonl.write_bytes(
        b"\xef\xbb\xbf"
        b'{"subject": "A", "session": "S1", "source": "real", "layer": "fc", '
        b'"features": [1, 2]}\n'
    )
    assert len(load_templates(jsonl)) == 1
    csvf = tmp_path / "bom.csv"
    csvf.write_bytes(b"\xef\xbb\xbfsubject,session,source,layer,f0\nA,S1,real,fc,1\n")
    assert load_templates(csvf).dimension == 1


def test_dimension_mismatch_names_offending_record(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [
        ("A", "S1", "real", "fc", [1, 2, 3, 4]),
        ("B", "S1", "real", "fc", [1, 2, 3, 4, 5]),
        ("C", "S1", "real", "fc", [1, 2, 3, 4]),
    ])
    with pytest.raises(LoadError, match="record 2") as exc:
        load_templates(path)
    assert "5" in str(exc.value) and "4" in str(exc.value)


def test_non_finite_value_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(
        '{"subject": "A", "session": "S1", "source": "real", "layer": "fc", '
        '"features": [1, NaN]}\n',
        encoding="utf-8",
    )
    with pytest.raises(LoadError, match="record 1"):
        load_templates(path)


def test_negative_value_rejected_by_default(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [("A", "S1", "real", "fc", [0.5, -0.3])])
    with pytest.raises(LoadError, match="negative"):
        load_templates(path)


def test_negative_value_clamped_when_requested(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [("A", "S1", "real", "fc", [0.5, -0.3])])
    ts = load_templates(path, clamp=True)
    assert ts.templates[0].features.tolist() == [0.5, 0.0]
    assert ts.clamp_warnings == 1


def test_duplicate_key_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [
        ("A", "S1", "real", "fc", [1, 2]),
        ("A", "S1", "real", "fc", [3, 4]),
    ])
    with pytest.raises(LoadError, match="duplicate key"):
        load_templates(path)


def test_mixed_layer_file_loads_with_per_layer_dimensions(tmp_path):
    # fc and score templates differ in dimension by nature and may share a file
    path = tmp_path / "mixed.jsonl"
    write_jsonl(path, [
        ("A", "S1", "img1", "fc", [1, 2, 3, 4]),
        ("A", "S1", "img1", "score", [0.2, 0.8]),
        ("B", "S2", "img2", "fc", [4, 3, 2, 1]),
        ("B", "S2", "img2", "score", [0.9, 0.1]),
    ])
    ts = load_templates(path)
    assert len(ts) == 4
    assert ts.filter(layer="fc").dimension == 4
    assert ts.filter(layer="score").dimension == 2
    with pytest.raises(ValueError, match="filter by layer"):
        ts.dimension


def test_mixed_layer_per_layer_dimension_still_enforced(tmp_path):
    path = tmp_path / "mixed.jsonl"
    write_jsonl(path, [
        ("A", "S1", "img1", "fc", [1, 2, 3, 4]),
        ("A", "S1", "img1", "score", [0.2, 0.8]),
        ("B", "S2", "img2", "score", [0.5, 0.3, 0.2]),
    ])
    with pytest.raises(LoadError, match=r"record 3.*layer 'score'"):
        load_templates(path)


def test_mixed_layer_round_trip(tmp_path):
    path = tmp_path / "mixed.jsonl"
    write_jsonl(path, [
        ("A", "S1", "img1", "fc", [1.25, 2.5]),
        ("A", "S1", "img1", "score", [0.125, 0.5, 0.375]),
    ])
    ts = load_templates(path)
    again = tmp_path / "again.jsonl"
    save_templates(ts, again)
    assert load_templates(again) == ts


def test_same_subject_session_different_source_ok(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [
        ("A", "S1", "real", "fc", [1, 2]),
        ("A", "S1", "synthesized", "fc", [3, 4]),
    ])
    assert len(load_templates(path)) == 2


def test_bad_layer_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [("A", "S1", "real", "embedding", [1, 2])])
    with pytest.raises(LoadError, match="layer"):
        load_templates(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text("", encoding="utf-8")
    with pytest.raises(LoadError, match="no template records"):
        load_templates(path)


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_round_trip_is_idempotent(tmp_path, rng, fmt):
    ts = synthetic_set(rng, ["A", "B", "C"], ["S1", "S2"], dim=7)
    first = tmp_path / f"first.{fmt}"
    second = tmp_path / f"second.{fmt}"
    save_templates(ts, first, fmt)
    loaded = load_templates(first, fmt)
    save_templates(loaded, second, fmt)
    reloaded = load_templates(second, fmt)
    assert loaded == reloaded
    assert first.read_bytes() == second.read_bytes()


def test_template_validation():
    with pytest.raises(ValueError, match="negative"):
        make_template("A", "S1", [-1.0, 2.0])
    with pytest.raises(ValueError, match="non-finite"):
        make_template("A", "S1", [np.inf, 2.0])
    with pytest.raises(ValueError):
        make_template("A", "S1", [])
    t = make_template("A", "S1", [1.0, 2.0])
    with pytest.raises(ValueError):
        t.features[0] = 9.0  # read-only after construction


def test_set_rejects_mixed_dimensions():
    with pytest.raises(ValueError, match="record 2"):
        make_set([("A", "S1", [1, 2]), ("B", "S1", [1, 2, 3])])


def test_l1_normalize_examples():
    cases = [
        ([2.0, 2.0, 0.0], [0.5, 0.5, 0.0]),
        ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        ([3.0, 1.0], [0.75, 0.25]),
    ]
    for raw, expected in cases:
        out = l1_normalize(make_template("A", "S1", raw))
        assert out.features.tolist() == pytest.approx(expected, abs=1e-12)


def test_l1_normalize_properties(rng):
    for _ in range(200):
        feats = rng.uniform(0.0, 5.0, size=17)
        feats[0] = 1e-3  # keep at least one positive entry
        t = make_template("A", "S1", feats)
        n1 = l1_normalize(t)
        assert abs(float(n1.features.sum()) - 1.0) <= 1e-12
        assert int(np.argmax(n1.features)) == int(np.argmax(t.features))
        n2 = l1_normalize(n1)
        assert np.all(np.abs(n2.features - n1.features) <= 1e-12)


def test_l1_normalize_rejects_all_zero():
    with pytest.raises(ValueError, match="all-zero"):
        l1_normalize(make_template("A", "S1", [0.0, 0.0]))


def test_split_folds_four_sessions(rng):
    ts = synthetic_set(rng, ["A", "B"], ["S1", "S2", "S3", "S4"], dim=3)
    folds = split_folds(ts)
    assert len(folds) == 4
    for k, fold in enumerate(folds, start=1):
        assert fold.fold_id == k
        assert fold.test_session == f"S{k}"
        assert fold.train_sessions == {f"S{j}" for j in range(1, 5) if j != k}
        assert fold.test_session not in fold.train_sessions


def test_split_folds_two_sessions(rng):
    ts = synthetic_set(rng, ["A"], ["A-sess", "B-sess"], dim=2)
    folds = split_folds(ts)
    assert [f.test_session for f in folds] == ["A-sess", "B-sess"]


def test_split_folds_is_a_partition(rng):
    ts = synthetic_set(rng, ["A", "B", "C"], ["u", "v", "w", "x", "y"], dim=2)
    folds = split_folds(ts)
    assert sorted(f.test_session for f in folds) == list(ts.sessions)
    for fold in folds:
        assert fold.train_sessions | {fold.test_session} == set(ts.sessions)


def test_split_folds_single_session_fails(rng):
    ts = synthetic_set(rng, ["A", "B"], ["S1"], dim=2)
    with pytest.raises(ValueError, match=">= 2 sessions"):
        split_folds(ts)


def test_filter(rng):
    ts = synthetic_set(rng, ["A", "B"], ["S1", "S2"], dim=3)
    sub = ts.filter(sessions={"S1"})
    assert all(t.session_id == "S1" for t in sub)
    with pytest.raises(ValueError, match="no templates left"):
        ts.filter(layer="score")


def test_set_equality_ignores_clamp_tally(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [("A", "S1", "real", "fc", [0.5, -0.3])])
    clamped = load_templates(path, clamp=True)
    clean = TemplateSet.from_templates(list(clamped.templates))
    assert clamped == clean
