import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarkit.core import (
    Dataset,
    PredictionRecord,
    PredictionSet,
    Sample,
    align,
    read_dataset,
    read_predictions,
    validate_lang,
    write_dataset,
    write_predictions,
)
from polarkit.errors import (
    DataValidationError,
    DuplicateIdError,
    MissingPredictionError,
    ParseError,
    UnknownLanguageError,
)


def _write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def test_read_dataset_preserves_order(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_lines(p, [
        {"id": "a", "lang": "eng", "label": 1, "text": "one", "source": "real"},
        {"id": "b", "lang": "eng", "label": 0, "text": "two", "source": "real"},
        {"id": "c", "lang": "eng", "label": 1, "text": "three", "source": "real"},
    ])
    d = read_dataset(p)
    assert d.ids == ["a", "b", "c"]
    assert d.labels == [1, 0, 1]
    assert d.lang == "eng"


def test_duplicate_id_is_rejected(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_lines(p, [
        {"id": "s1", "lang": "eng", "label": 1, "text": "x"},
        {"id": "s1", "lang": "eng", "label": 0, "text": "y"},
    ])
    with pytest.raises(DuplicateIdError, match="s1"):
        read_dataset(p)


def test_bad_label_reports_line(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_lines(p, [
        {"id": "a", "lang": "eng", "label": 1, "text": "x"},
        {"id": "b", "lang": "eng", "label": 2, "text": "y"},
    ])
    with pytest.raises(ParseError) as info:
        read_dataset(p)
    assert info.value.line == 2


def test_bool_label_is_not_an_int(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_lines(p, [{"id": "a", "lang": "eng", "label": True, "text": "x"}])
    with pytest.raises(ParseError):
        read_dataset(p)


def test_invalid_json_line(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text('{"id": "a", "lang": "eng", "label": 1, "text": "x"}\n{oops\n')
    with pytest.raises(ParseError) as info:
        read_dataset(p)
    assert info.value.line == 2


def test_unknown_language(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_lines(p, [{"id": "a", "lang": "xxx", "label": 1, "text": "x"}])
    with pytest.raises(UnknownLanguageError):
        read_dataset(p)
    # a custom registry admits it
    assert read_dataset(p, registry={"xxx"}).lang == "xxx"


@pytest.mark.parametrize("code", ["EN", "en", "engl", "en1", ""])
def test_language_code_shape(code):
    with pytest.raises(UnknownLanguageError):
        validate_lang(code, registry={code})


def test_sample_invariants():
    with pytest.raises(DataValidationError):
        Sample("a", "eng", "   ", 1)
    with pytest.raises(DataValidationError):
        Sample("a", "eng", "text", 1, source="synthetic")  # no strategy
    with pytest.raises(DataValidationError):
        Sample("a", "eng", "text", 1, source="real", strategy="direct")
    Sample("a", "eng", "text", 1, source="synthetic", strategy="backtranslation")


def test_dataset_rejects_mixed_languages():
    with pytest.raises(DataValidationError):
        Dataset("eng", (Sample("a", "eng", "x", 1), Sample("b", "deu", "y", 0)))


def test_unknown_fields_round_trip(tmp_path):
    p = tmp_path / "d.jsonl"
    row = {"id": "a", "lang": "eng", "label": 1, "text": "x", "source": "synthetic",
           "strategy": "backtranslation", "parent_id": "r1", "pivots": ["eng", "deu"], "note": {"k": 1}}
    _write_lines(p, [row])
    d = read_dataset(p)
    assert d.samples[0].extra == {"pivots": ["eng", "deu"], "note": {"k": 1}}
    out = tmp_path / "o.jsonl"
    write_dataset(d, out)
    assert json.loads(out.read_text()) == row


def test_empty_dataset_round_trip(tmp_path):
    p = tmp_path / "empty.jsonl"
    write_dataset(Dataset("eng", ()), p)
    assert p.read_text() == ""
    assert read_dataset(p, lang="eng") == Dataset("eng", ())


def test_prediction_boundary_values_round_trip(tmp_path):
    ps = PredictionSet("khm", "12B", (PredictionRecord("a", 1.0), PredictionRecord("b", 0.0),
                                      PredictionRecord("c", 0.1 + 0.2)))
    p = tmp_path / "p.jsonl"
    write_predictions(ps, p)
    back = read_predictions(p)
    assert back == ps
    assert [r.prob for r in back.records] == [1.0, 0.0, 0.1 + 0.2]
    assert json.loads(p.read_text().splitlines()[0]) == {"lang": "khm", "model": "12B"}


def test_prediction_file_needs_header(tmp_path):
    p = tmp_path / "p.jsonl"
    _write_lines(p, [{"id": "a", "prob": 0.5}])
    with pytest.raises(ParseError):
        read_predictions(p)


def test_prediction_out_of_range(tmp_path):
    p = tmp_path / "p.jsonl"
    _write_lines(p, [{"lang": "eng", "model": "m"}, {"id": "a", "prob": 1.5}])
    with pytest.raises(ParseError):
        read_predictions(p)


def _ds(labels):
    return Dataset("eng", tuple(Sample(i, "eng", f"text {i}", y) for i, y in labels))


def test_align_direct_join():
    d = _ds([("a", 1), ("b", 0)])
    ps = PredictionSet("eng", "m", (PredictionRecord("b", 0.2), PredictionRecord("a", 0.9)))
    assert align(d, ps).pairs == [(1, 0.9), (0, 0.2)]


def test_align_missing_prediction():
    d = _ds([("a", 1), ("b", 0)])
    ps = PredictionSet("eng", "m", (PredictionRecord("a", 0.9),))
    with pytest.raises(MissingPredictionError) as info:
        align(d, ps)
    assert info.value.missing == ["b"]


def test_align_reports_orphans():
    d = _ds([("a", 1), ("b", 0)])
    ps = PredictionSet("eng", "m", (PredictionRecord("a", 0.9), PredictionRecord("b", 0.1),
                                    PredictionRecord("c", 0.5)))
    result = align(d, ps)
    assert result.orphans == ("c",)
    assert result.pairs == [(1, 0.9), (0, 0.1)]


_text = st.text(min_size=1, max_size=30).filter(lambda t: t.strip())
_sample_rows = st.lists(
    st.tuples(_text, st.integers(0, 1), st.booleans(), st.none() | _text),
    max_size=15,
)


@settings(max_examples=60, deadline=None)
@given(_sample_rows)
def test_dataset_round_trip_property(tmp_path_factory, rows):
    samples = []
    for i, (text, label, synthetic, topic) in enumerate(rows):
        samples.append(Sample(
            id=f"id-{i}", lang="hin", text=text, label=label,
            source="synthetic" if synthetic else "real",
            strategy="paraphrase" if synthetic else None,
            topic=topic, parent_id="p" if synthetic else None,
        ))
    d = Dataset("hin", tuple(samples))
    p = tmp_path_factory.mktemp("rt") / "d.jsonl"
    write_dataset(d, p)
    assert read_dataset(p, lang="hin") == d


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 1.0, allow_nan=False), max_size=20))
def test_predictions_round_trip_property(tmp_path_factory, probs):
    ps = PredictionSet("eng", "27B", tuple(PredictionRecord(f"x{i}", p) for i, p in enumerate(probs)))
    p = tmp_path_factory.mktemp("rt") / "p.jsonl"
    write_predictions(ps, p)
    assert read_predictions(p) == ps
