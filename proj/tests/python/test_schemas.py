"""Every --json report of the CLI validates against the shipped schemas."""

import json
import os
import pathlib
import subprocess

import jsonschema
import pytest
from referencing import Registry, Resource

import helpers

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"
DATA = ROOT / "tests" / "data"
BIN = os.environ.get("IDKIT_BIN") or str(ROOT / "build" / "idkit")
STUB = os.environ.get("IDKIT_STUB_EVALUATOR") or str(
    ROOT / "build" / "tests" / "stub_evaluator")

if not os.path.exists(BIN):
    pytest.skip(f"idkit binary not found at {BIN}", allow_module_level=True)


def _registry():
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(p.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
        resources.append((p.name, Resource.from_contents(doc)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(doc, name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(doc)


def run(*args, code=0):
    p = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True,
                       timeout=240)
    assert p.returncode == code, p.stderr
    return p


def run_json(*args):
    return json.loads(run(*args, "--json").stdout)


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("schemas")
    sentences = helpers.synthetic_sentences(300, seed=3)
    helpers.write_conll(d / "corpus.conll", sentences)
    helpers.write_conll(d / "pred.conll", helpers.drop_entities(sentences, 0.3, seed=4))
    return d


def test_all_schemas_are_valid_documents():
    for p in SCHEMAS.glob("*.schema.json"):
        jsonschema.Draft202012Validator.check_schema(json.loads(p.read_text()))


def test_metrics(work):
    validate(run_json("metrics", work / "corpus.conll"), "metrics")
    validate(run_json("metrics", DATA / "composite_3.conll", "--vocab",
                      DATA / "composite_3.vocab"), "metrics")


def test_score_with_external_predictions(work):
    doc = run_json("score", work / "corpus.conll", work / "pred.conll")
    validate(doc, "score")
    assert doc["fp"] == 0 and doc["precision"] == 1.0
    assert 0.5 < doc["recall"] < 0.9


def test_resample_and_manifests(work):
    doc = run_json("resample", work / "corpus.conll", "--count", "6",
                   "--out-dir", work / "subsets")
    validate(doc, "resample")
    for entry in doc["subsets"]:
        validate(json.loads(pathlib.Path(entry["manifest"]).read_text()), "manifest")
    fam = run_json("resample", work / "corpus.conll", "--strategy", "density_family",
                   "--rates", "1,0.5", "--out-dir", work / "family", "--write-conll")
    validate(fam, "resample")


def test_evaluate_correlate_gsa(work):
    # Sparse enough that the stub evaluator's response does not saturate.
    helpers.write_conll(work / "sparse.conll",
                        helpers.synthetic_sentences(300, seed=8, entity_share=0.06))
    run("resample", work / "sparse.conll", "--count", "8", "--out-dir", work / "ev")
    manifests = sorted((work / "ev").glob("subset_*.json"))
    ev = run_json("evaluate", "--corpus", work / "sparse.conll", "--command", STUB,
                  "--out", work / "records.jsonl", *manifests)
    validate(ev, "evaluate")
    validate(run_json("correlate", work / "records.jsonl"), "correlate")
    validate(run_json("gsa", work / "records.jsonl", "--trajectories", "6",
                      "--base-samples", "64", "--bootstrap", "20"), "gsa")
    validate(run_json("gsa", work / "records.jsonl", "--surface", "command",
                      "--command", STUB, "--method", "morris", "--trajectories", "3"),
             "gsa")


def test_asa_file_and_pairs(work):
    arrays = [helpers.softmax_attention(2, 2, 12, seed=i) for i in range(3)]
    helpers.write_atn1(work / "a.atn", arrays)
    doc = run_json("asa", work / "a.atn")
    validate(doc, "asa")
    assert len(doc["tensors"]) == 3
    validate(run_json("asa", work / "a.atn", "--aggregate", "per_layer",
                      "--mode", "full_2d"), "asa")

    pairs = []
    for i in range(3):
        helpers.write_atn1(work / f"p{i}.atn",
                           [helpers.softmax_attention(1, 2, 16, seed=10 + i,
                                                      temperature=0.5 + i)])
        feats = dict.fromkeys(["ned", "norm_std", "redundancy", "ele", "vocab_entropy"],
                              0.1)
        feats.update(ned=0.1 * (i + 1), ssr=1.0)
        (work / f"p{i}.json").write_text(json.dumps({"features": feats}))
        pairs += ["--pair", f"{work / f'p{i}.json'}={work / f'p{i}.atn'}"]
    validate(run_json("asa", *pairs), "asa")
    single = run_json("asa", pairs[0], pairs[1])
    validate(single, "asa")
    assert single["correlation"] is None


def test_wom_run_and_sweeps(work):
    fixture = DATA / "wom_fixture.conll"
    doc = run_json("wom", fixture, "--window-size", "5", "--out", work / "aug.conll")
    validate(doc, "wom")
    assert doc["accepted"] > 0
    validate(run_json("wom", fixture, "--window-size", "5", "--mode", "off"), "wom")
    validate(run_json("wom", fixture, "--sweep-T", "0.03:0.08:0.01"), "wom")
    validate(run_json("wom", fixture, "--sweep-W", "5:20:5"), "wom")


@pytest.mark.parametrize("args,code", [
    (["metrics", "missing.conll"], 2),
    (["frobnicate"], 1),
    (["asa", "--pair", "nonsense"], 1),
])
def test_errors(args, code):
    p = run(*args, code=code)
    line = p.stderr.strip().splitlines()[-1]
    validate(json.loads(line), "error")


def test_correlate_skips_constant_features_only_when_implicit(work):
    doc = run_json("correlate", work / "records.jsonl")
    validate(doc, "correlate")
    listed = [r["feature"] for r in doc["results"]] + doc.get("skipped", [])
    assert sorted(listed) == sorted(["ned", "norm_std", "redundancy", "ele", "ssr",
                                     "vocab_entropy"])
    for name in doc.get("skipped", []):
        run("correlate", work / "records.jsonl", "--feature", name, code=2)


def test_schemas_reject_malformed_reports(work):
    doc = run_json("metrics", work / "corpus.conll")
    del doc["features"]["ned"]
    with pytest.raises(jsonschema.ValidationError):
        validate(doc, "metrics")
    score = run_json("score", work / "corpus.conll", work / "pred.conll")
    score["f1"] = 1.5
    with pytest.raises(jsonschema.ValidationError):
        validate(score, "score")
