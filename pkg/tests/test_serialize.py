import json
import warnings

import numpy as np
import pytest

import lstree as ls
from lstree.model_core import LOCATION, SCALE
from lstree.render import export_dot
from lstree.serialize import document_to_model, dumps_model, model_to_document


@pytest.fixture(scope="module")
def fitted():
    spec = ls.SimSpec(
        n=500, thresholds=(-1.0, 1.0),
        location="1.4 * I(x1 <= 0)",
        covariates=("x1:uniform:2", "x2:uniform:2"),
        seed=21,
    )
    data = ls.simulate_dataset(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        model, report = ls.build(data, ls.BuildOptions(n_permutations=99, seed=3))
    assert model.structure.location_splits, "fixture expects at least one split"
    return data, model, report


def awkward_model():
    """Hand-built model with floats that stress the round-trip."""
    s = (
        ls.TreeStructure()
        .with_split(ls.Split(LOCATION, 1, 0, 0.1 + 0.2, increment=1 / 3))
        .with_split(ls.Split(SCALE, 1, 1, -1e-7, increment=-0.1234567890123456))
    )
    params = ls.ModelParams(
        thresholds=np.array([-1.0000000000000002, 1e-9, 17.5]),
        location_increments=np.array([1 / 3]),
        scale_increments=np.array([-0.1234567890123456]),
    )
    return ls.FittedModel(
        structure=s, params=params, link=ls.LOGIT,
        loglik=-123.45678901234567, n_obs=40, k=4,
        specs=(ls.VariableSpec("a", "metric", 0), ls.VariableSpec("b", "metric", 1)),
    )


class TestRoundTrip:
    def test_fitted_model_full(self, fitted, tmp_path):
        _, model, report = fitted
        path = tmp_path / "model.json"
        ls.write_model(model, path)
        back = ls.read_model(path)
        assert back.structure == model.structure
        np.testing.assert_array_equal(back.params.thresholds, model.params.thresholds)
        assert back.loglik == model.loglik
        assert back.specs == model.specs
        assert back.link is model.link
        assert back.trace.stop_reason == report.stop_reason
        assert back.trace.final_loglik == report.final_loglik
        assert len(back.trace.steps) == len(report.steps)
        for a, b in zip(back.trace.steps, report.steps):
            assert (a.lr_stat, a.p_value, a.permutation_seed) == (
                b.lr_stat, b.p_value, b.permutation_seed,
            )

    def test_exact_float_round_trip(self, tmp_path):
        model = awkward_model()
        path = tmp_path / "awkward.json"
        ls.write_model(model, path)
        back = ls.read_model(path)
        np.testing.assert_array_equal(back.params.thresholds, model.params.thresholds)
        for orig, rt in zip(
            model.structure.location_splits + model.structure.scale_splits,
            back.structure.location_splits + back.structure.scale_splits,
        ):
            assert rt.threshold == orig.threshold
            assert rt.increment == orig.increment
        assert back.loglik == model.loglik

    def test_predictions_identical(self, fitted, tmp_path):
        data, model, _ = fitted
        path = tmp_path / "m.json"
        ls.write_model(model, path)
        back = ls.read_model(path)
        p0, l0, s0 = ls.predict(model, data)
        p1, l1, s1 = ls.predict(back, data)
        np.testing.assert_array_equal(p0, p1)
        np.testing.assert_array_equal(l0, l1)
        np.testing.assert_array_equal(s0, s1)

    def test_nan_loglik_after_round_trips(self, fitted, tmp_path):
        _, model, report = fitted
        assert np.isnan(report.steps[-1].loglik_after)
        path = tmp_path / "m.json"
        ls.write_model(model, path)
        back = ls.read_model(path)
        assert np.isnan(back.trace.steps[-1].loglik_after)


class TestCanonicalForm:
    def test_byte_stable(self, fitted):
        _, model, _ = fitted
        assert dumps_model(model) == dumps_model(model)

    def test_sorted_keys_and_trailing_newline(self, fitted):
        _, model, _ = fitted
        text = dumps_model(model)
        assert text.endswith("\n")
        doc = json.loads(text)
        assert doc["schema_version"] == "1"
        assert list(doc) == sorted(doc)

    def test_document_is_plain_json(self, fitted):
        _, model, _ = fitted
        json.dumps(model_to_document(model))


class TestSchemaErrors:
    def test_wrong_version(self):
        with pytest.raises(ls.SchemaError, match="schema_version"):
            document_to_model({"schema_version": "99"})

    def test_not_a_dict(self):
        with pytest.raises(ls.SchemaError):
            document_to_model([1, 2, 3])

    def test_missing_field(self, fitted):
        _, model, _ = fitted
        doc = model_to_document(model)
        del doc["thresholds"]
        with pytest.raises(ls.SchemaError, match="malformed"):
            document_to_model(doc)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ls.SchemaError, match="not valid JSON"):
            ls.read_model(path)


class TestDotExport:
    def test_structure_and_labels(self, fitted):
        _, model, _ = fitted
        dot = export_dot(model, LOCATION)
        assert dot.startswith("digraph location_tree {")
        assert dot.rstrip().endswith("}")
        assert "x1 <=" in dot
        assert "beta = " in dot
        # one node line per tree node, one edge pair per split
        n_splits = len(model.structure.location_splits)
        assert dot.count("->") == 2 * n_splits

    def test_scale_tree_uses_gamma(self, fitted):
        _, model, _ = fitted
        dot = export_dot(model, SCALE)
        assert "digraph scale_tree" in dot
        assert "gamma = " in dot

    def test_terminal_sizes_present(self, fitted):
        data, model, _ = fitted
        dot = export_dot(model, LOCATION)
        sizes = [
            int(part.split("\\nn = ")[1].split('"')[0])
            for part in dot.splitlines()
            if "\\nn = " in part
        ]
        assert sum(sizes) == data.n

    def test_effects_sum_along_path(self):
        model = awkward_model()
        dot = export_dot(model, LOCATION)
        assert f'beta = {1 / 3:.3f}' in dot
        assert "beta = 0.000" in dot

    def test_write_dot(self, fitted, tmp_path):
        _, model, _ = fitted
        path = tmp_path / "tree.dot"
        ls.write_dot(model, LOCATION, path)
        assert path.read_text(encoding="utf-8") == export_dot(model, LOCATION)
