import numpy as np
import pytest

import mlgplvm as mg

SCHEMA = "g0:gaussian\ng1:gaussian\nb0:bernoulli\nc0:categorical:3\np0:poisson\n"


@pytest.fixture(scope="module")
def schema():
    return mg.Schema.parse(SCHEMA)


@pytest.fixture(scope="module")
def dataset(schema):
    values, mask, latents = mg.generate_synthetic(schema, 30, 2, seed=7)
    return values, mask, latents


def test_schema_parse(schema):
    assert schema.num_columns == 5
    assert schema.column_names == ["g0", "g1", "b0", "c0", "p0"]
    with pytest.raises(mg.SchemaParseError):
        mg.Schema.parse("bad-line-without-colon\n")


def test_synthetic_shapes_and_determinism(schema, dataset):
    values, mask, latents = dataset
    assert values.shape == (30, 5)
    assert mask.shape == (30, 5)
    assert latents.shape == (30, 2)
    v2, _, l2 = mg.generate_synthetic(schema, 30, 2, seed=7)
    np.testing.assert_array_equal(values, v2)
    np.testing.assert_array_equal(latents, l2)


def test_train_improves_elbo(schema, dataset):
    values, mask, _ = dataset
    model = mg.init_model(schema, 30, 2, 5, seed=1)
    before = mg.elbo(model, values, samples=20, seed=3)["value"]
    result = mg.train(model, values, max_steps=150, mc_samples=2, lr=5e-3, seed=1)
    assert result["steps"] == 150
    after = mg.elbo(model, values, samples=20, seed=3)["value"]
    assert after > before


def test_latents_and_metrics(schema, dataset):
    values, _, _ = dataset
    model = mg.init_model(schema, 30, 3, 5, seed=2)
    emb = mg.export_latents(model)
    assert emb["means"].shape == (30, 3)
    assert emb["variances"].shape == (30, 3)
    assert sorted(emb["order"]) == [0, 1, 2]

    labels = ["a" if i % 2 else "b" for i in range(30)]
    err = mg.one_nn_error(emb["means"][:, :2], labels)
    assert 0 <= err <= 30
    proj = mg.pca_baseline(values, 2)
    assert proj.shape == (30, 2)


def test_holdout_and_predictive(schema, dataset):
    values, mask, _ = dataset
    held, new_mask = mg.make_holdout(values, mask, fraction=0.3, attrs=2, seed=5)
    assert len(held) > 0
    for row, col, val in held:
        assert new_mask[row, col] == 0.0
        assert values[row, col] == val

    model = mg.init_model(schema, 30, 2, 5, seed=4)
    mg.train(model, values, new_mask, max_steps=50, mc_samples=2, seed=4)
    res = mg.predictive_logprob(model, held, mode="mc", samples=30, seed=9)
    assert len(res["per_entry"]) == len(held)
    assert np.isfinite(res["total"])
    preds = mg.impute(model, held, mode="mean", samples=30, seed=9)
    assert len(preds) == len(held)
    bits = mg.log_perplexity(model, held, samples=30, seed=9)
    assert bits >= 0.0


def test_checkpoint_roundtrip(tmp_path, schema):
    model = mg.init_model(schema, 10, 2, 4, seed=11)
    path = str(tmp_path / "ckpt.txt")
    mg.save_checkpoint(path, model, step=5, seed=11)
    back = mg.load_checkpoint(path)
    np.testing.assert_array_equal(model.x_mean, back.x_mean)
    np.testing.assert_array_equal(model.inducing_inputs, back.inducing_inputs)
    assert back.n_points == 10 and back.latent_dim == 2 and back.num_inducing == 4


def test_shape_errors():
    with pytest.raises(mg.ShapeMismatchError):
        mg.one_nn_rmse(np.zeros((3,)), [1.0, 2.0, 3.0])
