"""Mixed-likelihood Gaussian process latent variable model."""

from ._core import (
    Model,
    NotPositiveDefiniteError,
    Schema,
    SchemaParseError,
    ShapeMismatchError,
    elbo,
    export_latents,
    generate_synthetic,
    impute,
    init_model,
    load_checkpoint,
    log_perplexity,
    make_holdout,
    one_nn_error,
    one_nn_rmse,
    pca_baseline,
    predictive_logprob,
    save_checkpoint,
    train,
)

__all__ = [
    "Model",
    "NotPositiveDefiniteError",
    "Schema",
    "SchemaParseError",
    "ShapeMismatchError",
    "elbo",
    "export_latents",
    "generate_synthetic",
    "impute",
    "init_model",
    "load_checkpoint",
    "log_perplexity",
    "make_holdout",
    "one_nn_error",
    "one_nn_rmse",
    "pca_baseline",
    "predictive_logprob",
    "save_checkpoint",
    "train",
]
