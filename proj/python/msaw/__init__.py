"""Incremental Naive Bayes with multi-source adaptive weighting."""

from ._msaw import (
    Benchmark,
    ConfigError,
    DataError,
    DriftSpec,
    EnsembleState,
    FeatureDef,
    FeatureStat,
    Instance,
    MsawConfig,
    MsawError,
    NaiveBayes,
    Schema,
    SchemaError,
    SeasonDataset,
    auroc,
    delong_test,
    feature_report,
    fit_batch,
    gen,
    generate,
    load_schema,
    load_season_csv,
    msaw_step,
    parse_schema,
    penalty_factor,
    run,
    run_reports,
    static_weights,
)

__all__ = [name for name in dir() if not name.startswith("_")]
