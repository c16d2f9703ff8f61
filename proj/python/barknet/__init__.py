"""Python bindings for the barknet C++ core."""

from ._core import (
    CLASSES,
    DEFAULT_FRAGMENT_LEN,
    SAMPLE_RATE_HZ,
    BarkError,
    Model,
    classification_report,
    emit_wav,
    fit,
    mfcc,
    parse_wav,
    report_dict,
    resample,
    run_cli,
    segment,
    synth_dataset,
)

__all__ = [
    "CLASSES",
    "DEFAULT_FRAGMENT_LEN",
    "SAMPLE_RATE_HZ",
    "BarkError",
    "Model",
    "classification_report",
    "emit_wav",
    "fit",
    "mfcc",
    "parse_wav",
    "report_dict",
    "resample",
    "run_cli",
    "segment",
    "synth_dataset",
]
