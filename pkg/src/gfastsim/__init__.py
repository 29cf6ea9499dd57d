"""Per-tone simulator for the G.fast upstream under far-end crosstalk.

The package provides a synthetic (or CSV-imported) FEXT channel model,
QAM modulation with max-log soft demapping, a rate-1/2 turbo code,
adaptive continuous and binary differential-evolution optimizers, the
multi-user detectors and channel estimators built on them, the outer
turbo loop that exchanges virtual pilots between estimator and detector,
and an experiment harness with a CSV-emitting command line front end.
"""

from gfastsim import (
    channel,
    de_continuous,
    de_discrete,
    detectors,
    estimation,
    fec,
    harness,
    modem,
    turbo_engine,
)

__version__ = "0.1.0"

__all__ = [
    "channel",
    "modem",
    "fec",
    "de_continuous",
    "de_discrete",
    "detectors",
    "estimation",
    "turbo_engine",
    "harness",
    "__version__",
]
