"""Exception types shared across the package."""


class SdeBridgeError(Exception):
    """Base class for all errors raised by this package."""


class EvaluationError(SdeBridgeError):
    """A drift/diffusion evaluation produced a non-finite value."""

    def __init__(self, message, x=None, params=None):
        super().__init__(message)
        self.x = x
        self.params = params


class ExplosionError(SdeBridgeError):
    """The simulated state left the admissible region."""

    def __init__(self, step, value=None):
        super().__init__(f"simulated path exploded at step {step}")
        self.step = step
        self.value = value


class SingularDiffusionError(SdeBridgeError):
    """sigma sigma' is (numerically) singular at some observation."""

    def __init__(self, index, message=None):
        super().__init__(message or f"singular diffusion matrix at observation {index}")
        self.index = index


class DegenerateSeriesError(SdeBridgeError):
    """A statistic was requested on a constant (zero-variance) series."""


class CsvParseError(SdeBridgeError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TuningError(SdeBridgeError):
    """The tuning-parameter search could not produce a single valid fit."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class RunError(SdeBridgeError):
    """A Monte Carlo run failed at the run level (too many bad replicates)."""
