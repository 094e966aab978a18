"""Exception taxonomy, one class per failure mode the solver can report."""


class GlatomError(Exception):
    """Base class for all package errors."""


class ValidationError(GlatomError):
    """Bad user input (parameters, config, grids)."""


class TruncationError(GlatomError):
    """Fock cutoff too small for the requested state."""


class InvalidStateError(GlatomError):
    """State vector unusable (zero norm, non-finite entries)."""


class SingularPropagatorError(GlatomError):
    """Disentangling hit a focal singularity at the requested time."""


class NumericRangeError(GlatomError):
    """Overflow / non-finite values despite log-space evaluation."""


class InternalConsistencyError(GlatomError):
    """An invariant the solver relies on was violated (likely a bug)."""


class DegenerateJumpError(GlatomError):
    """Jump annihilated the state at the truncation boundary."""


class EnsembleFailureError(GlatomError):
    """No trajectory in the ensemble completed."""
