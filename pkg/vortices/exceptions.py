"""
Error hierarchy for the simulator.

Errors caused by bad input derive from Django's ValidationError so that forms,
management commands and library callers can treat them alike. Numerical
failures derive from NumericalError. The runner maps the two families onto
exit codes 2 and 3.
"""

from django.core.exceptions import ValidationError


class VortexError(Exception):
    """Base class for every simulator error."""


class InputError(VortexError, ValidationError):
    """Arguments or configuration outside the documented domain."""


class NumericalError(VortexError):
    """A computation produced an unusable result."""


# ==============================================================================
# Input errors
# ==============================================================================

class SingularKernelError(InputError):
    """Kernel evaluated at coincident points with no desingularization."""


class KernelConfigError(InputError):
    """Invalid kernel normalization, core or truncation radius."""


class MollifierDomainError(InputError):
    """Mollifier requested with R < 2h or h <= 0."""


class EmptyEnsembleError(InputError):
    """Diagnostic undefined on an ensemble with no blobs."""


class CoincidentBlobsError(InputError):
    """Two blobs share a position while the kernel is singular."""


class InvalidStateError(InputError):
    """Malformed flow state (shapes, negative time or viscosity, bad cores)."""


class OutOfGridError(InputError):
    """Rasterization grid does not cover every blob."""


class ScheduleError(InputError):
    """Diagnostics schedule not strictly increasing or outside the run window."""


class InvalidPatchError(InputError):
    """Initial patch violates non-negativity, compact support or positivity of mass."""


class StepConfigError(InputError):
    """Invalid time-step configuration."""


class EnvelopeDomainError(InputError):
    """Envelope parameters or evaluation time outside their valid range."""


class PlanDomainError(InputError):
    """Iteration plan parameters outside their valid range."""


class SupportViolationError(InputError):
    """Initial support reaches into the region the iteration needs to be empty."""


class ConfigError(InputError):
    """Run configuration failed validation."""


class CheckpointError(InputError):
    """Checkpoint cannot be resumed (schema mismatch or refused parameter change)."""


# ==============================================================================
# Numerical errors
# ==============================================================================

class NonFiniteVelocityError(NumericalError):
    """Velocity evaluation produced NaN or infinity."""

    def __init__(self, indices):
        self.indices = [int(i) for i in indices]
        shown = ', '.join(str(i) for i in self.indices[:10])
        more = '' if len(self.indices) <= 10 else f' (+{len(self.indices) - 10} more)'
        super().__init__(f'non-finite velocity at blob indices {shown}{more}')


class StepCountTooSmallError(NumericalError):
    """Halving the step changed the integrated value beyond tolerance."""


class InsufficientSamplesError(NumericalError):
    """Too few samples (or too short a time span) for a growth-exponent fit."""
