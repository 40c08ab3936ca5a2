"""Global numeric policy and the package's error taxonomy.

Every tolerance used by the library lives in one NumericPolicy record so a
single override propagates consistently.  Tolerances are relative to a natural
scale of the data wherever one exists; caps are hard limits that turn
impractically large requests into errors instead of silent slowness.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


class KsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(KsError):
    """Input violates a documented precondition or invariant."""


class SingularMatrixError(KsError):
    """A matrix required to be invertible is singular at working precision."""


class RootednessError(KsError):
    """A polynomial expected to be real-rooted is not, within tolerance."""

    def __init__(self, message: str, max_imag: float):
        super().__init__(message)
        self.max_imag = max_imag


class PoleError(ValidationError):
    """Barrier evaluation requested at (or numerically on) a zero of p."""


class CapacityError(KsError):
    """Problem size exceeds a configured enumeration or expansion cap."""


class CapabilityError(KsError):
    """The requested computation is outside the supported problem class."""


class DescentError(KsError):
    """Tree descent found no admissible child; floating-point guard tripped."""


@dataclass(frozen=True)
class NumericPolicy:
    # matrix-level tolerances
    hermitian_rtol: float = 1e-12
    psd_rtol: float = 1e-9
    rank_rtol: float = 1e-9
    singularity_rtol: float = 1e-12
    # polynomial-level tolerances
    real_root_imag_rtol: float = 1e-7
    root_merge_rtol: float = 1e-6
    root_residual_rtol: float = 1e-7
    interlace_rtol: float = 1e-8
    combo_samples: int = 64
    # ensembles and instances
    prob_sum_tol: float = 1e-9
    ensemble_isotropy_tol: float = 1e-9
    instance_isotropy_tol: float = 1e-8
    norm_bound_slack: float = 1e-10
    repair_isotropy_max: float = 1e-4
    # descent / partition / certificates
    tree_sum_rtol: float = 1e-9
    descent_slack: float = 1e-8
    tie_tol: float = 1e-10
    partition_slack: float = 1e-7
    cohen_slack: float = 1e-8
    certificate_slack: float = 1e-9
    probe_tol: float = 1e-7
    pole_tol: float = 1e-12
    fd_step_scale: float = 1e-5
    # capacity caps
    bruteforce_cap: int = 2**20
    subset_cap: int = 2**22
    matrix_cap: int = 24
    enumeration_cap: int = 2**16
    family_cap: int = 2**14
    operator_cap: int = 20

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def merged(self, overrides: dict) -> "NumericPolicy":
        """Return a copy with the given fields replaced.

        Unknown keys are rejected so typos in a policy file do not pass
        silently.
        """
        known = {f.name for f in dataclasses.fields(self)}
        bad = sorted(set(overrides) - known)
        if bad:
            raise ValidationError(f"unknown numeric-policy fields: {bad}")
        return dataclasses.replace(self, **overrides)


DEFAULT_POLICY = NumericPolicy()
