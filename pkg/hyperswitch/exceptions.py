"""Custom exceptions for the hyperswitch toolkit."""


class HyperswitchError(Exception):
    """Base exception for the toolkit."""

    pass


class ConfigurationError(HyperswitchError):
    """Exception raised for unresolvable scenario or configuration references."""

    pass


# Model construction


class ModelError(HyperswitchError):
    """Base exception for system-description problems."""

    pass


class NotHyperbolic(ModelError):
    """Transport matrix has complex, defective or (near) zero eigenvalues."""

    pass


class BoundaryNotReducible(ModelError):
    """Boundary matrices do not determine the incoming characteristics."""

    pass


class BadPartition(ModelError):
    """Sign pattern of the characteristic velocities disagrees with m."""

    pass


class DimensionMismatch(ModelError):
    """Array shapes do not agree with the declared state dimension."""

    pass


# Numerics


class NumericalError(HyperswitchError):
    """Base exception for numerical kernels."""

    pass


class NoConvergence(NumericalError):
    """Iterative kernel exhausted its budget."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


# Certification


class CertificationError(HyperswitchError):
    """Base exception for certificate search and checks."""

    pass


class Infeasible(CertificationError):
    """No certificate found; carries the best margin reached."""

    def __init__(self, message: str, best_margin: float = float("-inf")):
        self.best_margin = best_margin
        super().__init__(f"{message} (best margin {best_margin:.3e})")


class StructuralInfeasible(CertificationError):
    """Equality couplings leave no admissible positive weights."""

    pass


class KernelMismatch(CertificationError):
    """Weight matrices have incompatible kernels, so no finite gamma exists."""

    pass


class VariantPreconditionViolated(CertificationError):
    """The system does not have the structure the requested variant needs."""

    pass


class CommutationViolated(CertificationError):
    """Weights do not commute with the characteristic velocities."""

    pass


class WrongSignStructure(CertificationError):
    """Operation requires a different sign partition (e.g. m = 0)."""

    pass


class CertificateMismatch(CertificationError):
    """Certificate dimensions or mode count disagree with the system."""

    pass


# Simulation


class SimulationError(HyperswitchError):
    """Base exception for the simulator."""

    pass


class CFLViolation(SimulationError):
    """Time step exceeds the stability limit of the upwind scheme."""

    pass


class DegenerateWindow(SimulationError):
    """Too few samples to fit a decay rate."""

    pass
