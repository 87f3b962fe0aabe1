"""Error hierarchy shared by every service module"""
from typing import Any, Optional


class HypStructError(Exception):
    """Base class for all errors raised by hypstructures."""

    def __init__(self, message: str = "", witness: Any = None):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.witness = witness

    def to_record(self) -> dict:
        """Serializable form used by the report stream."""
        record = {"error": self.__class__.__name__, "message": self.message}
        if self.witness is not None:
            record["witness"] = repr(self.witness)
        return record


class ConfigError(HypStructError):
    """Invalid run configuration; carries the offending field."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def to_record(self) -> dict:
        record = super().to_record()
        record["field"] = self.field
        if self.line is not None:
            record["line"] = self.line
        return record


# Geometry
class GeometryError(HypStructError):
    pass


class NonPositiveImaginary(GeometryError):
    pass


class DegenerateMatrix(GeometryError):
    pass


class AsymptoticOrCrossing(GeometryError):
    pass


# Groups
class GroupError(HypStructError):
    pass


class NotAnosov(GroupError):
    pass


class UniverseOverflow(GroupError):
    pass


class CapExceeded(GroupError):
    pass


class EmptySet(GroupError):
    pass


class BallOverflow(GroupError):
    pass


# Actions
class ActionError(HypStructError):
    pass


class UnsupportedCase(ActionError):
    pass


class NotHomomorphism(ActionError):
    pass


class HypothesisFailed(ActionError):
    """Main Lemma hypotheses not met; `clauses` lists the failed ones."""

    def __init__(self, message: str, clauses: Optional[list] = None, witness: Any = None):
        super().__init__(message, witness)
        self.clauses = list(clauses or [])

    def to_record(self) -> dict:
        record = super().to_record()
        record["clauses"] = self.clauses
        return record


class NoFitWithinCap(ActionError):
    pass


# Quasimorphisms
class QuasimorphismError(HypStructError):
    pass


class DefectClaimViolated(QuasimorphismError):
    pass


class NotFixed(QuasimorphismError):
    pass


class NotConverged(QuasimorphismError):
    pass


class PowerNotInSubgroup(QuasimorphismError):
    pass


class NotHomogeneous(QuasimorphismError):
    pass


# Projection complexes
class ProjectionError(HypStructError):
    pass


class MissingProjection(ProjectionError):
    pass


class ResolutionTooCoarse(ProjectionError):
    pass


class DisconnectedInput(ProjectionError):
    pass


# Geodesic families and flip trees
class FamilyError(HypStructError):
    pass


class SaturationFailure(FamilyError):
    pass


class DisjointnessViolation(FamilyError):
    pass


class TooClose(FamilyError):
    pass


class TooFewDomains(FamilyError):
    pass


class ScenarioUnavailable(FamilyError):
    pass


# Posets
class PosetError(HypStructError):
    pass


class WitnessFailed(PosetError):
    pass


class PatternNotFound(PosetError):
    pass
