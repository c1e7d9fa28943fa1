"""Report types shared by the criteria and the oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS = "PASS"
FAIL = "FAIL"
INAPPLICABLE = "INAPPLICABLE"
INCONCLUSIVE = "INCONCLUSIVE"
STATUSES = (PASS, FAIL, INAPPLICABLE, INCONCLUSIVE)


@dataclass(frozen=True)
class ViolationCertificate:
    """A cell whose signed value is negative beyond its error bar.

    ``index`` names the cell inside its criterion, e.g. ``{"k": 3}`` or
    ``{"n": 1, "condition": "1.6"}``; ``y`` is ``None`` where no axis point
    applies.  ``extra`` carries oracle payloads (point sets, eigenvalues).
    """

    criterion: str
    index: dict[str, Any]
    y: float | None
    observed: float
    error_bound: float
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.observed + self.error_bound


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    status: str
    certificates: tuple[ViolationCertificate, ...] = ()
    cells_evaluated: int = 0
    cells_inconclusive: int = 0
    worst_margin: float | None = None
    completeness: dict[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.status == FAIL) != bool(self.certificates):
            raise ValueError("FAIL if and only if there is a certificate")
        if self.status == PASS and self.cells_inconclusive:
            raise ValueError("PASS with inconclusive cells")
        if self.status == INCONCLUSIVE and not self.cells_inconclusive:
            raise ValueError("INCONCLUSIVE without an inconclusive cell")


def inapplicable(criterion: str, reason: str, **completeness) -> CriterionReport:
    return CriterionReport(criterion, INAPPLICABLE, completeness=completeness, notes=(reason,))


def finish(
    criterion: str,
    certificates,
    evaluated: int,
    inconclusive: int,
    worst_margin: float | None,
    completeness: dict | None = None,
    notes=(),
) -> CriterionReport:
    """Derive the status from the certificates and the cell counts."""
    certificates = tuple(certificates)
    if certificates:
        status = FAIL
    elif inconclusive:
        status = INCONCLUSIVE
    else:
        status = PASS
    return CriterionReport(
        criterion, status, certificates, evaluated, inconclusive, worst_margin,
        dict(completeness or {}), tuple(notes),
    )
