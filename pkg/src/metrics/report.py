"""Flat metric rows and their CSV form."""

from typing import List, Union

from pydantic import BaseModel, Field

from ..core.files import PathLike, atomic_write_csv

HEADER = ("metric", "kind", "severity", "value")
SUMMARY = "*"


class MetricRow(BaseModel):
    metric: str
    kind: str = Field(default=SUMMARY)
    severity: Union[int, str] = Field(default=SUMMARY)
    value: float


class MetricReport(BaseModel):
    """Rows in insertion order; ``kind='*'`` marks summary rows."""

    rows: List[MetricRow] = Field(default_factory=list)

    def add(
        self,
        metric: str,
        value: float,
        kind: str = SUMMARY,
        severity: Union[int, str] = SUMMARY,
    ):
        self.rows.append(
            MetricRow(metric=metric, kind=kind, severity=severity, value=float(value))
        )
        return self

    def get(
        self, metric: str, kind: str = SUMMARY, severity: Union[int, str] = SUMMARY
    ) -> float:
        for row in self.rows:
            if (row.metric, row.kind, row.severity) == (metric, kind, severity):
                return row.value
        raise KeyError(f"{metric}/{kind}/{severity}")

    def write_csv(self, path: PathLike):
        return atomic_write_csv(
            path, HEADER, ([r.metric, r.kind, r.severity, r.value] for r in self.rows)
        )
