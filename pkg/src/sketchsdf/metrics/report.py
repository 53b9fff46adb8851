"""Evaluation reports: JSON with convention fingerprints, plus CSV export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

# Conventions are pinned here so report numbers are interpretable:
# chamfer = sum of directional means of squared NN distances;
# emd = mean matched (unsquared) distance; sketch-cd = normalized [0,1]
# pixel coordinates, symmetric sum of mean squared distances.
CONVENTIONS = "cd=sum-mean-sq;emd=mean-matched;sketchcd=norm-sq-sum;points=2048"


@dataclass
class MetricEntry:
    metric: str
    value: float
    convention: str = CONVENTIONS
    seeds: Optional[dict] = None
    extractor_id: Optional[str] = None
    solver: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"metric": self.metric, "value": self.value, "convention": self.convention}
        if self.seeds:
            d["seeds"] = self.seeds
        if self.extractor_id:
            d["extractor_id"] = self.extractor_id
        if self.solver:
            d["solver"] = self.solver
        return d


@dataclass
class EvaluationReport:
    protocol: str
    entries: List[MetricEntry] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, metric: str, value: float, **kw) -> None:
        self.entries.append(MetricEntry(metric, float(value), **kw))

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "metrics": [e.to_dict() for e in self.entries],
            "extra": self.extra,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["metric", "value", "convention", "extractor_id", "solver"])
            for e in self.entries:
                writer.writerow(
                    [e.metric, e.value, e.convention, e.extractor_id or "", e.solver or ""]
                )

    @staticmethod
    def from_json(path) -> "EvaluationReport":
        d = json.loads(Path(path).read_text())
        rep = EvaluationReport(protocol=d["protocol"], extra=d.get("extra", {}))
        for e in d["metrics"]:
            rep.add(
                e["metric"], e["value"],
                seeds=e.get("seeds"), extractor_id=e.get("extractor_id"),
                solver=e.get("solver"),
            )
        return rep
