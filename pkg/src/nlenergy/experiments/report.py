"""Common report container for the R-sweep experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    R_list: list
    measured: list
    predicted_exponent: Optional[float]
    fitted_exponent: Optional[float]
    fitted_stderr: Optional[float]
    passed: bool
    tolerance: float
    rows: list = field(default_factory=list)     # one dict per R (raw measurements)
    notes: list = field(default_factory=list)
    complete: bool = True

    @property
    def verdict(self) -> str:
        if not self.complete:
            return "incomplete"
        return "pass" if self.passed else "fail"

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        keys = list(self.rows[0].keys())
        lines = [",".join(keys)]
        lines += [",".join(fmt(r[k]) for k in keys) for r in self.rows]
        return "\n".join(lines) + "\n"

    def curve(self) -> str:
        """Two-column (R, measured) data for plotting."""
        return "".join(f"{fmt(float(r))} {fmt(float(m))}\n" for r, m in zip(self.R_list, self.measured))

    def verdict_text(self) -> str:
        lines = [f"experiment: {self.experiment}"]
        lines += [f"{k}: {fmt(v)}" for k, v in self.params.items()]
        lines.append("R_list: " + " ".join(fmt(float(r)) for r in self.R_list))
        if self.predicted_exponent is not None:
            lines.append(f"predicted: {fmt(float(self.predicted_exponent))}")
        if self.fitted_exponent is not None:
            lines.append(f"fitted: {fmt(float(self.fitted_exponent))} +- {fmt(float(self.fitted_stderr or 0.0))}")
        lines.append(f"tolerance: {fmt(float(self.tolerance))}")
        lines += [f"note: {n}" for n in self.notes]
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"
