import json
import math
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from src.harness.spec import ExperimentSpec
from src.utils.helpers import ROW_COLUMNS, SUMMARY_COLUMNS


def rows_frame(rows: list) -> pd.DataFrame:
    """
    Row records as a frame in the fixed column order, sorted by
    (beta, trial, observable) so output does not depend on worker timing
    """
    frame = pd.DataFrame(rows, columns=ROW_COLUMNS)
    frame = frame.astype(
        {"beta": float, "trial": int, "seed": int, "observable": str, "value": float, "censored": bool}
    )
    return frame.sort_values(["beta", "trial", "observable"], kind="stable").reset_index(drop=True)


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """
    Per (beta, observable) statistics over the uncensored rows, with the
    number of censored rows alongside
    """
    records = []
    for (beta, observable), group in rows.groupby(["beta", "observable"], sort=True):
        values = group.loc[~group["censored"], "value"]
        median = float(values.median()) if len(values) else math.nan
        records.append(
            {
                "beta": beta,
                "observable": observable,
                "mean": float(values.mean()) if len(values) else math.nan,
                "median": median,
                "count": int(len(values)),
                "censored": int(group["censored"].sum()),
                "log_median_over_beta": math.log(median) / beta if median > 0 else math.nan,
            }
        )
    return pd.DataFrame(records, columns=SUMMARY_COLUMNS)


def _plain(value):
    # numpy scalars inside rows and metadata
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class ExperimentResult:
    rows: pd.DataFrame
    spec: ExperimentSpec | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: list, spec: ExperimentSpec | None = None, meta: dict | None = None):
        return cls(rows_frame(rows), spec, meta or {})

    @property
    def summary(self) -> pd.DataFrame:
        return summarize(self.rows)

    @property
    def censored(self) -> int:
        return int(self.rows["censored"].sum())

    def observable(self, name: str) -> pd.DataFrame:
        return self.rows[self.rows["observable"] == name]

    def to_csv(self, path: str) -> None:
        self.rows.to_csv(path, index=False)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict() if self.spec is not None else None,
            "rows": self.rows.to_dict(orient="records"),
            "summary": self.summary.replace({np.nan: None}).to_dict(orient="records"),
            "meta": self.meta,
        }

    def to_json(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, default=_plain)

    @classmethod
    def from_csv(cls, path: str) -> "ExperimentResult":
        frame = pd.read_csv(path)
        return cls(rows_frame(frame.to_dict(orient="records")))
