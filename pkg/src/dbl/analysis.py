"""Rating records, per-subject PLD extraction, and descriptive summaries.

A subject's preferred loudness difference on an item is the LD of the
highest-rated condition; rating ties average the tied LDs. Summaries are
descriptive only: medians (mean of middle two) and linearly interpolated
quartiles, per item, class, and subject.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyInputError,
    IncompleteRatingsError,
    MissingItemCoverageError,
    OutOfRangeError,
)

EXPERT = "expert"
NON_EXPERT = "non_expert"
RATINGS_CSV_COLUMNS = ("subject_id", "experience", "item_id", "condition_index", "ld_lu", "rating")


@dataclass(frozen=True)
class RatingRecord:
    subject_id: str
    experience: str
    item_id: str
    ratings: tuple  # one rating in [0, 100] per condition index

    def __post_init__(self):
        if self.experience not in (EXPERT, NON_EXPERT):
            raise ValueError(f"experience must be expert|non_expert, got {self.experience!r}")


@dataclass(frozen=True)
class PldRecord:
    subject_id: str
    item_id: str
    pld: float
    tie_count: int


def extract_pld(record: RatingRecord, condition_lds) -> PldRecord:
    """PLD of one record: LD of the top rating, mean of LDs on ties.

    condition_lds supplies the LD per condition index; pass nominal grid
    values or projection-measured LDs, whichever the study reports.
    """
    lds = [float(x) for x in condition_lds]
    ratings = record.ratings
    if len(ratings) != len(lds) or any(r is None for r in ratings):
        raise IncompleteRatingsError(
            f"{record.subject_id}/{record.item_id}: expected {len(lds)} ratings, "
            f"got {len(ratings)}"
        )
    values = [float(r) for r in ratings]
    if any(not 0.0 <= r <= 100.0 for r in values):
        raise OutOfRangeError(f"{record.subject_id}/{record.item_id}: rating outside [0, 100]")
    top = max(values)
    tied = [ld for ld, r in zip(lds, values) if r == top]
    return PldRecord(
        subject_id=record.subject_id,
        item_id=record.item_id,
        pld=float(np.mean(tied)),
        tie_count=len(tied),
    )


def _quartiles(values) -> dict:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])  # linear interpolation
    return {
        "n": int(arr.size),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "iqr": float(q3 - q1),
    }


@dataclass(frozen=True)
class SummaryTables:
    per_item: dict
    per_class: dict
    per_subject: dict
    average_subject_iqr: float
    quantile_convention: str = "linear-interpolation"

    def to_json_dict(self) -> dict:
        return {
            "schema": "dbl-summary/1",
            "quantile_convention": self.quantile_convention,
            "per_item": self.per_item,
            "per_class": self.per_class,
            "per_subject": self.per_subject,
            "average_subject_iqr_lu": self.average_subject_iqr,
        }


def summarize(
    records,
    item_class: dict | None = None,
    subject_experience: dict | None = None,
    experience: str | None = None,
) -> SummaryTables:
    """Medians and IQRs per item, class, and subject.

    experience restricts the summary to subjects with that label (needs
    subject_experience). The headline spread number is the mean of the
    per-subject IQRs across items.
    """
    records = list(records)
    if experience is not None:
        if subject_experience is None:
            raise ValueError("experience filter needs a subject_experience mapping")
        records = [r for r in records if subject_experience.get(r.subject_id) == experience]
    if not records:
        raise EmptyInputError("no records to summarize")

    by_item: dict = {}
    by_subject: dict = {}
    for r in records:
        by_item.setdefault(r.item_id, []).append(r.pld)
        by_subject.setdefault(r.subject_id, []).append(r.pld)

    per_item = {item: _quartiles(v) for item, v in sorted(by_item.items())}
    per_subject = {subj: _quartiles(v) for subj, v in sorted(by_subject.items())}
    average_subject_iqr = float(np.mean([t["iqr"] for t in per_subject.values()]))

    per_class: dict = {}
    if item_class:
        by_class: dict = {}
        for r in records:
            cls = item_class.get(r.item_id)
            if cls is not None:
                by_class.setdefault(cls, []).append(r.pld)
        per_class = {cls: _quartiles(v) for cls, v in sorted(by_class.items())}

    return SummaryTables(
        per_item=per_item,
        per_class=per_class,
        per_subject=per_subject,
        average_subject_iqr=average_subject_iqr,
    )


def ground_truth_medians(
    records,
    subject_experience: dict,
    experience: str = NON_EXPERT,
    expected_items=None,
) -> dict:
    """Per-item median PLD over subjects passing the experience filter."""
    by_item: dict = {}
    for r in records:
        if subject_experience.get(r.subject_id) == experience:
            by_item.setdefault(r.item_id, []).append(r.pld)
    if expected_items is not None:
        missing = [i for i in expected_items if i not in by_item]
        if missing:
            raise MissingItemCoverageError(
                f"no {experience} ratings for items: {', '.join(sorted(missing))}"
            )
    return {item: float(np.median(v)) for item, v in sorted(by_item.items())}


def boxplot_data(records, item_class: dict) -> dict:
    """Per-class quartiles and 1.5 IQR whiskers for external plotting."""
    by_class: dict = {}
    for r in records:
        cls = item_class.get(r.item_id)
        if cls is not None:
            by_class.setdefault(cls, []).append(r.pld)
    out = {}
    for cls, values in sorted(by_class.items()):
        q = _quartiles(values)
        arr = np.asarray(values, dtype=float)
        lo_fence = q["q1"] - 1.5 * q["iqr"]
        hi_fence = q["q3"] + 1.5 * q["iqr"]
        inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
        q["whisker_low"] = float(np.min(inside))
        q["whisker_high"] = float(np.max(inside))
        q["outliers"] = [float(x) for x in arr[(arr < lo_fence) | (arr > hi_fence)]]
        out[cls] = q
    return {"schema": "dbl-boxplot/1", "per_class": out}


# ---------------------------------------------------------------------------
# Ratings CSV: subject_id,experience,item_id,condition_index,ld_lu,rating


def read_ratings_csv(path: str | Path):
    """Load rating rows grouped into RatingRecords.

    Returns (records, item_condition_lds) where item_condition_lds maps
    item_id to the per-condition LD list shared by all subjects.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RATINGS_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            rows.append(row)

    item_lds: dict = {}
    grouped: dict = {}
    for row in rows:
        item = row["item_id"]
        idx = int(row["condition_index"])
        ld = float(row["ld_lu"])
        item_lds.setdefault(item, {})
        if idx in item_lds[item] and item_lds[item][idx] != ld:
            raise ValueError(f"{path}: conflicting ld_lu for {item} condition {idx}")
        item_lds[item][idx] = ld
        key = (row["subject_id"], row["experience"], item)
        grouped.setdefault(key, {})[idx] = float(row["rating"])

    item_condition_lds = {}
    for item, lds in item_lds.items():
        n = len(lds)
        if sorted(lds) != list(range(n)):
            raise ValueError(f"{path}: condition indices for {item} are not 0..{n - 1}")
        item_condition_lds[item] = [lds[i] for i in range(n)]

    records = []
    for (subject, experience, item), ratings in grouped.items():
        n = len(item_condition_lds[item])
        records.append(
            RatingRecord(
                subject_id=subject,
                experience=experience,
                item_id=item,
                ratings=tuple(ratings.get(i) for i in range(n)),
            )
        )
    return records, item_condition_lds


def write_ratings_csv(path: str | Path, records, item_condition_lds) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RATINGS_CSV_COLUMNS)
        for r in records:
            lds = item_condition_lds[r.item_id]
            for idx, (ld, rating) in enumerate(zip(lds, r.ratings)):
                writer.writerow([r.subject_id, r.experience, r.item_id, idx, ld, rating])


def subject_experience_map(records) -> dict:
    return {r.subject_id: r.experience for r in records}


def plds_from_records(records, item_condition_lds) -> list:
    return [extract_pld(r, item_condition_lds[r.item_id]) for r in records]


def write_summary_json(path: str | Path, tables: SummaryTables) -> None:
    Path(path).write_text(json.dumps(tables.to_json_dict(), sort_keys=True, indent=2) + "\n")
