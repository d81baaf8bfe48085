"""Finite-statistics filter measurements and witness estimation from counts.

Each identical-outcome filter is sampled independently: with a known count
rate, ``trials`` rounds of a filter yield a Binomial(trials, p) number of
coincidences. Lower confidence bounds use Hoeffding's inequality with the
failure probability split evenly over settings; they are this package's own
construction and carry no statistical model beyond independent rounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import IncompleteDataError, ValidationError
from .measurements import EamFrame, MubFamily
from .witness import FamilyDescriptor, WitnessReport, certify, eam_weight, filter_probabilities

PROB_TOL = 1e-10


@dataclass(frozen=True)
class CountRecord:
    setting: int
    outcome: int
    coincidences: int
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.coincidences <= self.trials:
            raise ValidationError(
                f"coincidences {self.coincidences} outside [0, trials={self.trials}]"
            )

    @property
    def key(self) -> tuple[int, int]:
        return (self.setting, self.outcome)


@dataclass(frozen=True)
class EstimateReport:
    point_estimate: float
    standard_error: float
    conservative_value: float
    confidence_level: float
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


def _setting_keys(desc: FamilyDescriptor) -> list[tuple[int, int]]:
    if desc.kind == "mub":
        return [(z, a) for z in range(desc.settings_count) for a in range(desc.dim_local)]
    return [(a, 0) for a in range(desc.settings_count)]


def sample_projections(
    rho, meas: MubFamily | EamFrame, shots_per_setting: int, seed: int
) -> list[CountRecord]:
    """Binomial coincidence counts for every filter at its exact Born probability.

    Each setting draws from its own stream seeded by (seed, setting index),
    so results do not depend on evaluation order.
    """
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be >= 1")
    probs = filter_probabilities(rho, meas)
    if probs.min() < -PROB_TOL or probs.max() > 1 + PROB_TOL:
        raise ValidationError(
            f"Born probability outside [0, 1] ({probs.min():.3e}, {probs.max():.3e}); "
            "state or measurement invalid"
        )
    probs = np.clip(probs, 0.0, 1.0)
    keys = _setting_keys(FamilyDescriptor.of(meas))
    records = []
    for idx, ((setting, outcome), p) in enumerate(zip(keys, probs)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        records.append(
            CountRecord(setting, outcome, int(rng.binomial(shots_per_setting, p)), shots_per_setting)
        )
    return records


def _index_records(records, desc: FamilyDescriptor) -> list[CountRecord]:
    expected = _setting_keys(desc)
    by_key = {}
    for rec in records:
        if rec.key in by_key:
            raise ValidationError(f"duplicate record for setting {rec.key}")
        by_key[rec.key] = rec
    missing = [key for key in expected if key not in by_key]
    if missing:
        raise IncompleteDataError(f"{len(missing)} filter settings have no record", missing)
    extra = set(by_key) - set(expected)
    if extra:
        raise ValidationError(f"records for unknown settings {sorted(extra)}")
    return [by_key[key] for key in expected]


def estimate_witness(records, desc: FamilyDescriptor, confidence_level: float = 0.99) -> EstimateReport:
    """Point estimate, binomial standard error and Hoeffding lower bound of the witness."""
    if not 0 < confidence_level < 1:
        raise ValueError("confidence_level must lie in (0, 1)")
    desc.validate()
    ordered = _index_records(records, desc)
    scale = 1.0 if desc.kind == "mub" else eam_weight(desc.settings_count, desc.dim_local)

    c = np.array([r.coincidences for r in ordered], dtype=float)
    t = np.array([r.trials for r in ordered], dtype=float)
    freq = c / t
    delta_each = (1 - confidence_level) / len(ordered)
    margin = np.sqrt(math.log(1 / delta_each) / (2 * t))

    point = scale * float(np.sum(freq))
    stderr = scale * math.sqrt(float(np.sum(freq * (1 - freq) / t)))
    conservative = scale * float(np.sum(np.clip(freq - margin, 0.0, None)))
    return EstimateReport(
        point_estimate=point,
        standard_error=stderr,
        conservative_value=min(conservative, point),
        confidence_level=confidence_level,
        method="hoeffding",
    )


def estimate_from_correlations(correlations, desc: FamilyDescriptor) -> EstimateReport:
    """Witness value from pre-aggregated probabilities; no uncertainty is available.

    For MUBs each entry is one basis' identical-outcome probability; for
    frames each entry is one filter's probability.
    """
    desc.validate()
    p = np.asarray(correlations, dtype=float)
    if p.ndim != 1 or p.size != desc.settings_count:
        raise IncompleteDataError(
            f"expected {desc.settings_count} correlation values, got {p.size}",
            range(p.size, desc.settings_count),
        )
    scale = 1.0 if desc.kind == "mub" else eam_weight(desc.settings_count, desc.dim_local)
    value = scale * float(np.sum(p))
    return EstimateReport(value, 0.0, value, float("nan"), "reported-correlations")


@dataclass(frozen=True)
class CountCertification:
    estimate: EstimateReport
    certificate: WitnessReport
    point_certificate: WitnessReport

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate.to_dict(),
            "certificate": self.certificate.to_dict(),
            "point_certificate": self.point_certificate.to_dict(),
        }


def certify_from_counts(records, desc: FamilyDescriptor, confidence_level: float = 0.99) -> CountCertification:
    est = estimate_witness(records, desc, confidence_level)
    return CountCertification(est, certify(est.conservative_value, desc), certify(est.point_estimate, desc))


def certify_from_estimate(est: EstimateReport, desc: FamilyDescriptor) -> CountCertification:
    return CountCertification(est, certify(est.conservative_value, desc), certify(est.point_estimate, desc))


# -- counts file ------------------------------------------------------------


@dataclass(frozen=True)
class CountsData:
    descriptor: FamilyDescriptor
    records: list | None = None
    correlations: list | None = None

    def estimate(self, confidence_level: float = 0.99) -> EstimateReport:
        if self.records is not None:
            return estimate_witness(self.records, self.descriptor, confidence_level)
        return estimate_from_correlations(self.correlations, self.descriptor)

    def certify(self, confidence_level: float = 0.99) -> CountCertification:
        return certify_from_estimate(self.estimate(confidence_level), self.descriptor)


_TOP_KEYS = {"dimension", "kind", "settings", "records", "correlations", "description"}
_RECORD_KEYS = {"setting", "outcome", "coincidences", "trials"}


def counts_from_dict(data) -> CountsData:
    """Parse the counts schema; raises ValidationError on any schema violation."""
    if not isinstance(data, dict):
        raise ValidationError("counts file must hold a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown keys in counts file: {sorted(unknown)}")
    try:
        desc = FamilyDescriptor(str(data["kind"]), int(data["dimension"]), int(data["settings"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"counts file missing or malformed field: {exc}") from exc
    if desc.kind not in ("mub", "eam"):
        raise ValidationError(f"kind must be 'mub' or 'eam', got {desc.kind!r}")
    has_rec, has_corr = "records" in data, "correlations" in data
    if has_rec == has_corr:
        raise ValidationError("counts file needs exactly one of 'records' or 'correlations'")
    if has_corr:
        corr = data["correlations"]
        if not isinstance(corr, list) or not all(isinstance(x, (int, float)) for x in corr):
            raise ValidationError("'correlations' must be a list of numbers")
        return CountsData(desc, correlations=[float(x) for x in corr])
    records = []
    for raw in data["records"]:
        if not isinstance(raw, dict) or set(raw) - _RECORD_KEYS:
            raise ValidationError(f"malformed record {raw!r}")
        try:
            records.append(
                CountRecord(
                    int(raw["setting"]),
                    int(raw.get("outcome", 0)),
                    int(raw["coincidences"]),
                    int(raw["trials"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed record {raw!r}: {exc}") from exc
    return CountsData(desc, records=records)


def counts_to_dict(desc: FamilyDescriptor, records) -> dict:
    return {
        "dimension": desc.dim_local,
        "kind": desc.kind,
        "settings": desc.settings_count,
        "records": [
            {"setting": r.setting, "outcome": r.outcome, "coincidences": r.coincidences, "trials": r.trials}
            for r in records
        ],
    }


def load_counts(path) -> CountsData:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"counts file is not valid JSON: {exc}") from exc
    return counts_from_dict(data)
