"""Psychometric scoring: trait profile, usability score, competency fit.

Everything here is pure arithmetic on already-validated answers. Input
vectors arrive in ask order (1-based question positions map to 0-based
sequence indices).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

if TYPE_CHECKING:
    from .catalog import Catalogs


class ScoringError(ValueError):
    """Bad scoring input; code is COUNT, RANGE, or NORMS_MISMATCH."""

    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(f"{code}: {message}")


TRAITS: tuple[str, ...] = (
    "extraversion",
    "agreeableness",
    "conscientiousness",
    "emotional_stability",
    "openness",
)

# trait -> (directly scored item, reverse scored item), 1-based positions
DEFAULT_TIPI_KEY: dict[str, tuple[int, int]] = {
    "extraversion": (1, 6),
    "agreeableness": (7, 2),
    "conscientiousness": (3, 8),
    "emotional_stability": (9, 4),
    "openness": (5, 10),
}

TraitKey = Mapping[str, tuple[int, int]]


def reverse_item(value: int, scale_max: int) -> int:
    """Mirror a rating on a 1..scale_max scale: 1 <-> scale_max, etc."""
    if not 1 <= value <= scale_max:
        raise ScoringError("RANGE", f"value {value} outside 1..{scale_max}")
    return scale_max + 1 - value


@dataclass(frozen=True)
class BigFiveProfile:
    extraversion: float
    agreeableness: float
    conscientiousness: float
    emotional_stability: float
    openness: float

    def as_dict(self) -> dict[str, float]:
        return {trait: getattr(self, trait) for trait in TRAITS}


def score_tipi(
    answers: Sequence[int],
    key: TraitKey = DEFAULT_TIPI_KEY,
    scale_max: int = 7,
) -> BigFiveProfile:
    """Score a ten-item personality questionnaire.

    Each trait is the mean of one direct item and one reverse-scored item,
    so scores land on a half-point grid inside [1, scale_max].
    """
    if len(answers) != 10:
        raise ScoringError("COUNT", f"expected 10 answers, got {len(answers)}")
    for position, value in enumerate(answers, start=1):
        if not 1 <= value <= scale_max:
            raise ScoringError("RANGE", f"answer {position} = {value} outside 1..{scale_max}")
    scores = {}
    for trait in TRAITS:
        direct, reversed_ = key[trait]
        direct_value = answers[direct - 1]
        reversed_value = reverse_item(answers[reversed_ - 1], scale_max)
        scores[trait] = (direct_value + reversed_value) / 2
    return BigFiveProfile(**scores)


SUS_BENCHMARK = 68.0


@dataclass(frozen=True)
class SusScore:
    score: float
    above_benchmark: bool
    benchmark: float = SUS_BENCHMARK


def sus_points(position: int, value: int) -> int:
    """Per-item score contribution: 0..4.

    Odd positions are positively worded (value - 1), even positions are
    negatively worded (5 - value).
    """
    if not 1 <= value <= 5:
        raise ScoringError("RANGE", f"answer {position} = {value} outside 1..5")
    if position % 2 == 1:
        return value - 1
    return 5 - value


def score_sus(answers: Sequence[int], benchmark: float = SUS_BENCHMARK) -> SusScore:
    """Score the ten-item usability questionnaire onto 0..100."""
    if len(answers) != 10:
        raise ScoringError("COUNT", f"expected 10 answers, got {len(answers)}")
    total = sum(sus_points(position, value) for position, value in enumerate(answers, start=1))
    score = total * 2.5
    return SusScore(score=score, above_benchmark=score > benchmark, benchmark=benchmark)


class Band(enum.Enum):
    """Where a score sits relative to a reference value."""

    BELOW = "below"
    NEAR = "near"
    ABOVE = "above"


def classify(value: float, reference: float, halfwidth: float) -> Band:
    """Band a value against reference +/- halfwidth (inclusive edges are NEAR)."""
    if halfwidth < 0:
        raise ValueError("halfwidth must be >= 0")
    if value < reference - halfwidth:
        return Band.BELOW
    if value > reference + halfwidth:
        return Band.ABOVE
    return Band.NEAR


@dataclass(frozen=True)
class NormTable:
    """Reference means, spreads, and the NEAR band halfwidth factor."""

    trait_means: Mapping[str, float]
    trait_sds: Mapping[str, float]
    competency_means: tuple[float, ...]
    band_factor: float = 0.5
    competency_sd: float = 1.0

    def trait_band(self, trait: str, score: float) -> Band:
        halfwidth = self.band_factor * self.trait_sds[trait]
        return classify(score, self.trait_means[trait], halfwidth)


@dataclass(frozen=True)
class CompetencyFitReport:
    """Per-item answer, reference mean, delta, and band."""

    answers: tuple[int, ...]
    reference_means: tuple[float, ...]
    deltas: tuple[float, ...]
    bands: tuple[Band, ...]

    def positions(self, band: Band) -> tuple[int, ...]:
        """1-based item positions that landed in the given band."""
        return tuple(i for i, b in enumerate(self.bands, start=1) if b is band)


def score_competency_fit(answers: Sequence[int], norms: NormTable) -> CompetencyFitReport:
    """Compare per-item answers with reference means.

    delta = answer - reference mean; an item is NEAR when |delta| is at most
    band_factor * competency_sd, BELOW/ABOVE outside that.
    """
    if len(answers) != len(norms.competency_means):
        raise ScoringError(
            "NORMS_MISMATCH",
            f"{len(answers)} answers against {len(norms.competency_means)} reference means",
        )
    for position, value in enumerate(answers, start=1):
        if not 1 <= value <= 5:
            raise ScoringError("RANGE", f"answer {position} = {value} outside 1..5")
    halfwidth = norms.band_factor * norms.competency_sd
    deltas = tuple(
        float(answer) - reference
        for answer, reference in zip(answers, norms.competency_means)
    )
    bands = tuple(classify(delta, 0.0, halfwidth) for delta in deltas)
    return CompetencyFitReport(
        answers=tuple(answers),
        reference_means=norms.competency_means,
        deltas=deltas,
        bands=bands,
    )


def trait_bands(profile: BigFiveProfile, norms: NormTable) -> dict[str, Band]:
    return {trait: norms.trait_band(trait, score) for trait, score in profile.as_dict().items()}


def feedback_keys(profile: BigFiveProfile, norms: NormTable) -> list[str]:
    """Catalog keys for one banded statement per trait, in trait order."""
    return [
        f"feedback.tipi.{trait}.{norms.trait_band(trait, score).value}"
        for trait, score in profile.as_dict().items()
    ]


def make_feedback(
    profile: BigFiveProfile, norms: NormTable, locale: str, catalogs: "Catalogs"
) -> list[str]:
    """Localized banded statement per trait (statements only, no questions)."""
    return [catalogs.resolve(locale, key) for key in feedback_keys(profile, norms)]
