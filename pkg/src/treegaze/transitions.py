"""Word-to-word gaze transitions classified by syntactic role.

Each step of a gaze path links two distinct words; the step type is one of
HH, HN, NH, NN according to the head/nonhead roles of its endpoints. Gaze
probabilities are averaged per sentence across participants and compared
against the deterministic serial-text baseline with Welch's t-test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats
from .corpus import ROLE_HEAD, Sentence, roles
from .errors import DataError
from .gaze import GazeSequence, text_sequence

TRANSITION_TYPES = ("HH", "HN", "NH", "NN")

DISTRIBUTION_COLUMNS = ("sentence_id", "condition", "type", "probability", "n_transitions")


@dataclass(frozen=True)
class TransitionDistribution:
    p_hh: float
    p_hn: float
    p_nh: float
    p_nn: float
    n_transitions: int

    def probability(self, transition_type: str) -> float:
        return {
            "HH": self.p_hh,
            "HN": self.p_hn,
            "NH": self.p_nh,
            "NN": self.p_nn,
        }[transition_type]


@dataclass(frozen=True)
class WelchComparison:
    """Welch test between per-sentence baseline (a) and gaze (b) values."""

    t: float
    df: float
    p_two_tailed: float
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float


def classify_transition(role_from: str, role_to: str) -> str:
    a = "H" if role_from == ROLE_HEAD else "N"
    b = "H" if role_to == ROLE_HEAD else "N"
    return a + b


def transition_distribution(path, role_map: dict[int, str]) -> TransitionDistribution:
    """Count consecutive-pair types along a path and normalize by len(path) - 1."""
    path = list(path)
    if len(path) < 2:
        raise DataError("a transition distribution needs a path of at least 2 fixated words")
    counts = {t: 0 for t in TRANSITION_TYPES}
    for a, b in zip(path, path[1:]):
        counts[classify_transition(role_map[a], role_map[b])] += 1
    n = len(path) - 1
    return TransitionDistribution(
        p_hh=counts["HH"] / n,
        p_hn=counts["HN"] / n,
        p_nh=counts["NH"] / n,
        p_nn=counts["NN"] / n,
        n_transitions=n,
    )


def sentence_condition_value(distributions, transition_type: str) -> float:
    """Participant mean of one transition type's probability for a sentence."""
    values = [d.probability(transition_type) for d in distributions]
    if not values:
        raise DataError("no participant distributions to average")
    return sum(values) / len(values)


def compare_conditions(baseline_values, gaze_values) -> WelchComparison:
    """Welch t-test of per-sentence values, baseline minus gaze."""
    a = np.asarray(baseline_values, dtype=float)
    b = np.asarray(gaze_values, dtype=float)
    result = stats.welch_t(a, b)
    return WelchComparison(
        t=result.t,
        df=result.df,
        p_two_tailed=result.p_two_tailed,
        mean_a=float(a.mean()),
        sd_a=float(a.std(ddof=1)),
        mean_b=float(b.mean()),
        sd_b=float(b.std(ddof=1)),
    )


def baseline_distribution(sentence: Sentence) -> TransitionDistribution:
    """Transition distribution of the serial text order (same for all readers)."""
    return transition_distribution(text_sequence(sentence), roles(sentence))


@dataclass(frozen=True)
class TransitionAnalysis:
    rows: list[tuple]                           # DISTRIBUTION_COLUMNS rows
    tests: dict[str, WelchComparison | None]    # None when the comparison is undefined
    baseline_values: dict[str, list[float]]     # type -> per-sentence values
    gaze_values: dict[str, list[float]]


def analyze_transitions(
    sentences: list[Sentence],
    sequences: dict[str, dict[str, GazeSequence]],
) -> TransitionAnalysis:
    """Run the full baseline-vs-gaze comparison over a parsed corpus.

    Sentences shorter than two tokens have no transitions and are skipped;
    a participant contributes to a sentence only when their collapsed path
    has at least two entries. Gaze rows report the participant-mean
    probability and the summed transition count.
    """
    rows: list[tuple] = []
    baseline_values: dict[str, list[float]] = {t: [] for t in TRANSITION_TYPES}
    gaze_values: dict[str, list[float]] = {t: [] for t in TRANSITION_TYPES}

    for sentence in sentences:
        if len(sentence) < 2:
            continue
        role_map = roles(sentence)
        base = baseline_distribution(sentence)
        for t in TRANSITION_TYPES:
            rows.append((sentence.id, "baseline", t, base.probability(t), base.n_transitions))
            baseline_values[t].append(base.probability(t))

        per_participant = [
            transition_distribution(seq.path, role_map)
            for seq in sequences.get(sentence.id, {}).values()
            if len(seq.path) >= 2
        ]
        if not per_participant:
            continue
        total_transitions = sum(d.n_transitions for d in per_participant)
        for t in TRANSITION_TYPES:
            value = sentence_condition_value(per_participant, t)
            rows.append((sentence.id, "gaze", t, value, total_transitions))
            gaze_values[t].append(value)

    tests: dict[str, WelchComparison | None] = {}
    for t in TRANSITION_TYPES:
        try:
            tests[t] = compare_conditions(baseline_values[t], gaze_values[t])
        except ValueError:
            # fewer than 2 sentences in a condition, or no variance anywhere
            tests[t] = None
    return TransitionAnalysis(
        rows=rows, tests=tests, baseline_values=baseline_values, gaze_values=gaze_values
    )
