"""Fixation logs and gaze-ordered word sequences.

Fixations shorter than the duration floor (default 100 ms) are dropped at
load time. A gaze sequence is the onset-ordered list of fixated word indices
with consecutive refixations of the same word collapsed to a single entry,
so every step of the path is a transition between two distinct words.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .corpus import Sentence
from .errors import DataError

FIXATION_COLUMNS = ("participant", "sentence_id", "word_index", "onset_ms", "duration_ms")


@dataclass(frozen=True)
class FixationRecord:
    participant: str
    sentence_id: str
    word_index: int
    onset_ms: float
    duration_ms: float


@dataclass(frozen=True)
class GazeSequence:
    participant: str
    sentence_id: str
    path: tuple[int, ...]


def load_fixations(source, min_duration_ms: float = 100.0) -> list[FixationRecord]:
    """Read a fixation CSV, dropping rows with duration_ms < min_duration_ms.

    ``source`` is a path or an open text file. The header must contain the
    columns participant, sentence_id, word_index, onset_ms, duration_ms.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return _read_fixations(fh, min_duration_ms)
    return _read_fixations(source, min_duration_ms)


def _read_fixations(fh, min_duration_ms: float) -> list[FixationRecord]:
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    missing = [c for c in FIXATION_COLUMNS if c not in fields]
    if missing:
        raise DataError(f"fixation file is missing column(s): {', '.join(missing)}")

    records: list[FixationRecord] = []
    for row_no, row in enumerate(reader, start=2):  # header is line 1
        try:
            word_index = int(row["word_index"])
            onset = float(row["onset_ms"])
            duration = float(row["duration_ms"])
        except (TypeError, ValueError) as exc:
            raise DataError(f"row {row_no}: non-numeric field ({exc})") from None
        if word_index <= 0:
            raise DataError(f"row {row_no}: word_index must be >= 1, got {word_index}")
        if duration <= 0:
            raise DataError(f"row {row_no}: duration_ms must be positive, got {duration}")
        if onset < 0:
            raise DataError(f"row {row_no}: onset_ms must be non-negative, got {onset}")
        if duration < min_duration_ms:
            continue
        records.append(
            FixationRecord(
                participant=row["participant"],
                sentence_id=row["sentence_id"],
                word_index=word_index,
                onset_ms=onset,
                duration_ms=duration,
            )
        )
    return records


def build_gaze_sequence(fixations: list[FixationRecord]) -> GazeSequence:
    """Order one participant x sentence group by onset and collapse refixations.

    The sort is stable, so ties in onset keep file order. An empty input
    yields an empty-path sequence, which downstream analyses skip.
    """
    if not fixations:
        return GazeSequence(participant="", sentence_id="", path=())
    participant = fixations[0].participant
    sentence_id = fixations[0].sentence_id
    for rec in fixations:
        if rec.participant != participant or rec.sentence_id != sentence_id:
            raise ValueError("all fixations must share participant and sentence_id")

    ordered = sorted(fixations, key=lambda r: r.onset_ms)
    path: list[int] = []
    for rec in ordered:
        if not path or path[-1] != rec.word_index:
            path.append(rec.word_index)
    return GazeSequence(participant=participant, sentence_id=sentence_id, path=tuple(path))


def text_sequence(sentence: Sentence) -> list[int]:
    """The serial left-to-right word order: [1, 2, ..., n]."""
    return list(range(1, len(sentence) + 1))


def group_fixations(records: list[FixationRecord]) -> dict[tuple[str, str], list[FixationRecord]]:
    """Group records by (participant, sentence_id), preserving file order."""
    groups: dict[tuple[str, str], list[FixationRecord]] = {}
    for rec in records:
        groups.setdefault((rec.participant, rec.sentence_id), []).append(rec)
    return groups


def build_all_sequences(records: list[FixationRecord]) -> dict[str, dict[str, GazeSequence]]:
    """sentence_id -> participant -> GazeSequence for a whole fixation file."""
    out: dict[str, dict[str, GazeSequence]] = {}
    for (participant, sentence_id), group in group_fixations(records).items():
        out.setdefault(sentence_id, {})[participant] = build_gaze_sequence(group)
    return out
