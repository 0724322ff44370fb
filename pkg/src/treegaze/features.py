"""Sentence-level feature table for the scanpath-deviation model.

Five variables per sentence, in node order: edit_distance, max_depth,
familiarity, surprisal, n_clauses. Each is kept raw, z-scored (sample sd),
and discretized into equal-width bins over the observed range of the
z-scores.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import align, corpus, gaze
from .errors import DataError

FEATURE_NAMES = ("edit_distance", "max_depth", "familiarity", "surprisal", "n_clauses")

NORMS_COLUMNS = ("word", "freq_per_million")
SURPRISAL_COLUMNS = ("sentence_id", "token_index", "lexical_surprisal", "syntactic_surprisal")


def familiarity(sentence: corpus.Sentence, norms: dict[str, float]) -> float:
    """Mean log10(frequency-per-million + 1) over tokens, case-folded lookup.

    Words absent from the norms contribute log10(1) = 0.
    """
    if not sentence.tokens:
        raise DataError(f"sentence {sentence.id!r} is empty")
    total = 0.0
    for tok in sentence.tokens:
        freq = norms.get(tok.surface.casefold(), 0.0)
        total += math.log10(freq + 1.0)
    return total / len(sentence.tokens)


def sentence_surprisal(word_surprisals) -> float:
    values = list(word_surprisals)
    if not values:
        raise DataError("cannot average an empty list of word surprisals")
    return float(sum(values)) / len(values)


def zscore(column) -> np.ndarray:
    """(x - mean) / sd with the n-1 denominator; constant columns map to zeros."""
    x = np.asarray(column, dtype=float)
    if x.size < 2:
        raise ValueError("z-scoring needs at least 2 values")
    sd = x.std(ddof=1)
    if sd == 0.0:
        warnings.warn("z-scoring a constant column; returning zeros", stacklevel=2)
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def discretize_equal_width(column, k: int = 4) -> np.ndarray:
    """Equal-width bins over [min, max]: bin(x) = floor((x-lo)/w) clamped to k-1."""
    x = np.asarray(column, dtype=float)
    if x.size < 1:
        raise ValueError("cannot discretize an empty column")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros(x.shape, dtype=np.int64)
    width = (hi - lo) / k
    bins = np.floor((x - lo) / width).astype(np.int64)
    return np.clip(bins, 0, k - 1)


def correlation_matrix(columns) -> np.ndarray:
    """Pearson r for every column pair; unit diagonal; NaN for zero-variance columns."""
    x = np.asarray(columns, dtype=float)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ValueError("correlation_matrix needs a 2-D table with >= 3 rows")
    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    degenerate = norms == 0.0
    if degenerate.any():
        warnings.warn("zero-variance column(s); correlations set to NaN", stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (centered.T @ centered) / np.outer(norms, norms)
    r[degenerate, :] = np.nan
    r[:, degenerate] = np.nan
    np.fill_diagonal(r, np.where(degenerate, np.nan, 1.0))
    return np.clip(r, -1.0, 1.0, out=r)


@dataclass(frozen=True)
class FeatureTable:
    sentence_ids: tuple[str, ...]
    names: tuple[str, ...]
    raw: np.ndarray      # n_sentences x 5
    z: np.ndarray
    bins: np.ndarray

    def column(self, name: str, kind: str = "raw") -> np.ndarray:
        idx = self.names.index(name)
        return {"raw": self.raw, "z": self.z, "bins": self.bins}[kind][:, idx]


def load_norms(source) -> dict[str, float]:
    """word -> frequency-per-million, keys case-folded."""
    norms: dict[str, float] = {}
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in NORMS_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"norms file is missing column(s): {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=2):
            try:
                norms[row["word"].casefold()] = float(row["freq_per_million"])
            except (TypeError, ValueError):
                raise DataError(f"norms row {row_no}: non-numeric frequency") from None
    return norms


def load_surprisal(source) -> dict[str, dict[str, list[float]]]:
    """sentence_id -> {"lexical": [...], "syntactic": [...]} in token order."""
    table: dict[str, list[tuple[int, float, float]]] = {}
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SURPRISAL_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"surprisal file is missing column(s): {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=2):
            try:
                entry = (
                    int(row["token_index"]),
                    float(row["lexical_surprisal"]),
                    float(row["syntactic_surprisal"]),
                )
            except (TypeError, ValueError):
                raise DataError(f"surprisal row {row_no}: non-numeric field") from None
            table.setdefault(row["sentence_id"], []).append(entry)
    out: dict[str, dict[str, list[float]]] = {}
    for sid, entries in table.items():
        entries.sort(key=lambda e: e[0])
        out[sid] = {
            "lexical": [e[1] for e in entries],
            "syntactic": [e[2] for e in entries],
        }
    return out


def assemble_features(
    sentences: list[corpus.Sentence],
    sequences: dict[str, dict[str, gaze.GazeSequence]],
    norms: dict[str, float],
    surprisals: dict[str, dict[str, list[float]]],
    bins: int = 4,
) -> tuple[FeatureTable, list[str]]:
    """Build the per-sentence table; returns (table, ids dropped for missing data).

    A sentence is dropped when it has no participant with a non-empty gaze
    path or no surprisal rows. The surprisal feature is the sentence mean of
    the word-level lexical surprisal.
    """
    ids: list[str] = []
    rows: list[list[float]] = []
    dropped: list[str] = []
    for sentence in sentences:
        paths = {
            p: seq.path for p, seq in sequences.get(sentence.id, {}).items() if len(seq.path) > 0
        }
        words = surprisals.get(sentence.id, {}).get("lexical", [])
        if not paths or not words:
            dropped.append(sentence.id)
            continue
        rows.append(
            [
                align.sentence_edit_distance(paths, gaze.text_sequence(sentence)),
                float(corpus.max_depth(sentence)),
                familiarity(sentence, norms),
                sentence_surprisal(words),
                float(corpus.count_clauses(sentence)),
            ]
        )
        ids.append(sentence.id)
    if len(rows) < 2:
        raise DataError("feature table needs at least 2 sentences with complete data")

    raw = np.asarray(rows, dtype=float)
    z = np.column_stack([zscore(raw[:, j]) for j in range(raw.shape[1])])
    binned = np.column_stack([discretize_equal_width(z[:, j], bins) for j in range(z.shape[1])])
    table = FeatureTable(
        sentence_ids=tuple(ids), names=FEATURE_NAMES, raw=raw, z=z, bins=binned
    )
    return table, dropped


def write_feature_table(table: FeatureTable, path) -> None:
    header = ["sentence_id"]
    for name in table.names:
        header += [f"{name}_raw", f"{name}_z", f"{name}_bin"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, sid in enumerate(table.sentence_ids):
            row: list = [sid]
            for j in range(len(table.names)):
                row += [table.raw[i, j], table.z[i, j], int(table.bins[i, j])]
            writer.writerow(row)


def write_correlation_matrix(table: FeatureTable, path) -> np.ndarray:
    r = correlation_matrix(table.raw)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", *table.names])
        for i, name in enumerate(table.names):
            writer.writerow([name, *[r[i, j] for j in range(len(table.names))]])
    return r
