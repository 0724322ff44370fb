"""Edit distance between gaze-derived word sequences and the serial text order.

Unit costs (match 0, substitution/insertion/deletion 1) over the full
dynamic-programming recurrence, i.e. the minimal number of edit operations
turning one sequence into the other. Only the distance is computed; no
traceback.
"""

from __future__ import annotations

from .errors import DataError

MATCH_COST = 0
SUBSTITUTION_COST = 1
INSERTION_COST = 1
DELETION_COST = 1


def edit_distance(seq_a, seq_b) -> int:
    """Minimal number of edits transforming seq_a into seq_b (two-row DP)."""
    a, b = list(seq_a), list(seq_b)
    if len(a) < len(b):
        a, b = b, a
    n = len(b)
    if n == 0:
        return len(a)
    prev = list(range(n + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        diag = prev[0]
        for j, cb in enumerate(b, 1):
            up = prev[j]
            best = diag if ca == cb else diag + 1
            left = cur[j - 1] + 1
            if left < best:
                best = left
            d = up + 1
            if d < best:
                best = d
            append(best)
            diag = up
        prev = cur
    return prev[n]


def sentence_edit_distance(gaze_paths: dict[str, tuple[int, ...]], text_seq) -> float:
    """Mean per-participant edit distance between gaze path and text order.

    Participants with empty paths are ignored; raises if none remain.
    """
    distances = [edit_distance(path, text_seq) for path in gaze_paths.values() if len(path) > 0]
    if not distances:
        raise DataError("no participant with a non-empty gaze path")
    return sum(distances) / len(distances)
