"""Seeded synthetic-data generators used as ground-truth oracles.

The reader simulator is a single stochastic walk over a sentence: a serial
left-to-right pass with optional word skips and regressions, plus (for the
tree-guided kind) a head-attraction mixture. After fixating a head word the
reader jumps, with probability ``head_attraction``, to a uniformly chosen
not-yet-visited head word; when that choice fires with no head left, the
pass ends. A serial model is the same walk with the attraction forced to 0,
so serial and tree-guided with head_attraction = 0 consume the same random
stream and emit identical paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bayesnet, frp
from .corpus import ROLE_HEAD, Sentence, Token, compute_depths, label_roles, roles
from .features import FEATURE_NAMES
from .gaze import FIXATION_COLUMNS, FixationRecord

READER_KINDS = ("serial", "tree_guided")

_COMMON_DEPRELS = ("nsubj", "obj", "det", "amod", "advmod", "nmod", "case", "obl", "mark", "conj")
_CLAUSAL_DEPRELS = ("ccomp", "advcl", "acl", "xcomp")


@dataclass(frozen=True)
class ReaderModel:
    kind: str = "serial"
    head_attraction: float = 0.0
    skip_prob: float = 0.0
    regress_prob: float = 0.0

    def __post_init__(self):
        if self.kind not in READER_KINDS:
            raise ValueError(f"kind must be one of {READER_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.head_attraction <= 1.0:
            raise ValueError("head_attraction must lie in [0, 1]")
        if not 0.0 <= self.skip_prob < 1.0:
            raise ValueError("skip_prob must lie in [0, 1)")
        if not 0.0 <= self.regress_prob < 1.0:
            raise ValueError("regress_prob must lie in [0, 1)")


def simulate_path(sentence: Sentence, model: ReaderModel, rng: np.random.Generator) -> list[int]:
    """One reading pass over a sentence; returns the fixated word indices."""
    n = len(sentence)
    if n == 0:
        return []
    role_map = roles(sentence)
    head_words = [t.index for t in sentence.tokens if t.role == ROLE_HEAD]
    attraction = model.head_attraction if model.kind == "tree_guided" else 0.0

    path = [1]
    visited = {1}
    current = 1
    max_len = 4 * n + 4  # regressions could otherwise loop indefinitely
    while len(path) < max_len:
        nxt = None
        if role_map[current] == ROLE_HEAD and rng.random() < attraction:
            targets = [w for w in head_words if w not in visited]
            if not targets:
                break
            nxt = targets[int(rng.integers(len(targets)))]
        if nxt is None:
            if rng.random() < model.regress_prob and current > 1:
                nxt = int(rng.integers(1, current))
            else:
                step = 2 if rng.random() < model.skip_prob else 1
                nxt = current + step
                if nxt > n:
                    break
        path.append(nxt)
        visited.add(nxt)
        current = nxt
    return path


def simulate_reader_records(
    sentences: list[Sentence],
    model: ReaderModel,
    n_participants: int,
    seed: int,
) -> list[FixationRecord]:
    """Fixation records for every participant x sentence pair.

    Each pair draws from its own generator seeded by (seed, participant,
    sentence), so generation is reproducible and order-independent.
    Durations are at least 100 ms and onsets strictly increase.
    """
    records: list[FixationRecord] = []
    for pi in range(n_participants):
        participant = f"p{pi:02d}"
        for si, sentence in enumerate(sentences):
            rng = np.random.default_rng([seed, pi, si])
            onset = 0.0
            for word in simulate_path(sentence, model, rng):
                duration = 100.0 + float(rng.exponential(80.0))
                records.append(
                    FixationRecord(
                        participant=participant,
                        sentence_id=sentence.id,
                        word_index=word,
                        onset_ms=onset,
                        duration_ms=duration,
                    )
                )
                onset += duration + 20.0 + 40.0 * float(rng.random())
    return records


def gen_reader_paths(
    sentences: list[Sentence],
    model: ReaderModel,
    n_participants: int,
    seed: int,
) -> str:
    """Render simulated fixations as CSV text in the ingestion format."""
    lines = [",".join(FIXATION_COLUMNS)]
    for r in simulate_reader_records(sentences, model, n_participants, seed):
        lines.append(f"{r.participant},{r.sentence_id},{r.word_index},{r.onset_ms!r},{r.duration_ms!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Random dependency-parsed sentences plus matching norms and surprisal files
# ---------------------------------------------------------------------------

def vocabulary(size: int = 200) -> list[str]:
    return [f"word{k:03d}" for k in range(size)]


def zipf_norms(words: list[str]) -> dict[str, float]:
    """Rank-based frequency-per-million table (highest rank most frequent)."""
    return {w: 30000.0 / (rank + 1) for rank, w in enumerate(words)}


def random_sentences(
    n_sentences: int,
    seed: int,
    min_tokens: int = 5,
    max_tokens: int = 12,
    vocab: list[str] | None = None,
) -> list[Sentence]:
    """Random dependency trees (random recursive attachment, random root)."""
    if min_tokens < 1 or max_tokens < min_tokens:
        raise ValueError("need 1 <= min_tokens <= max_tokens")
    words = vocab if vocab is not None else vocabulary()
    rng = np.random.default_rng([seed, 0])
    sentences = []
    for si in range(n_sentences):
        n = int(rng.integers(min_tokens, max_tokens + 1))
        root = int(rng.integers(1, n + 1))
        heads = [0] * (n + 1)
        attached = [root]
        order = [i for i in range(1, n + 1) if i != root]
        rng.shuffle(order)
        for idx in order:
            heads[idx] = attached[int(rng.integers(len(attached)))]
            attached.append(idx)
        tokens = []
        for idx in range(1, n + 1):
            if idx == root:
                deprel = "root"
            elif rng.random() < 0.12:
                deprel = _CLAUSAL_DEPRELS[int(rng.integers(len(_CLAUSAL_DEPRELS)))]
            else:
                deprel = _COMMON_DEPRELS[int(rng.integers(len(_COMMON_DEPRELS)))]
            word = words[int(len(words) * rng.random() ** 2)]
            tokens.append(Token(index=idx, surface=word, head=heads[idx], deprel=deprel))
        sentence = Sentence(id=f"s{si:04d}", tokens=tuple(tokens))
        sentences.append(label_roles(compute_depths(sentence)))
    return sentences


def random_surprisal(sentences: list[Sentence], seed: int, sigma: float = 0.5):
    """Log-normal word surprisals (nats) for every token of every sentence."""
    table: dict[str, dict[str, list[float]]] = {}
    for si, sentence in enumerate(sentences):
        rng = np.random.default_rng([seed, 1, si])
        n = len(sentence)
        table[sentence.id] = {
            "lexical": [float(v) for v in rng.lognormal(0.0, sigma, n)],
            "syntactic": [float(v) for v in rng.lognormal(0.0, sigma, n)],
        }
    return table


def norms_csv(norms: dict[str, float]) -> str:
    lines = ["word,freq_per_million"]
    for word in sorted(norms):
        lines.append(f"{word},{norms[word]!r}")
    return "\n".join(lines) + "\n"


def surprisal_csv(table) -> str:
    lines = ["sentence_id,token_index,lexical_surprisal,syntactic_surprisal"]
    for sid in table:
        lex = table[sid]["lexical"]
        syn = table[sid]["syntactic"]
        for k, (lv, sv) in enumerate(zip(lex, syn), start=1):
            lines.append(f"{sid},{k},{lv!r},{sv!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Planted discrete network over the five sentence features
# ---------------------------------------------------------------------------

def planted_network() -> bayesnet.DiscreteBN:
    """A 3-level network with the structure the pipeline is expected to find.

    Arcs: max_depth, familiarity and surprisal each feed edit_distance, and
    max_depth feeds n_clauses. The child tables are near-deterministic
    threshold functions of the parent sum, chosen so that every arc clears
    the BIC penalty by a wide margin at a few hundred rows.
    """
    nodes = len(FEATURE_NAMES)
    edges = frozenset({(1, 0), (2, 0), (3, 0), (1, 4)})
    dag = bayesnet.Dag(node_count=nodes, edges=edges)
    cards = (3, 3, 3, 3, 3)

    uniform = np.full((1, 3), 1.0 / 3.0)

    # edit_distance | (max_depth, familiarity, surprisal); rows in C order
    level_probs = {0: (0.92, 0.04, 0.04), 1: (0.04, 0.92, 0.04), 2: (0.04, 0.04, 0.92)}
    rows = []
    for v1 in range(3):
        for v2 in range(3):
            for v3 in range(3):
                s = v1 + v2 + v3
                level = 0 if s <= 1 else (1 if s <= 3 else 2)
                rows.append(level_probs[level])
    cpt_edit = np.asarray(rows)

    # n_clauses | max_depth
    cpt_clauses = np.asarray(
        [[0.90, 0.05, 0.05], [0.05, 0.90, 0.05], [0.05, 0.05, 0.90]]
    )

    cpts = (cpt_edit, uniform.copy(), uniform.copy(), uniform.copy(), cpt_clauses)
    return bayesnet.DiscreteBN(dag=dag, cardinalities=cards, cpts=cpts)


def gen_bn_dataset(bn: bayesnet.DiscreteBN, n: int, seed: int | None = None) -> np.ndarray:
    """Ancestral sample from a discrete network (delegates to bayesnet)."""
    return bayesnet.ancestral_sample(bn, n, seed)


def bn_data_csv(data: np.ndarray, names=FEATURE_NAMES) -> str:
    lines = [",".join(names)]
    for row in data:
        lines.append(",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthetic fixation-locked EEG with a planted surprisal effect
# ---------------------------------------------------------------------------

def gen_frp_dataset(
    directory,
    n_subjects: int = 12,
    n_trials: int = 200,
    n_channels: int = 4,
    effect_window_ms: tuple[float, float] = (48.0, 300.0),
    amplitude: float = 0.5,
    noise_sd: float = 1.0,
    seed: int = 0,
    sfreq: float = 500.0,
    tmin: float = -0.6,
    n_timepoints: int = 800,
) -> list[Path]:
    """Write per-subject EpochSet files with a planted linear surprisal effect.

    Inside the window, every channel's amplitude is
    amplitude * surprisal_trial plus Gaussian noise; outside it is pure
    noise. Surprisal is log-normal(0, 0.5). Returns the sidecar paths.
    """
    a, b = float(effect_window_ms[0]), float(effect_window_ms[1])
    t_lo = tmin * 1000.0
    t_hi = (tmin + (n_timepoints - 1) / sfreq) * 1000.0
    if not a < b:
        raise ValueError("effect window must satisfy a < b")
    if a < t_lo or b > t_hi:
        raise ValueError(f"effect window [{a}, {b}] ms outside the epoch range [{t_lo}, {t_hi}] ms")

    times_ms = (tmin + np.arange(n_timepoints) / sfreq) * 1000.0
    window = (times_ms >= a) & (times_ms <= b)

    sidecars = []
    for si in range(n_subjects):
        rng = np.random.default_rng([seed, si])
        syntactic = rng.lognormal(0.0, 0.5, n_trials)
        lexical = rng.lognormal(0.0, 0.5, n_trials)
        noise = rng.normal(0.0, noise_sd, (n_trials, n_channels, n_timepoints)) if noise_sd > 0 else 0.0
        signal = amplitude * syntactic[:, None, None] * window[None, None, :]
        data = np.asarray(signal + noise, dtype=np.float32)
        trials = tuple(
            frp.TrialInfo(
                sentence_id=f"synt{si:02d}_{k:04d}",
                token_index=1,
                lexical_surprisal=float(lexical[k]),
                syntactic_surprisal=float(syntactic[k]),
            )
            for k in range(n_trials)
        )
        epochs = frp.EpochSet(
            subject=f"sub{si:02d}",
            data=np.asarray(data, dtype=float),
            sfreq=sfreq,
            tmin=tmin,
            trials=trials,
        )
        sidecars.append(frp.save_epochs(epochs, directory, f"sub{si:02d}"))
    return sidecars


def expected_slope_series(
    effect_window_ms: tuple[float, float],
    amplitude: float,
    sfreq: float = 500.0,
    tmin: float = -0.6,
    n_timepoints: int = 800,
) -> np.ndarray:
    """Ground-truth unstandardized slope: amplitude inside the window, else 0."""
    times_ms = (tmin + np.arange(n_timepoints) / sfreq) * 1000.0
    window = (times_ms >= effect_window_ms[0]) & (times_ms <= effect_window_ms[1])
    return amplitude * window.astype(float)
