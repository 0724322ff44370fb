"""Dependency-parsed sentences: CoNLL-U ingestion, parse depth, syntactic roles.

A token's depth is the number of dependency links between it and the root
(root = 0). Tokens at depth 0 or 1 are labeled ``head``; tokens at depth 2 or
more are labeled ``nonhead``. Only the ID, FORM, HEAD and DEPREL columns of
CoNLL-U input are consumed; multiword-token ranges and empty nodes are
skipped.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, replace

from .errors import ParseError, TreeStructureError

ROLE_HEAD = "head"
ROLE_NONHEAD = "nonhead"

# Base deprels (subtypes stripped) that open an additional clause.
CLAUSAL_DEPRELS = frozenset({"csubj", "ccomp", "xcomp", "advcl", "acl", "parataxis"})

_SENT_ID_RE = re.compile(r"^#\s*sent_id\s*=\s*(\S+)")
_RANGE_ID_RE = re.compile(r"^\d+-\d+$")
_EMPTY_ID_RE = re.compile(r"^\d+\.\d+$")

ROLE_TABLE_COLUMNS = ("sent_id", "token_index", "surface", "head", "deprel", "depth", "role")


@dataclass(frozen=True)
class Token:
    """One syntactic word. ``head`` is the 1-based index of its governor, 0 for the root."""

    index: int
    surface: str
    head: int
    deprel: str
    depth: int = -1
    role: str = ""


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def parse_conllu(text: str) -> list[Sentence]:
    """Parse a CoNLL-U document into depth- and role-annotated Sentences.

    Blocks are separated by blank lines; ``# sent_id = X`` comments name the
    sentence, otherwise the 1-based block ordinal is used. Both LF and CRLF
    line endings are accepted.

    Raises ParseError (with a line number) for malformed rows and
    TreeStructureError (naming the sentence) when head indices do not form a
    single-rooted acyclic tree.
    """
    sentences: list[Sentence] = []
    block: list[tuple[int, str]] = []
    sent_id: str | None = None
    ordinal = 0

    def flush() -> None:
        nonlocal block, sent_id, ordinal
        if not block:
            sent_id = None
            return
        ordinal += 1
        sentences.append(_build_sentence(block, sent_id if sent_id is not None else str(ordinal)))
        block = []
        sent_id = None

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            m = _SENT_ID_RE.match(line)
            if m:
                sent_id = m.group(1)
            continue
        block.append((line_no, line))
    flush()
    return sentences


def _build_sentence(block: list[tuple[int, str]], sent_id: str) -> Sentence:
    raw: list[Token] = []
    for line_no, line in block:
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"line {line_no}: expected 10 tab-separated columns, got {len(cols)}")
        tok_id, form, _, _, _, _, head, deprel = cols[:8]
        if _RANGE_ID_RE.match(tok_id) or _EMPTY_ID_RE.match(tok_id):
            continue
        try:
            index = int(tok_id)
        except ValueError:
            raise ParseError(f"line {line_no}: non-integer token ID {tok_id!r}") from None
        if index != len(raw) + 1:
            raise ParseError(f"line {line_no}: token ID {index} out of sequence (expected {len(raw) + 1})")
        try:
            head_idx = int(head)
        except ValueError:
            raise ParseError(f"line {line_no}: non-integer HEAD {head!r}") from None
        raw.append(Token(index=index, surface=form, head=head_idx, deprel=deprel))

    sentence = Sentence(id=sent_id, tokens=tuple(raw))
    _validate_tree(sentence)
    return label_roles(compute_depths(sentence))


def _validate_tree(sentence: Sentence) -> None:
    n = len(sentence)
    roots = 0
    for tok in sentence.tokens:
        if tok.head < 0 or tok.head > n:
            raise TreeStructureError(
                f"sentence {sentence.id!r}: HEAD {tok.head} of token {tok.index} out of range 0..{n}"
            )
        if tok.head == tok.index:
            raise TreeStructureError(f"sentence {sentence.id!r}: token {tok.index} governs itself")
        if tok.head == 0:
            roots += 1
    if n and roots == 0:
        raise TreeStructureError(f"sentence {sentence.id!r}: no root token (HEAD 0)")
    if roots > 1:
        raise TreeStructureError(f"sentence {sentence.id!r}: {roots} root tokens, expected exactly 1")


def _walk_depths(heads: list[int], sent_id: str) -> list[int]:
    n = len(heads)
    depths: list[int | None] = [None] * n
    for start in range(n):
        if depths[start] is not None:
            continue
        path: list[int] = []
        on_path: set[int] = set()
        node = start
        while depths[node] is None:
            if node in on_path:
                raise TreeStructureError(f"sentence {sent_id!r}: cycle through token {node + 1}")
            on_path.add(node)
            path.append(node)
            h = heads[node]
            if h == 0:
                depths[node] = 0
                path.pop()
                break
            node = h - 1
        anchor = depths[node]
        assert anchor is not None
        for steps, idx in enumerate(reversed(path), start=1):
            depths[idx] = anchor + steps
    return [d for d in depths if d is not None]


def compute_depths(sentence: Sentence) -> Sentence:
    """Return a copy of the sentence with every token's depth filled in."""
    _validate_tree(sentence)
    depths = _walk_depths([t.head for t in sentence.tokens], sentence.id)
    tokens = tuple(replace(t, depth=d) for t, d in zip(sentence.tokens, depths))
    return Sentence(id=sentence.id, tokens=tokens)


def label_roles(sentence: Sentence) -> Sentence:
    """Assign head/nonhead roles from depths (head iff depth <= 1)."""
    for tok in sentence.tokens:
        if tok.depth < 0:
            raise ValueError(f"sentence {sentence.id!r}: depths must be computed before labeling roles")
    tokens = tuple(
        replace(t, role=ROLE_HEAD if t.depth <= 1 else ROLE_NONHEAD) for t in sentence.tokens
    )
    return Sentence(id=sentence.id, tokens=tokens)


def max_depth(sentence: Sentence) -> int:
    if not sentence.tokens:
        raise ValueError(f"sentence {sentence.id!r} is empty")
    return max(t.depth for t in sentence.tokens)


def count_clauses(sentence: Sentence) -> int:
    """1 for the root clause plus one per clausal deprel (base label before ':')."""
    extra = sum(1 for t in sentence.tokens if t.deprel.split(":")[0] in CLAUSAL_DEPRELS)
    return 1 + extra


def roles(sentence: Sentence) -> dict[int, str]:
    """Token index -> role map used by the transition analysis."""
    return {t.index: t.role for t in sentence.tokens}


def to_conllu(sentences: list[Sentence]) -> str:
    """Serialize sentences back to CoNLL-U (only the four consumed columns carry data)."""
    chunks = []
    for sent in sentences:
        lines = [f"# sent_id = {sent.id}"]
        for t in sent.tokens:
            lines.append(f"{t.index}\t{t.surface}\t_\t_\t_\t_\t{t.head}\t{t.deprel}\t_\t_")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def role_table_rows(sentences: list[Sentence]) -> list[tuple]:
    rows = []
    for sent in sentences:
        for t in sent.tokens:
            rows.append((sent.id, t.index, t.surface, t.head, t.deprel, t.depth, t.role))
    return rows


def write_role_table(sentences: list[Sentence], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROLE_TABLE_COLUMNS)
        writer.writerows(role_table_rows(sentences))
