"""Label-vocabulary screening against denylists and reference lists.

Matching is whole-word and case-insensitive: a single-word term must equal
one token of the class name, a multi-word term must appear as a contiguous
token run.  Substring hits inside unrelated words never count.
"""

from __future__ import annotations

import re
from typing import IO, Iterable, Sequence

from .errors import DuplicateEntry
from .ingest import csv_field
from .records import TaxonomyRecord

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _contains_run(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    for start in range(len(haystack) - len(needle) + 1):
        if list(haystack[start : start + len(needle)]) == list(needle):
            return True
    return False


def screen_labels(
    vocab: Iterable[TaxonomyRecord], denylist: Iterable[str]
) -> list[tuple[TaxonomyRecord, str]]:
    """Vocabulary entries whose name contains a denylisted term.

    Each hit carries the first matching term in denylist order; output is
    sorted by image count descending so the worst exposure leads.
    """
    terms = []
    for term in denylist:
        cleaned = term.strip().lower()
        if cleaned:
            terms.append((cleaned, _tokens(cleaned)))

    hits = []
    for record in vocab:
        tokens = _tokens(record.class_name)
        for term, needle in terms:
            if _contains_run(tokens, needle):
                hits.append((record, term))
                break
    hits.sort(key=lambda h: (-h[0].n_images, h[0].class_name, h[0].class_ind))
    return hits


def intersect_label_sets(
    vocab: Iterable[TaxonomyRecord], reference: Iterable[str]
) -> tuple[list[TaxonomyRecord], int]:
    """Exact-match intersection on normalized names, with its cardinality."""
    wanted = {term.strip().lower() for term in reference if term.strip()}
    matches = [r for r in vocab if r.class_name.strip().lower() in wanted]
    matches.sort(key=lambda r: (r.class_name.strip().lower(), r.class_ind))
    return matches, len(matches)


def load_watchlist(name: str, source) -> list[str]:
    """One entry per line, `#` comments, order preserved, duplicates rejected."""
    from .ingest import _text_source

    entries: list[str] = []
    seen: set[str] = set()
    with _text_source(source) as stream:
        for line in stream:
            entry = line.split("#", 1)[0].strip()
            if not entry:
                continue
            if entry in seen:
                raise DuplicateEntry(f"{name}: {entry}")
            seen.add(entry)
            entries.append(entry)
    return entries


REPORT_COLUMNS = ("class_ind", "class_name", "n_images", "matched_term")


def write_screening_report(
    hits: Sequence[tuple[TaxonomyRecord, str]], dest: str | IO
) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(REPORT_COLUMNS) + "\n")
        for record, term in hits:
            out.write(
                ",".join(
                    (
                        str(record.class_ind),
                        csv_field(record.class_name),
                        str(record.n_images),
                        csv_field(term),
                    )
                )
                + "\n"
            )
