"""
Readers and writers of the pipeline inputs and outputs.

- corpus: TSV `doc_id<TAB>text<TAB>url`, the URL column empty when absent
- URL map: TSV `short_url<TAB>resolved_url`
- topics: TSV `query_id<TAB>query_text`
- qrels: whitespace-separated `query_id 0 doc_id grade`, grades in {0, 1, 2}
- runs: whitespace-separated `query_id Q0 doc_id rank score tag`
"""

from collections import OrderedDict
from typing import Dict, List, Mapping, Optional, Tuple

import pandas as pd
from loguru import logger

from tweetrank.errors import DataFormatError
from tweetrank.features.tokenizer import TokenizedDoc, prepare_document, prepare_query
from tweetrank.utils.fs import exists, require_exists
from tweetrank.utils.read_file import file_opener, read_tsv

Qrels = Dict[str, Dict[str, int]]
RankedRun = Dict[str, List[Tuple[str, float]]]

GRADES = (0, 1, 2)
RUN_TAG = "tweetrank"


def rank_scores(scores: Mapping[str, float]) -> List[Tuple[str, float]]:
    """Sort `doc_id -> score` by descending score, ties broken by ascending doc_id."""
    return sorted(((doc_id, float(score)) for doc_id, score in scores.items()), key=lambda x: (-x[1], x[0]))


def _read_table(path: str, names: List[str], what: str) -> pd.DataFrame:
    try:
        return read_tsv(path, names=names, what=what)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataFormatError(f"Malformed {what}: {err}", path=str(path))


def read_url_map(path: Optional[str]) -> Dict[str, str]:
    """Offline `short_url -> resolved_url` map. `None` gives an empty map."""
    if path is None:
        return {}
    df = _read_table(path, ["short_url", "resolved_url"], "URL map")
    url_map = {}
    for lineno, (short, resolved) in enumerate(zip(df["short_url"], df["resolved_url"]), start=1):
        if short.strip() == "" or resolved.strip() == "":
            raise DataFormatError("Expected `short_url<TAB>resolved_url`", path=str(path), line=lineno)
        url_map[short.strip()] = resolved.strip()
    return url_map


def read_corpus(path: str, url_map: Optional[Mapping[str, str]] = None) -> "OrderedDict[str, TokenizedDoc]":
    r"""
    Read and tokenize the posts of a corpus file.

    Parameters:
        path: Corpus TSV
        url_map: Offline map used to expand shortened links

    Returns:
        doc_id -> `TokenizedDoc`, in file order. Duplicated ids keep their first line.
    """
    df = _read_table(path, ["doc_id", "text", "url"], "corpus file")
    docs = OrderedDict()
    num_empty = 0
    for lineno, (doc_id, text, url) in enumerate(zip(df["doc_id"], df["text"], df["url"]), start=1):
        doc_id = doc_id.strip()
        if doc_id == "":
            raise DataFormatError("Empty document id", path=str(path), line=lineno)
        if doc_id in docs:
            logger.warning(f"{path}:{lineno}: duplicated document `{doc_id}` ignored")
            continue
        doc = prepare_document(doc_id, text, url or None, url_map)
        num_empty += doc.is_empty
        docs[doc_id] = doc
    if num_empty > 0:
        logger.warning(f"{num_empty} documents of {path} have no word token")
    logger.info(f"Read {len(docs)} documents from {path}")
    return docs


def read_topics(path: str) -> "OrderedDict[str, TokenizedDoc]":
    """Read and tokenize a topics TSV, in file order."""
    df = _read_table(path, ["query_id", "text"], "topics file")
    topics = OrderedDict()
    for lineno, (query_id, text) in enumerate(zip(df["query_id"], df["text"]), start=1):
        query_id = query_id.strip()
        if query_id == "":
            raise DataFormatError("Empty query id", path=str(path), line=lineno)
        if query_id in topics:
            raise DataFormatError(f"Duplicated query `{query_id}`", path=str(path), line=lineno)
        topics[query_id] = prepare_query(query_id, text)
    return topics


def _lines(path: str, what: str):
    require_exists(path, what=what)
    with file_opener(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line:
                yield lineno, line.split()


def read_qrels(path: str) -> Qrels:
    """TREC qrels, `query_id -> doc_id -> grade`."""
    qrels: Qrels = {}
    for lineno, fields in _lines(path, "qrels file"):
        if len(fields) != 4:
            raise DataFormatError(
                f"Expected 4 fields `query_id 0 doc_id grade`, got {len(fields)}", str(path), lineno
            )
        query_id, _, doc_id, grade = fields
        try:
            grade = int(grade)
        except ValueError:
            raise DataFormatError(f"Non-integer grade `{grade}`", str(path), lineno)
        if grade not in GRADES:
            raise DataFormatError(f"Grade {grade} is not in {GRADES}", str(path), lineno)
        qrels.setdefault(query_id, {})[doc_id] = grade
    return qrels


def read_run(path: str) -> RankedRun:
    r"""
    TREC run, `query_id -> [(doc_id, score), ...]`. Each list is sorted by
    descending score with ties broken by ascending doc_id.
    """
    scores: Dict[str, Dict[str, float]] = OrderedDict()
    for lineno, fields in _lines(path, "run file"):
        if len(fields) != 6:
            raise DataFormatError(
                f"Expected 6 fields `query_id Q0 doc_id rank score tag`, got {len(fields)}", str(path), lineno
            )
        query_id, _, doc_id, rank, score, _ = fields
        try:
            int(rank)
            score = float(score)
        except ValueError:
            raise DataFormatError("Non-numeric rank or score", str(path), lineno)
        if doc_id in scores.setdefault(query_id, {}):
            raise DataFormatError(f"Duplicated document `{doc_id}` for query `{query_id}`", str(path), lineno)
        scores[query_id][doc_id] = score
    return OrderedDict((query_id, rank_scores(docs)) for query_id, docs in scores.items())


def write_run(run: RankedRun, path: str, tag: str = RUN_TAG):
    r"""
    Write a TREC run. Queries are sorted by id and documents kept in list
    order, ranked from 1. Scores are printed with 10 decimals.
    """
    lines = []
    for query_id in sorted(run):
        for rank, (doc_id, score) in enumerate(run[query_id], start=1):
            lines.append(f"{query_id} Q0 {doc_id} {rank} {score:.10f} {tag}")
    if exists(path):
        logger.warning(f"Overwriting the run {path}")
    with file_opener(path, "w") as f:
        f.write("\n".join(lines) + ("\n" if lines else ""))
    logger.info(f"Wrote {len(lines)} run lines to {path}")


def write_qrels(qrels: Qrels, path: str):
    lines = [
        f"{query_id} 0 {doc_id} {grade}"
        for query_id in sorted(qrels)
        for doc_id, grade in sorted(qrels[query_id].items())
    ]
    with file_opener(path, "w") as f:
        f.write("\n".join(lines) + "\n")
