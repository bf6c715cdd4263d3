"""
Tokenization of queries, posts and URLs into word tokens and character trigrams.
"""

import re
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

URL_PLACEHOLDER = "<url>"
MAX_URL_CHARS = 120
BOUNDARY = "#"

# Words may contain "-", "_" and "'" between alphanumerics, so compounds
# like "chrome-os" stay whole
_TOKEN_RE = re.compile(r"[@#]?[a-z0-9]+(?:[-_'][a-z0-9]+)*")
_INLINE_URL_RE = re.compile(r"https?://\S+", flags=re.IGNORECASE)
_SCHEME_RE = re.compile(r"^https?://")
_CONTROL_RE = re.compile(r"[\x00-\x20\x7f]")


def strip_non_ascii(text: str) -> str:
    return text.encode("ascii", errors="ignore").decode("ascii")


def tokenize(text: Optional[str]) -> List[str]:
    r"""
    Lowercased word tokenization of a query or a post.

    Non-ASCII characters are removed first, then the text is split on
    whitespace and punctuation. Mentions (`@user`) are dropped and hashtags
    are kept as normal words (`#bbc` -> `bbc`).

    Parameters:
        text: Raw text. `None` and `""` give an empty list.

    Returns:
        tokens: The word tokens, in text order
    """
    if not text:
        return []
    text = strip_non_ascii(text).lower()
    tokens = []
    for token in _TOKEN_RE.findall(text):
        if token.startswith("@"):
            continue
        tokens.append(token.lstrip(BOUNDARY))
    return tokens


def char_trigrams(token: str) -> List[str]:
    r"""
    Contiguous 3-grams of `token` wrapped with the `#` boundary marker,
    e.g. `"hello"` -> `["#he", "hel", "ell", "llo", "lo#"]`.
    """
    if not token:
        return []
    wrapped = f"{BOUNDARY}{token}{BOUNDARY}"
    return [wrapped[i : i + 3] for i in range(len(wrapped) - 2)]


def word_char_trigrams(tokens: Sequence[str]) -> List[str]:
    """Per-word trigrams, concatenated in word order. Trigrams never span two words."""
    return [tri for token in tokens for tri in char_trigrams(token)]


def normalize_url(url: Optional[str]) -> str:
    r"""
    Lowercase the URL, remove whitespace, control and non-ASCII characters and the `http(s)://`
    scheme, then truncate to `MAX_URL_CHARS`. A missing URL gives the
    placeholder `"<url>"`.
    """
    if url is None or not url.strip():
        return URL_PLACEHOLDER
    url = _CONTROL_RE.sub("", strip_non_ascii(url)).lower()
    url = _SCHEME_RE.sub("", url)
    if not url:
        return URL_PLACEHOLDER
    return url[:MAX_URL_CHARS]


def url_to_trigrams(url: Optional[str]) -> List[str]:
    """Trigrams of the normalized URL, taken over the whole string and not per word."""
    return char_trigrams(normalize_url(url))


@dataclass
class TokenizedDoc:
    r"""
    A query or a post split into the three input perspectives.

    Parameters:
        doc_id: Document or query identifier
        word_tokens: Word tokens, mentions removed
        char_trigrams: Per-word character trigrams, in word order
        url_trigrams: Trigrams of the resolved URL, or of the placeholder.
            Empty for queries.
        url: The resolved URL, if any
    """

    doc_id: str
    word_tokens: List[str] = field(default_factory=list)
    char_trigrams: List[str] = field(default_factory=list)
    url_trigrams: List[str] = field(default_factory=list)
    url: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return len(self.word_tokens) == 0


def split_inline_urls(text: str) -> Tuple[str, List[str]]:
    """Remove the `http(s)://` links of a post and return them separately."""
    urls = _INLINE_URL_RE.findall(text or "")
    return _INLINE_URL_RE.sub(" ", text or ""), urls


def resolve_url(url: Optional[str], url_map: Optional[Mapping[str, str]] = None) -> Optional[str]:
    """Replace a shortened link by its expanded form from the offline map, when known."""
    if url is None or not url.strip():
        return None
    url = url.strip()
    if url_map:
        return url_map.get(url, url)
    return url


def prepare_document(
    doc_id: str,
    text: str,
    url: Optional[str] = None,
    url_map: Optional[Mapping[str, str]] = None,
) -> TokenizedDoc:
    r"""
    Build the three token lists of a post.

    Inline links are stripped from the text before tokenization. When the
    URL column is empty, the first inline link is used as the post URL.
    The URL is then expanded through `url_map` before trigram segmentation.

    Parameters:
        doc_id: Post identifier
        text: Raw post text
        url: Optional URL column of the corpus
        url_map: Offline mapping short URL -> expanded URL
    """
    text, inline_urls = split_inline_urls(text)
    if (url is None or not url.strip()) and len(inline_urls) > 0:
        url = inline_urls[0]
    resolved = resolve_url(url, url_map)
    words = tokenize(text)
    return TokenizedDoc(
        doc_id=doc_id,
        word_tokens=words,
        char_trigrams=word_char_trigrams(words),
        url_trigrams=url_to_trigrams(resolved),
        url=resolved,
    )


def prepare_query(query_id: str, text: str) -> TokenizedDoc:
    """Word tokens and per-word trigrams of a query. Queries carry no URL."""
    words = tokenize(text)
    return TokenizedDoc(doc_id=query_id, word_tokens=words, char_trigrams=word_char_trigrams(words))
