from .tokenizer import (
    TokenizedDoc,
    tokenize,
    char_trigrams,
    word_char_trigrams,
    normalize_url,
    url_to_trigrams,
    prepare_document,
    prepare_query,
)
from .vocabulary import Vocabulary, encode_and_pad, PAD_ID, OOV_ID
from .embeddings import init_embedding_table, load_pretrained_embeddings
