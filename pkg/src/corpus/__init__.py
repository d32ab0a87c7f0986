# Built-in problem corpus
from src.corpus.problems import CorpusEntry, corpus_entry, corpus_get, corpus_list

__all__ = ["CorpusEntry", "corpus_entry", "corpus_get", "corpus_list"]
