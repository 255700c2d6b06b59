from .generator import (
    GeneratorSpec, build_vector_fixture, bundled_vectors_path, generate_corpus, read_corpus,
    write_corpus, write_vectors,
)
from .records import (
    DomainDataset, RecordError, Utterance, load_catalog, load_dataset, load_utterances,
    save_catalog, save_dataset, save_utterances,
)
from .splits import split_dataset, stratified_sample

__all__ = [
    "DomainDataset", "GeneratorSpec", "RecordError", "Utterance", "build_vector_fixture",
    "bundled_vectors_path", "generate_corpus", "load_catalog", "load_dataset", "load_utterances",
    "read_corpus", "save_catalog", "save_dataset", "save_utterances", "split_dataset",
    "stratified_sample", "write_corpus", "write_vectors",
]
