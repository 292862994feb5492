"""Two-layer microblog sentiment pipeline.

Layer one weak-labels posts with a polarity lexicon, featurises them as bag
of words or TF-IDF and compares six classifiers; layer two ranks keywords
per sentiment and scores how well the top-k lists cover held-out posts.
"""
from .corpus import Dataset, Document, SentimentLabel, label_distribution, load_csv, split
from .features import SparseFeatureMatrix, Vocabulary, build_vocabulary, idf, tf, tfidf_matrix
from .polarity import PolarityLexicon, PolarityScore, score, to_label, weak_label_dataset
from .preprocess import PipelineConfig, TokenSequence, clean_text, is_english, preprocess_pipeline, stem, tokenize

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Document", "PipelineConfig", "PolarityLexicon", "PolarityScore", "SentimentLabel",
    "SparseFeatureMatrix", "TokenSequence", "Vocabulary", "build_vocabulary", "clean_text", "idf",
    "is_english", "label_distribution", "load_csv", "preprocess_pipeline", "score", "split", "stem",
    "tf", "tfidf_matrix", "to_label", "tokenize", "weak_label_dataset",
]
