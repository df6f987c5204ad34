"""Predict whether a suggested post edit will be rejected, and why."""

import json

from . import _editex
from ._editex import MODEL_SCHEMA_VERSION, EditexError, levenshtein, normalize_text

__all__ = [
    "MODEL_SCHEMA_VERSION",
    "EditexError",
    "Model",
    "extract_features",
    "levenshtein",
    "normalize_text",
    "parse_post",
    "run_experiment",
]


def parse_post(html):
    """Text, code, links and diff spans of one post body."""
    return json.loads(_editex.parse_post_json(html))


def extract_features(text_before, text_after, reputation, user_name, other_party_name=None):
    """The 15 edit features, without network link checks."""
    return json.loads(
        _editex.extract_features_json(text_before, text_after, reputation, user_name, other_party_name)
    )


def run_experiment(data_path, seed=42, n_trees=100, permutations=200, ablation=True):
    """Chronological train/test experiment over a JSONL or CSV dataset."""
    return json.loads(_editex.run_experiment_json(str(data_path), seed, n_trees, permutations, ablation))


class Model:
    """A trained model bundle."""

    def __init__(self, bundle):
        self._bundle = bundle

    @classmethod
    def load(cls, path):
        return cls(_editex.Model.load(str(path)))

    @classmethod
    def from_json(cls, document):
        return cls(_editex.Model.from_json(document))

    @classmethod
    def train(cls, data_path, algo="rf", seed=42, train_fraction=0.7, n_trees=100):
        return cls(_editex.Model.train(str(data_path), algo, seed, train_fraction, n_trees))

    @property
    def algo(self):
        return self._bundle.algo

    @property
    def decision_threshold(self):
        return self._bundle.decision_threshold

    def save(self, path):
        self._bundle.save(str(path))

    def to_json(self):
        return self._bundle.to_json()

    def predict(self, text_before, text_after, reputation, user_name):
        """Decision, score, reasons and features for one edit."""
        return json.loads(self._bundle.predict_json(text_before, text_after, reputation, user_name))
