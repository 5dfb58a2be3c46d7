"""Bundled regression data."""
from importlib import resources
from pathlib import Path


def corpus_path() -> Path:
    """Filesystem path of the bundled corpus listing."""
    return Path(resources.files(__name__) / "corpus" / "corpus.txt")
