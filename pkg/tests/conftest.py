import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fesic.designs import build  # noqa: E402

# (example, n, width) for every circuit the correctness criteria cover
CORPUS = [
    ("hadd", None, None),
    ("counter", 4, None),
    ("counter", 8, None),
    ("sorter", 1, 4),
    ("sorter", 1, 8),
    ("sorter", 2, 4),
    ("sorter", 2, 8),
    ("sorter", 3, 4),
    ("sorter", 3, 8),
    ("stackmachine", 8, None),
]


def corpus_id(cfg):
    ex, n, w = cfg
    return "-".join(str(x) for x in (ex, n, w) if x is not None)


@pytest.fixture(scope="session")
def corpus():
    return [build(*cfg) for cfg in CORPUS]
