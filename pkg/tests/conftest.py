import numpy as np
import pytest

from phsic import PairedDataset


def write_embeddings(path, vocab, header=True):
    """Write ``{token: vector}`` in the word2vec text format."""
    vocab = dict(vocab)
    dim = len(next(iter(vocab.values())))
    lines = [f"{len(vocab)} {dim}"] if header else []
    for tok, vec in vocab.items():
        lines.append(tok + " " + " ".join(repr(float(v)) for v in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def token_corpus(X, Y, prefix=("a", "b")):
    """Single-token sentences whose embeddings are the rows of X and Y.

    Returns (pair lines, embedding dict). Tokens are unique per row.
    """
    vocab = {}
    lines = []
    for i, (x, y) in enumerate(zip(X, Y)):
        tx, ty = f"{prefix[0]}{i}", f"{prefix[1]}{i}"
        vocab[tx] = x
        vocab[ty] = y
        lines.append(f"{tx}\t{ty}")
    return lines, vocab


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line3():
    """The 1-D fixture {(1,1),(2,2),(3,3)}."""
    return PairedDataset.from_vectors([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


ACCEPTANCE_LINES = []


def verdict(criterion, ok, detail):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
