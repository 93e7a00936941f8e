"""Paired text data, word-embedding tables and the sum-of-word-vectors encoder."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionError, InsufficientDataError, ParameterError, ParseError

logger = logging.getLogger(__name__)


def tokenize(text: str, lowercase: bool = False) -> tuple[str, ...]:
    if lowercase:
        text = text.lower()
    return tuple(text.split())


class EmbeddingTable:
    """Token -> vector lookup backed by one ``(vocab, dim)`` float64 matrix.

    ``duplicates`` counts rows dropped because their token was already seen.
    """

    def __init__(self, tokens: Sequence[str], vectors, duplicates: int = 0):
        vectors = np.array(vectors, dtype=np.float64, ndmin=2)
        if vectors.shape[0] != len(tokens):
            raise DimensionError(
                f"{len(tokens)} tokens but {vectors.shape[0]} vectors"
            )
        index = {}
        for i, tok in enumerate(tokens):
            if tok in index:
                raise ValueError(f"duplicate token {tok!r}")
            index[tok] = i
        vectors.setflags(write=False)
        self._index = index
        self.vectors = vectors
        self.dim = int(vectors.shape[1])
        self.duplicates = duplicates

    @classmethod
    def from_dict(cls, entries: dict, dim: Optional[int] = None) -> "EmbeddingTable":
        tokens = list(entries)
        if not tokens:
            if dim is None:
                raise ValueError("dim is required for an empty table")
            return cls([], np.zeros((0, dim)))
        return cls(tokens, np.vstack([np.asarray(entries[t], dtype=np.float64) for t in tokens]))

    def __len__(self):
        return len(self._index)

    def __contains__(self, token):
        return token in self._index

    def __getitem__(self, token) -> np.ndarray:
        return self.vectors[self._index[token]]

    @property
    def entries(self) -> dict:
        return {tok: self.vectors[i] for tok, i in self._index.items()}

    def lookup(self, tokens: Iterable[str]) -> list[int]:
        index = self._index
        return [index[t] for t in tokens if t in index]


def _is_header(fields):
    if len(fields) != 2:
        return False
    try:
        count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return count >= 0 and dim > 0


def load_embeddings(path, expected_dim: Optional[int] = None) -> EmbeddingTable:
    """Read a word-embedding text file (word2vec / fastText ``.vec`` layout).

    The optional first line ``"<count> <dim>"`` fixes the dimensionality;
    otherwise it is inferred from the first row. Duplicate tokens keep their
    first vector and are tallied in ``table.duplicates``.
    """
    path = Path(path)
    tokens: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    duplicates = 0
    dim = None
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n").rstrip(" ")
            if not line:
                continue
            fields = line.split(" ")
            if lineno == 1 and _is_header(fields):
                dim = int(fields[1])
                if expected_dim is not None and dim != expected_dim:
                    raise DimensionError(
                        f"{path}: header declares dim={dim}, expected {expected_dim}"
                    )
                continue
            if dim is None:
                dim = len(fields) - 1
                if dim < 1:
                    raise ParseError("row has no vector components", path, lineno)
                if expected_dim is not None and dim != expected_dim:
                    raise DimensionError(
                        f"{path}: rows have dim={dim}, expected {expected_dim}"
                    )
            if len(fields) != dim + 1:
                raise ParseError(
                    f"expected {dim + 1} fields, got {len(fields)}", path, lineno
                )
            token = fields[0]
            try:
                values = [float(v) for v in fields[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric value ({exc})", path, lineno) from None
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            tokens.append(token)
            rows.append(values)
    if dim is None:
        if expected_dim is None:
            raise ParseError("empty embedding file", path)
        dim = expected_dim
    if duplicates:
        logger.warning("%s: %d duplicate tokens ignored", path, duplicates)
    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(tokens, vectors, duplicates=duplicates)


def encode_sentence(tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Sum of the word vectors of ``tokens``; out-of-vocabulary tokens are skipped."""
    idx = table.lookup(tokens)
    if not idx:
        return np.zeros(table.dim)
    return table.vectors[idx].sum(axis=0)


def _rows(vectors):
    """View ``vectors`` as a float64 ``(n, d)`` matrix; a flat sequence is ``n`` 1-D points."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D array of row vectors, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class SentencePair:
    x_tokens: tuple
    y_tokens: tuple
    x_vec: Optional[np.ndarray] = None
    y_vec: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Aligned (x, y) sample.

    Text columns are kept verbatim so the file can be written back unchanged.
    Once embedded, ``x_vecs``/``y_vecs`` hold one row per pair.
    """

    x_texts: tuple = ()
    y_texts: tuple = ()
    x_tokens: tuple = ()
    y_tokens: tuple = ()
    x_vecs: Optional[np.ndarray] = None
    y_vecs: Optional[np.ndarray] = None
    skipped_blank: int = 0
    zero_vector_count: int = 0
    line_numbers: tuple = ()

    def __post_init__(self):
        n = len(self.x_texts)
        if not self.line_numbers:
            object.__setattr__(self, "line_numbers", tuple(range(1, n + 1)))
        elif len(self.line_numbers) != n:
            raise ValueError("line_numbers must have one entry per pair")
        if not (len(self.y_texts) == len(self.x_tokens) == len(self.y_tokens) == n):
            raise ValueError("text/token columns must have equal length")
        for name in ("x_vecs", "y_vecs"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = _rows(arr).view()
            if arr.shape[0] != n:
                raise DimensionError(f"{name} has {arr.shape[0]} rows for {n} pairs")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if (self.x_vecs is None) != (self.y_vecs is None):
            raise ValueError("x_vecs and y_vecs must be set together")

    @classmethod
    def from_texts(cls, x_texts, y_texts, lowercase=False) -> "PairedDataset":
        x_texts, y_texts = tuple(x_texts), tuple(y_texts)
        return cls(
            x_texts=x_texts,
            y_texts=y_texts,
            x_tokens=tuple(tokenize(t, lowercase) for t in x_texts),
            y_tokens=tuple(tokenize(t, lowercase) for t in y_texts),
        )

    @classmethod
    def from_vectors(cls, x_vecs, y_vecs) -> "PairedDataset":
        """Dataset of pre-computed vectors with placeholder texts ``"x<i>"``/``"y<i>"``."""
        x_vecs, y_vecs = _rows(x_vecs), _rows(y_vecs)
        if x_vecs.shape[0] != y_vecs.shape[0]:
            raise DimensionError(
                f"x has {x_vecs.shape[0]} rows but y has {y_vecs.shape[0]}"
            )
        n = x_vecs.shape[0]
        xt = tuple(f"x{i}" for i in range(n))
        yt = tuple(f"y{i}" for i in range(n))
        return cls(
            x_texts=xt,
            y_texts=yt,
            x_tokens=tuple((t,) for t in xt),
            y_tokens=tuple((t,) for t in yt),
            x_vecs=x_vecs,
            y_vecs=y_vecs,
        )

    @property
    def n(self) -> int:
        return len(self.x_texts)

    def __len__(self):
        return self.n

    @property
    def embedded(self) -> bool:
        return self.x_vecs is not None

    def __getitem__(self, i) -> SentencePair:
        return SentencePair(
            self.x_tokens[i],
            self.y_tokens[i],
            None if self.x_vecs is None else self.x_vecs[i],
            None if self.y_vecs is None else self.y_vecs[i],
        )

    @property
    def pairs(self) -> list[SentencePair]:
        return [self[i] for i in range(self.n)]

    def take(self, indices) -> "PairedDataset":
        """Sub-dataset (or reordering) by integer indices."""
        idx = np.asarray(indices, dtype=np.intp)
        pick = lambda seq: tuple(seq[i] for i in idx)
        return replace(
            self,
            x_texts=pick(self.x_texts),
            y_texts=pick(self.y_texts),
            x_tokens=pick(self.x_tokens),
            y_tokens=pick(self.y_tokens),
            x_vecs=None if self.x_vecs is None else self.x_vecs[idx],
            y_vecs=None if self.y_vecs is None else self.y_vecs[idx],
            line_numbers=pick(self.line_numbers),
            skipped_blank=0,
            zero_vector_count=0,
        )

    def swapped(self) -> "PairedDataset":
        """The same pairs with the x and y sides exchanged."""
        return replace(
            self,
            x_texts=self.y_texts,
            y_texts=self.x_texts,
            x_tokens=self.y_tokens,
            y_tokens=self.x_tokens,
            x_vecs=self.y_vecs,
            y_vecs=self.x_vecs,
        )

    def vectors(self):
        if not self.embedded:
            raise ParameterError("dataset has not been embedded")
        return self.x_vecs, self.y_vecs

    def to_tsv(self) -> str:
        return "".join(f"{x}\t{y}\n" for x, y in zip(self.x_texts, self.y_texts))

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_tsv())


def load_pairs(path, lowercase: bool = False) -> PairedDataset:
    """Read a two-column TAB-separated pair file.

    Blank lines are skipped and counted in ``skipped_blank``; any other line
    without exactly one TAB is a :class:`ParseError`.
    """
    path = Path(path)
    xs, ys, linenos = [], [], []
    skipped = 0
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw[:-1] if raw.endswith("\n") else raw
            if not line.strip():
                skipped += 1
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ParseError(f"expected 2 tab-separated columns, got {len(cols)}", path, lineno)
            xs.append(cols[0])
            ys.append(cols[1])
            linenos.append(lineno)
    if skipped:
        logger.warning("%s: skipped %d blank lines", path, skipped)
    ds = PairedDataset.from_texts(xs, ys, lowercase=lowercase)
    return replace(ds, skipped_blank=skipped, line_numbers=tuple(linenos))


def embed_dataset(ds: PairedDataset, table_x: EmbeddingTable, table_y: EmbeddingTable) -> PairedDataset:
    """Attach summed word vectors to every pair.

    ``zero_vector_count`` of the result counts pairs where either side came out
    as the zero vector (empty or fully out-of-vocabulary sentence).
    """
    if ds.n == 0:
        return ds
    X = np.vstack([encode_sentence(t, table_x) for t in ds.x_tokens])
    Y = np.vstack([encode_sentence(t, table_y) for t in ds.y_tokens])
    zero = int(np.count_nonzero(~X.any(axis=1) | ~Y.any(axis=1)))
    if zero:
        logger.warning("%d pairs have a zero sentence vector", zero)
    return replace(ds, x_vecs=X, y_vecs=Y, zero_vector_count=zero)


def require_fit_data(ds: PairedDataset, minimum: int = 2):
    """Return ``(X, Y)`` for fitting, enforcing embedding and ``n >= minimum``."""
    if ds.n < minimum:
        raise InsufficientDataError(f"need at least {minimum} pairs to fit, got {ds.n}")
    return ds.vectors()
