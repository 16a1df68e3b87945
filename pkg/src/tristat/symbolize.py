"""Piecewise-linear compression and greedy symbolic aggregation of series.

A z-scored series is cut into linear pieces ``(len, inc)`` whose squared
deviation from the connecting line stays under ``len * tol**2``. Pieces
from a training corpus are grouped by a sorted greedy sweep into clusters
of radius ``tol * sqrt(2)``; each cluster centre becomes one alphabet
symbol, with ``'A'`` assigned to the most populated cluster.
"""
from __future__ import annotations

import io
import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import ConfigurationError, ContractError

DEFAULT_TOLERANCES = (0.01, 0.10, 0.50)
CHANNEL_SEPARATOR = "|"

_BASE_ALPHABET = string.ascii_uppercase + string.ascii_lowercase
# CJK unified ideographs: a long run of single code points that are never
# produced by the text tokenizer's punctuation rules.
_EXTENDED_START = 0x4E00
_EXTENDED_SIZE = 0x9FFF - 0x4E00 + 1


def symbol_for(index: int) -> str:
    """Alphabet identifier for cluster ``index`` (0 -> 'A')."""
    if index < len(_BASE_ALPHABET):
        return _BASE_ALPHABET[index]
    offset = index - len(_BASE_ALPHABET)
    if offset >= _EXTENDED_SIZE:
        raise ConfigurationError(f"alphabet exhausted at {index} symbols")
    return chr(_EXTENDED_START + offset)


@dataclass(frozen=True)
class Piece:
    len: int
    inc: float

    def __post_init__(self):
        if self.len < 1:
            raise ContractError(f"piece length must be >= 1, got {self.len}")


@dataclass
class Codebook:
    """Cluster centres in original (len, inc) units plus the scaling used to fit them."""

    centers: np.ndarray            # (K, 2) mean len, mean inc
    symbols: list[str]
    scl: float = 1.0
    len_std: float = 1.0
    inc_std: float = 1.0
    tol: float = 0.1
    populations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def scaled_centers(self) -> np.ndarray:
        return _scale(self.centers, self.scl, self.len_std, self.inc_std)

    def to_text(self) -> str:
        buf = io.StringIO()
        meta = {"scl": self.scl, "len_std": self.len_std, "inc_std": self.inc_std, "tol": self.tol}
        buf.write("# " + " ".join(f"{k}={float(v)!r}" for k, v in meta.items()) + "\n")
        for sym, (ln, inc), pop in zip(self.symbols, self.centers, self.populations):
            buf.write(f"{sym}\t{float(ln)!r}\t{float(inc)!r}\t{int(pop)}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> Codebook:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ContractError("codebook text must start with a '#' header line")
        meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        syms, centers, pops = [], [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            sym, ln, inc, pop = line.split("\t")
            syms.append(sym)
            centers.append((float(ln), float(inc)))
            pops.append(int(pop))
        return cls(centers=np.array(centers, dtype=float).reshape(-1, 2), symbols=syms,
                   scl=float(meta["scl"]), len_std=float(meta["len_std"]),
                   inc_std=float(meta["inc_std"]), tol=float(meta["tol"]),
                   populations=np.array(pops, dtype=int))


@dataclass
class SymbolicSequence:
    symbols: str
    codebook: Codebook
    tol: float
    source_len: int

    def __len__(self) -> int:
        return len(self.symbols)


# ---------------------------------------------------------------------------
# compression
# ---------------------------------------------------------------------------

def zscore(x: np.ndarray) -> np.ndarray:
    """Window-level z-score; a constant window maps to zeros."""
    x = np.asarray(x, dtype=float)
    sd = x.std()
    return np.zeros_like(x) if sd == 0 else (x - x.mean()) / sd


def _segment_errors(seg: np.ndarray) -> np.ndarray:
    """Squared deviation from the chord for every candidate end of a piece starting at seg[0].

    Entry ``m-1`` holds the error of the piece covering seg[0..m].
    """
    r = len(seg)
    m = np.arange(1, r)[:, None].astype(float)
    k = np.arange(r)[None, :].astype(float)
    line = seg[0] + (seg[1:, None] - seg[0]) * (k / m)
    dev = np.where(k <= m, seg[None, :] - line, 0.0)
    return (dev * dev).sum(axis=1)


@njit(cache=True)
def _greedy_lengths(x, tol2):
    n = x.shape[0]
    out = np.empty(n - 1, dtype=np.int64)
    count = 0
    start = 0
    while start < n - 1:
        length = 1
        m = 2
        while start + m <= n - 1:
            x0 = x[start]
            rise = x[start + m] - x0
            err = 0.0
            for k in range(m + 1):
                dev = x[start + k] - (x0 + rise * (k / m))
                err += dev * dev
            if err > m * tol2:
                break
            length = m
            m += 1
        out[count] = length
        count += 1
        start += length
    return out[:count]


def compress(x: np.ndarray, tol: float) -> list[Piece]:
    """Greedy polygonal compression of a (normalised) series.

    A piece starting at ``i`` is extended one step at a time and stops just
    before the first end ``j`` where the squared deviation from the chord
    exceeds ``(j - i) * tol**2``. Consecutive pieces share endpoints, so the
    lengths sum to ``len(x) - 1``.
    """
    return [Piece(int(ln), float(inc)) for ln, inc in compress_array(x, tol)]


def compress_array(x: np.ndarray, tol: float) -> np.ndarray:
    """``compress`` as a (pieces, 2) float array of (len, inc)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ContractError(f"compress needs at least 2 points, got {n}")
    if tol <= 0:
        raise ConfigurationError(f"tol must be positive, got {tol}")
    lens = _greedy_lengths(x, tol * tol)
    ends = np.cumsum(lens)
    starts = ends - lens
    return np.column_stack([lens.astype(float), x[ends] - x[starts]])


# ---------------------------------------------------------------------------
# digitisation
# ---------------------------------------------------------------------------

def _scale(points: np.ndarray, scl: float, len_std: float, inc_std: float) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.column_stack([scl * pts[:, 0] / len_std, pts[:, 1] / inc_std])


def _as_points(pieces: Iterable[Piece] | np.ndarray) -> np.ndarray:
    if isinstance(pieces, np.ndarray):
        return pieces.reshape(-1, 2).astype(float)
    return np.array([(p.len, p.inc) for p in pieces], dtype=float).reshape(-1, 2)


def aggregate(points: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Sorted greedy aggregation.

    Points are visited in ascending order of their first coordinate (stable);
    the first unassigned point starts a group and every unassigned point
    within ``radius`` of that starter joins it. Returns (labels, starters)
    with labels in order of group creation.
    """
    n = len(points)
    order = np.argsort(points[:, 0], kind="stable")
    sp = points[order]
    labels_sorted = np.full(n, -1, dtype=int)
    starters: list[int] = []
    first = sp[:, 0]
    for i in range(n):
        if labels_sorted[i] >= 0:
            continue
        g = len(starters)
        starters.append(int(order[i]))
        # every point before i is already assigned; only scan forward within the first-coordinate band
        hi = int(np.searchsorted(first, first[i] + radius, side="right"))
        cand = np.arange(i, hi)
        cand = cand[labels_sorted[cand] < 0]
        d = np.sqrt(((sp[cand] - sp[i]) ** 2).sum(axis=1))
        labels_sorted[cand[d <= radius]] = g
    labels = np.empty(n, dtype=int)
    labels[order] = labels_sorted
    return labels, np.array(starters, dtype=int)


def digitize(pieces: Iterable[Piece] | np.ndarray, tol: float, scl: float = 1.0,
             radius: float | None = None) -> Codebook:
    """Fit a codebook to a corpus of pieces."""
    pts = _as_points(pieces)
    if len(pts) == 0:
        raise ContractError("digitize needs at least one piece")
    len_std = float(pts[:, 0].std()) or 1.0
    inc_std = float(pts[:, 1].std()) or 1.0
    r = tol * np.sqrt(2.0) if radius is None else radius
    scaled = _scale(pts, scl, len_std, inc_std)
    labels, _ = aggregate(scaled, r)
    n_groups = labels.max() + 1
    pops = np.bincount(labels, minlength=n_groups)
    centers = np.zeros((n_groups, 2))
    np.add.at(centers, labels, pts)
    centers /= pops[:, None]
    # most populated first; creation order breaks ties
    rank = np.lexsort((np.arange(n_groups), -pops))
    return Codebook(centers=centers[rank], symbols=[symbol_for(i) for i in range(n_groups)],
                    scl=scl, len_std=len_std, inc_std=inc_std, tol=tol, populations=pops[rank])


def assign(piece: Piece | tuple[float, float], codebook: Codebook) -> str:
    """Symbol of the nearest centre in scaled space; ties go to the lower index."""
    return codebook.symbols[int(assign_indices(np.atleast_2d(_point(piece)), codebook)[0])]


def _point(piece) -> tuple[float, float]:
    return (piece.len, piece.inc) if isinstance(piece, Piece) else tuple(piece)


@njit(cache=True)
def _nearest(points, centers):
    out = np.empty(points.shape[0], dtype=np.int64)
    for i in range(points.shape[0]):
        best = np.inf
        arg = 0
        for j in range(centers.shape[0]):
            d0 = points[i, 0] - centers[j, 0]
            d1 = points[i, 1] - centers[j, 1]
            d = d0 * d0 + d1 * d1
            if d < best:          # strict: the lower index keeps ties
                best = d
                arg = j
        out[i] = arg
    return out


def assign_indices(points: np.ndarray, codebook: Codebook) -> np.ndarray:
    if len(codebook) == 0:
        raise ContractError("assign needs a non-empty codebook")
    sp = _scale(points, codebook.scl, codebook.len_std, codebook.inc_std)
    sc = codebook.scaled_centers()
    return _nearest(np.ascontiguousarray(sp, dtype=np.float64), np.ascontiguousarray(sc, dtype=np.float64))


def symbolize(x: np.ndarray, codebook: Codebook, tol: float | None = None) -> SymbolicSequence:
    """Compress ``x`` (already normalised) and map each piece to a symbol."""
    tol = codebook.tol if tol is None else tol
    pieces = compress(x, tol)
    idx = assign_indices(_as_points(pieces), codebook)
    return SymbolicSequence("".join(codebook.symbols[i] for i in idx), codebook, tol, len(x))


def check_tolerances(tols: Sequence[float]) -> tuple[float, ...]:
    tols = tuple(float(t) for t in tols)
    if len(tols) != 3 or any(t <= 0 for t in tols) or not (tols[0] < tols[1] < tols[2]):
        raise ConfigurationError(f"tolerances must be three strictly increasing positives, got {tols}")
    return tols


def multi_scale(x: np.ndarray, tol_fine: float = 0.01, tol_mid: float = 0.10, tol_coarse: float = 0.50,
                codebooks: Sequence[Codebook] | None = None) -> list[SymbolicSequence]:
    """Symbolise one normalised series at three tolerances.

    Without ``codebooks`` each scale's codebook is fit on the series' own
    pieces, which is what a stand-alone call needs; a pipeline passes the
    frozen training-split codebooks instead.
    """
    tols = check_tolerances((tol_fine, tol_mid, tol_coarse))
    out = []
    for i, tol in enumerate(tols):
        if codebooks is not None:
            out.append(symbolize(x, codebooks[i], tol))
        else:
            pieces = compress(x, tol)
            cb = digitize(pieces, tol)
            idx = assign_indices(_as_points(pieces), cb)
            out.append(SymbolicSequence("".join(cb.symbols[j] for j in idx), cb, tol, len(x)))
    return out


# ---------------------------------------------------------------------------
# inverse
# ---------------------------------------------------------------------------

def quantize_lengths(lengths: np.ndarray, total: int) -> np.ndarray:
    """Round fractional lengths to integers >= 1 summing exactly to ``total``.

    Rounding carries the running error forward; any leftover mismatch is
    settled on the pieces with the largest rounding residual.
    """
    lengths = np.asarray(lengths, dtype=float)
    k = len(lengths)
    if k == 0:
        return np.zeros(0, dtype=int)
    if total < k:
        raise ContractError(f"cannot fit {k} pieces of length >= 1 into {total} steps")
    out = np.zeros(k, dtype=int)
    carry = 0.0
    for i, ln in enumerate(lengths):
        want = ln + carry
        r = max(1, int(np.floor(want + 0.5)))
        carry = want - r
        out[i] = r
    diff = total - int(out.sum())
    residual = lengths - out
    while diff != 0:
        if diff > 0:
            i = int(np.argmax(residual))
            out[i] += 1
            residual[i] -= 1
            diff -= 1
        else:
            cand = np.where(out > 1, residual, np.inf)
            i = int(np.argmin(cand))
            out[i] -= 1
            residual[i] += 1
            diff += 1
    return out


def reconstruct_pieces(pieces: Sequence[tuple[float, float]] | Sequence[Piece], start_value: float) -> np.ndarray:
    """Stitch integer-length pieces into a series starting at ``start_value``."""
    values = [float(start_value)]
    for p in pieces:
        ln, inc = _point(p)
        ln = int(ln)
        base = values[-1]
        values.extend(base + inc * np.arange(1, ln + 1) / ln)
    return np.array(values)


def reconstruct(seq: SymbolicSequence, start_value: float = 0.0) -> np.ndarray:
    """Approximate inverse of symbolisation; output length equals ``seq.source_len``."""
    idx = [seq.codebook.index[s] for s in seq.symbols]
    centers = seq.codebook.centers[idx] if idx else np.zeros((0, 2))
    lens = quantize_lengths(centers[:, 0], seq.source_len - 1)
    return reconstruct_pieces(list(zip(lens, centers[:, 1])), start_value)
