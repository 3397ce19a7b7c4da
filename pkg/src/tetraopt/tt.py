"""Tensor-train representation and the operations the optimizer needs.

A tensor train stores a d-dimensional array as a chain of 3-axis cores.
Core ``j`` has shape ``(r_j, n_j, r_{j+1})`` with boundary ranks
``r_0 = r_d = 1``; the entry at a multi-index is the product of the matrix
slices picked by that index.  Cores are read-only after construction, so a
``TensorTrain`` can be shared freely between threads.
"""

from __future__ import annotations

import struct
from math import prod

import numpy as np

MultiIndex = tuple[int, ...]

DENSE_CAP = 1_000_000

_MAGIC = b"TTRN"
_FORMAT_VERSION = 1


class TensorTrain:
    """Chain of 3-axis cores representing a compressed d-dimensional tensor.

    Parameters
    ----------
    cores : sequence of ndarray
        Core ``j`` must have shape ``(r_j, n_j, r_{j+1})``; adjacent ranks
        must match and the boundary ranks must be 1.
    """

    __slots__ = ("cores",)

    def __init__(self, cores):
        # Copy unconditionally: the cores get frozen, and freezing a view of
        # the caller's array would freeze the caller's data too.
        cores = tuple(np.array(c, dtype=np.float64, order="C") for c in cores)
        if not cores:
            raise ValueError("a tensor train needs at least one core")
        for j, core in enumerate(cores):
            if core.ndim != 3:
                raise ValueError(f"core {j} must have 3 axes, got {core.ndim}")
            if min(core.shape) < 1:
                raise ValueError(f"core {j} has an empty axis: {core.shape}")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary ranks must equal 1")
        for j in range(len(cores) - 1):
            if cores[j].shape[2] != cores[j + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {j} and {j + 1}: "
                    f"{cores[j].shape[2]} vs {cores[j + 1].shape[0]}"
                )
        for core in cores:
            core.flags.writeable = False
        self.cores = cores

    @property
    def order(self) -> int:
        return len(self.cores)

    @property
    def mode_sizes(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """All bond ranks ``r_0 .. r_d`` including the unit boundaries."""
        return tuple(c.shape[0] for c in self.cores) + (1,)

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    def __repr__(self) -> str:
        return (
            f"TensorTrain(order={self.order}, mode_sizes={self.mode_sizes}, "
            f"ranks={self.ranks})"
        )

    @classmethod
    def from_vectors(cls, vectors) -> "TensorTrain":
        """Rank-1 train whose entries are products of the vectors' entries."""
        return cls([np.asarray(v, dtype=np.float64).reshape(1, -1, 1) for v in vectors])

    @classmethod
    def constant(cls, shape, value: float) -> "TensorTrain":
        cores = [np.ones((1, n, 1)) for n in shape]
        cores[0] = cores[0] * float(value)
        return cls(cores)

    @classmethod
    def random(cls, shape, rank, rng, *, nonnegative: bool = False) -> "TensorTrain":
        """Random train with bond ranks ``min(rank, unfolding bound)``.

        With ``nonnegative=True`` the cores are uniform on [0, 1), which makes
        every entry of the represented tensor nonnegative.
        """
        shape = [int(n) for n in shape]
        ranks = bounded_ranks(shape, rank)
        cores = []
        for j, n in enumerate(shape):
            size = (ranks[j], n, ranks[j + 1])
            core = rng.random(size) if nonnegative else rng.standard_normal(size)
            cores.append(core)
        return cls(cores)


def bounded_ranks(shape, rank) -> list[int]:
    """Clip a target bond rank to the unfolding bounds of ``shape``."""
    d = len(shape)
    if isinstance(rank, int):
        rank = [rank] * (d - 1)
    if len(rank) != d - 1:
        raise ValueError("need one interior rank per bond")
    ranks = [1]
    for j in range(d - 1):
        cap = min(prod(shape[: j + 1]), prod(shape[j + 1 :]))
        ranks.append(max(1, min(int(rank[j]), cap)))
    ranks.append(1)
    return ranks


def validate_index(tt: TensorTrain, idx) -> MultiIndex:
    idx = tuple(int(i) for i in idx)
    if len(idx) != tt.order:
        raise ValueError(f"index length {len(idx)} != tensor order {tt.order}")
    for j, (i, n) in enumerate(zip(idx, tt.mode_sizes)):
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of bounds for mode {j} of size {n}")
    return idx


def tt_eval(tt: TensorTrain, idx) -> float:
    """Entry at ``idx``: the chained product of the per-mode core slices."""
    idx = validate_index(tt, idx)
    v = tt.cores[0][:, idx[0], :]
    for j in range(1, tt.order):
        v = v @ tt.cores[j][:, idx[j], :]
    return float(v[0, 0])


def tt_eval_many(tt: TensorTrain, indices) -> np.ndarray:
    """Vectorized :func:`tt_eval` for an ``(N, d)`` integer index array."""
    indices = np.asarray(indices, dtype=np.intp)
    if indices.ndim != 2 or indices.shape[1] != tt.order:
        raise ValueError("expected an (N, d) index array")
    for j, n in enumerate(tt.mode_sizes):
        col = indices[:, j]
        if col.size and (col.min() < 0 or col.max() >= n):
            raise ValueError(f"index out of bounds for mode {j} of size {n}")
    v = tt.cores[0][0, indices[:, 0], :]
    for j in range(1, tt.order):
        slices = tt.cores[j][:, indices[:, j], :]
        v = np.einsum("nr,rns->ns", v, slices)
    return v[:, 0]


def tt_full(tt: TensorTrain, *, max_entries: int = DENSE_CAP) -> np.ndarray:
    """Materialize the dense tensor; refuses more than ``max_entries`` entries."""
    total = prod(tt.mode_sizes)
    if total > max_entries:
        raise ValueError(
            f"dense tensor would hold {total} entries, above the cap {max_entries}"
        )
    out = tt.cores[0].reshape(tt.mode_sizes[0], -1)
    for core in tt.cores[1:]:
        r, n, s = core.shape
        out = out @ core.reshape(r, n * s)
        out = out.reshape(-1, s)
    return out.reshape(tt.mode_sizes)


def tt_hadamard(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    """Elementwise product; bond ranks multiply (kron of the core slices)."""
    if a.mode_sizes != b.mode_sizes:
        raise ValueError(f"mode sizes differ: {a.mode_sizes} vs {b.mode_sizes}")
    cores = []
    for ca, cb in zip(a.cores, b.cores):
        ra, n, sa = ca.shape
        rb, _, sb = cb.shape
        core = np.einsum("inj,knl->iknjl", ca, cb).reshape(ra * rb, n, sa * sb)
        cores.append(core)
    return TensorTrain(cores)


def tt_add(a: TensorTrain, b: TensorTrain) -> TensorTrain:
    """Sum of two trains via block-diagonal cores; interior ranks add."""
    if a.mode_sizes != b.mode_sizes:
        raise ValueError(f"mode sizes differ: {a.mode_sizes} vs {b.mode_sizes}")
    if a.order == 1:
        return TensorTrain([a.cores[0] + b.cores[0]])
    cores = [np.concatenate([a.cores[0], b.cores[0]], axis=2)]
    for ca, cb in zip(a.cores[1:-1], b.cores[1:-1]):
        ra, n, sa = ca.shape
        rb, _, sb = cb.shape
        block = np.zeros((ra + rb, n, sa + sb))
        block[:ra, :, :sa] = ca
        block[ra:, :, sa:] = cb
        cores.append(block)
    cores.append(np.concatenate([a.cores[-1], b.cores[-1]], axis=0))
    return TensorTrain(cores)


def tt_scale(tt: TensorTrain, alpha: float) -> TensorTrain:
    cores = list(tt.cores)
    cores[0] = cores[0] * float(alpha)
    return TensorTrain(cores)


def tt_shift(tt: TensorTrain, offset: float) -> TensorTrain:
    """Add a constant to every entry."""
    return tt_add(tt, TensorTrain.constant(tt.mode_sizes, offset))


def frobenius_norm(tt: TensorTrain) -> float:
    """Frobenius norm via the transfer-matrix contraction of ``tt`` with itself."""
    g = np.einsum("inj,knl->ikjl", tt.cores[0], tt.cores[0])
    m = g.reshape(1, -1)
    for core in tt.cores[1:]:
        g = np.einsum("inj,knl->ikjl", core, core)
        r2 = core.shape[0] ** 2
        m = m @ g.reshape(r2, -1)
    return float(np.sqrt(max(m[0, 0], 0.0)))


def tt_round(tt: TensorTrain, max_rank: int, rel_tol: float = 0.0) -> TensorTrain:
    """Truncate bond ranks by a right-to-left QR pass and a left-to-right SVD pass.

    Every bond rank of the result is at most ``max_rank``.  When the input's
    exact rank already fits under ``max_rank`` the result reproduces it up to
    floating-point error; otherwise singular values are dropped so that the
    total relative Frobenius error stays near ``rel_tol`` (the per-bond
    threshold is ``rel_tol * ||tt|| / sqrt(d - 1)``).
    """
    if max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    if rel_tol < 0:
        raise ValueError("rel_tol must be >= 0")
    d = tt.order
    if d == 1:
        return TensorTrain([c.copy() for c in tt.cores])

    # Right-to-left orthogonalization (LQ via transposed QR).
    cores = [c.copy() for c in tt.cores]
    for j in range(d - 1, 0, -1):
        r, n, s = cores[j].shape
        mat = cores[j].reshape(r, n * s)
        q, rfac = np.linalg.qr(mat.T)
        k = q.shape[1]
        cores[j] = np.ascontiguousarray(q.T.reshape(k, n, s))
        cores[j - 1] = np.einsum("inj,kj->ink", cores[j - 1], rfac)

    norm = float(np.linalg.norm(cores[0]))
    threshold = rel_tol * norm / np.sqrt(d - 1) if rel_tol > 0 else 0.0

    # Left-to-right truncated SVD sweep.
    for j in range(d - 1):
        r, n, s = cores[j].shape
        u, sv, vt = np.linalg.svd(cores[j].reshape(r * n, s), full_matrices=False)
        keep = len(sv)
        if threshold > 0:
            tails = np.sqrt(np.cumsum(sv[::-1] ** 2))[::-1]
            above = np.nonzero(tails > threshold)[0]
            keep = int(above[-1]) + 1 if above.size else 1
        keep = max(1, min(keep, max_rank))
        cores[j] = np.ascontiguousarray(u[:, :keep].reshape(r, n, keep))
        carry = sv[:keep, None] * vt[:keep]
        rn, nn, sn = cores[j + 1].shape
        cores[j + 1] = (carry @ cores[j + 1].reshape(rn, nn * sn)).reshape(keep, nn, sn)
    return TensorTrain(cores)


def save_tt(tt: TensorTrain, path) -> None:
    """Write the train to ``path``.

    Layout (little-endian): magic ``TTRN``, format version (u32), order d
    (u32), d mode sizes (u64), d+1 bond ranks (u64), then the cores
    back-to-back as float64 in row-major order.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _FORMAT_VERSION, tt.order))
        np.asarray(tt.mode_sizes, dtype="<u8").tofile(fh)
        np.asarray(tt.ranks, dtype="<u8").tofile(fh)
        for core in tt.cores:
            np.ascontiguousarray(core, dtype="<f8").tofile(fh)


def load_tt(path) -> TensorTrain:
    """Read a train written by :func:`save_tt`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a tensor-train file: bad magic {magic!r}")
        version, order = struct.unpack("<II", fh.read(8))
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        mode_sizes = np.fromfile(fh, dtype="<u8", count=order).astype(int)
        ranks = np.fromfile(fh, dtype="<u8", count=order + 1).astype(int)
        cores = []
        for j in range(order):
            count = ranks[j] * mode_sizes[j] * ranks[j + 1]
            flat = np.fromfile(fh, dtype="<f8", count=count)
            if flat.size != count:
                raise ValueError("truncated tensor-train file")
            cores.append(flat.reshape(ranks[j], mode_sizes[j], ranks[j + 1]))
    return TensorTrain(cores)
