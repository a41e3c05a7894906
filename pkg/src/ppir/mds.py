"""Systematic maximum-distance-separable codes with erasure decoding.

The generator is a systematic Reed-Solomon matrix: evaluate at the fixed
point sequence 0, 1, ..., n-1 (as field elements) and row-reduce so the
first k columns form the identity.  Any k columns of the result are
invertible (the MDS property), so any k known codeword coordinates determine
the whole codeword.  The construction is deterministic, which keeps encoded
payloads reproducible for a given (n, k, q).

Encoding is symbol-wise: for message rows of length L, column l of the
output block is the generator transpose applied to column l of the input.
Decoding inverts the k x k generator submatrix for the known positions;
recovery matrices are cached per erasure pattern since protocol runs repeat
a small set of patterns.
"""

from __future__ import annotations

from functools import lru_cache

from . import linalg
from .errors import (
    CorruptionError,
    InsufficientInformationError,
    UnsupportedParametersError,
)
from .fields import FiniteField, make_field


class SystematicMdsCode:
    """[n, k] systematic MDS code over GF(q), n <= q."""

    __slots__ = ("n", "k", "field", "generator", "_recovery")

    def __init__(self, n: int, k: int, field: FiniteField):
        if not 1 <= k <= n:
            raise UnsupportedParametersError(f"need 1 <= k <= n, got k={k}, n={n}")
        if n > field.q:
            raise UnsupportedParametersError(
                f"code length {n} exceeds field size {field.q}"
            )
        self.n = n
        self.k = k
        self.field = field
        self.generator = self._build_generator()
        self._recovery = {}

    def _build_generator(self):
        f = self.field
        # Vandermonde rows; points are the integers 0..n-1 read as elements
        vand = [[f.pow(p, i) for p in range(self.n)] for i in range(self.k)]
        lead = [row[: self.k] for row in vand]
        sys_rows = linalg.mat_mul(f, linalg.invert(f, lead), vand)
        return tuple(tuple(r) for r in sys_rows)

    @property
    def parity_columns(self):
        """k x (n-k) block P of the generator [I | P]."""
        return tuple(tuple(row[self.k:]) for row in self.generator)

    def encode(self, message_rows):
        """k message rows of length L -> n codeword rows."""
        if len(message_rows) != self.k:
            raise ValueError(f"expected {self.k} message rows, got {len(message_rows)}")
        out = [tuple(r) for r in message_rows]
        out.extend(self.parity_rows(message_rows))
        return out

    def parity_rows(self, message_rows):
        if len(message_rows) != self.k:
            raise ValueError(f"expected {self.k} message rows, got {len(message_rows)}")
        f = self.field
        cols = list(zip(*message_rows))
        rows = []
        for j in range(self.k, self.n):
            coeff = [self.generator[i][j] for i in range(self.k)]
            rows.append(tuple(f.dot(coeff, c) for c in cols))
        return rows

    def _recovery_matrix(self, positions):
        cached = self._recovery.get(positions)
        if cached is None:
            f = self.field
            # columns of the generator at the known positions, transposed
            a_t = [[self.generator[r][p] for r in range(self.k)] for p in positions]
            g_t = [[self.generator[r][j] for r in range(self.k)] for j in range(self.n)]
            cached = linalg.mat_mul(f, g_t, linalg.invert(f, a_t))
            self._recovery[positions] = cached
        return cached

    def erasure_decode(self, known):
        """Reconstruct the codeword from >= k known (position, row) pairs.

        Raises InsufficientInformationError below k distinct positions and
        CorruptionError when over-determined input is inconsistent.
        """
        by_pos = {}
        for pos, row in known:
            if not 0 <= pos < self.n:
                raise ValueError(f"position {pos} outside [0, {self.n})")
            row = tuple(row)
            if pos in by_pos and by_pos[pos] != row:
                raise CorruptionError(f"conflicting rows supplied for position {pos}")
            by_pos[pos] = row
        if len(by_pos) < self.k:
            raise InsufficientInformationError(
                f"need {self.k} known positions, got {len(by_pos)}"
            )
        base = tuple(sorted(by_pos))[: self.k]
        rec = self._recovery_matrix(base)
        known_rows = [by_pos[p] for p in base]
        cols = list(zip(*known_rows))
        f = self.field
        full = [tuple(f.dot(rec[x], c) for c in cols) for x in range(self.n)]
        for pos, row in by_pos.items():
            if full[pos] != row:
                raise CorruptionError(f"known row at position {pos} is inconsistent")
        return full


@lru_cache(maxsize=None)
def make_mds(n: int, k: int, q: int) -> SystematicMdsCode:
    """Shared code instance per (n, k, q)."""
    return SystematicMdsCode(n, k, make_field(q))
