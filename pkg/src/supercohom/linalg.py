"""Exact linear algebra over the rationals for sparse matrices.

Everything here is deterministic and exact: ranks via fraction-free
(integer-preserving) elimination, kernels in echelon form over Fraction,
and a fast modular path whose result is a certified lower bound for the
rational rank (agreement of several independent primes is the default
certificate, exact elimination the audit trail).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

# Active-submatrix size below which modular elimination switches to a dense
# numpy kernel.  31-bit primes keep products of two residues inside int64.
_DENSE_COLS = 1500
_DENSE_LIMIT = 4_000_000


class BadPrimeError(ValueError):
    """Raised when a requested prime divides a denominator of the matrix."""


@dataclass
class SparseRationalMatrix:
    """Sparse matrix with Fraction entries in coordinate form.

    Invariants: no explicit zero entries, all coordinates in range.
    """

    rows: int
    cols: int
    entries: dict = field(default_factory=dict)  # (row, col) -> Fraction

    def set(self, r, c, value):
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
        value = Fraction(value)
        if value:
            self.entries[(r, c)] = value
        else:
            self.entries.pop((r, c), None)

    def add_to(self, r, c, value):
        self.set(r, c, self.entries.get((r, c), Fraction(0)) + Fraction(value))

    @property
    def nnz(self):
        return len(self.entries)

    def columns(self):
        """Entries regrouped as col -> {row: value}."""
        cols = {}
        for (r, c), v in self.entries.items():
            cols.setdefault(c, {})[r] = v
        return cols

    def row_dicts(self):
        """Entries regrouped as a list of row dicts {col: value}."""
        rows = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def transpose(self):
        t = SparseRationalMatrix(self.cols, self.rows)
        t.entries = {(c, r): v for (r, c), v in self.entries.items()}
        return t

    def apply(self, vec):
        """Matrix-vector product; vec is a dict {col: Fraction}."""
        out = {}
        cols = self.columns()
        for c, x in vec.items():
            for r, v in cols.get(c, {}).items():
                s = out.get(r, Fraction(0)) + v * x
                if s:
                    out[r] = s
                else:
                    out.pop(r, None)
        return out

    def dump(self, fh, header=()):
        """Write coordinate triples `row col num den`, one per line.

        ``header`` is a sequence of key/value pairs emitted first, used by
        the cochain layer to record (k, degree, weight, dims).
        """
        for key, value in header:
            fh.write(f"# {key}: {value}\n")
        fh.write(f"# shape: {self.rows} {self.cols}\n")
        for (r, c) in sorted(self.entries):
            v = self.entries[(r, c)]
            fh.write(f"{r} {c} {v.numerator} {v.denominator}\n")


def _integer_rows(matrix):
    """Rows of the matrix scaled to integers (row scaling keeps the rank)."""
    rows = [dict() for _ in range(matrix.rows)]
    for (r, c), v in matrix.entries.items():
        rows[r][c] = v
    out = []
    for row in rows:
        if not row:
            out.append({})
            continue
        mult = 1
        for v in row.values():
            d = v.denominator
            mult = mult * d // gcd(mult, d)
        scaled = {c: int(v * mult) for c, v in row.items()}
        g = 0
        for x in scaled.values():
            g = gcd(g, x)
        if g > 1:
            scaled = {c: x // g for c, x in scaled.items()}
        out.append(scaled)
    return out


def _normalize_row(row):
    g = 0
    for x in row.values():
        g = gcd(g, x)
        if g == 1:
            return row
    if g > 1:
        return {c: x // g for c, x in row.items()}
    return row


def _eliminate_integer_rows(rows, record_pivots=False):
    """Fraction-free elimination on integer row dicts.

    Pivots are chosen on the sparsest active column, then the sparsest row
    in it, ties broken by lowest index.  Returns the rank, and optionally
    the (pivot column, reduced row) list for back-substitution.
    """
    col_rows = {}
    for i, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(i)
    active_rows = {i for i, row in enumerate(rows) if row}
    pivots = []
    rank = 0
    while col_rows:
        c0 = min(col_rows, key=lambda c: (len(col_rows[c]), c))
        cand = col_rows[c0]
        r0 = min(cand, key=lambda r: (len(rows[r]), r))
        piv_row = rows[r0]
        piv = piv_row[c0]
        rank += 1
        active_rows.discard(r0)
        for c in piv_row:
            s = col_rows.get(c)
            if s is not None:
                s.discard(r0)
                if not s:
                    del col_rows[c]
        victims = list(col_rows.get(c0, ()))
        for r in victims:
            row = rows[r]
            f = row[c0]
            new_row = {}
            for c, v in row.items():
                if c not in piv_row:
                    new_row[c] = v * piv
            for c, v in piv_row.items():
                nv = row.get(c, 0) * piv - f * v
                if nv:
                    new_row[c] = nv
            new_row = _normalize_row(new_row)
            for c in row:
                if c not in new_row:
                    s = col_rows.get(c)
                    if s is not None:
                        s.discard(r)
                        if not s:
                            del col_rows[c]
            for c in new_row:
                if c not in row:
                    col_rows.setdefault(c, set()).add(r)
            rows[r] = new_row
        if record_pivots:
            pivots.append((c0, dict(piv_row)))
        if c0 in col_rows and not col_rows[c0]:
            del col_rows[c0]
    if record_pivots:
        return rank, pivots
    return rank


def rank_exact(matrix):
    """Rank over Q by fraction-free elimination with sparsity pivoting."""
    return _eliminate_integer_rows(_integer_rows(matrix))


def _rank_mod_p(rows, p):
    """Rank of integer row dicts mod p.

    Boundary-style matrices peel down dramatically: a singleton row or
    singleton column yields a pivot with zero fill-in, so those are taken
    greedily; the remaining core falls back to sparsity-pivoted
    elimination with a dense numpy finish.
    """
    reduced = []
    for row in rows:
        rr = {}
        for c, v in row.items():
            x = v % p
            if x:
                rr[c] = x
        reduced.append(rr)
    col_rows = {}
    for i, row in enumerate(reduced):
        for c in row:
            col_rows.setdefault(c, set()).add(i)
    rank = 0
    cols_q = [c for c, s in col_rows.items() if len(s) == 1]
    rows_q = [r for r, row in enumerate(reduced) if len(row) == 1]

    def retire_row(r):
        row = reduced[r]
        reduced[r] = {}
        for c in row:
            s = col_rows.get(c)
            if s is None:
                continue
            s.discard(r)
            if not s:
                del col_rows[c]
            elif len(s) == 1:
                cols_q.append(c)

    def kill_column(c):
        # pivot row had this column only; victims just lose one entry
        s = col_rows.pop(c, None)
        if not s:
            return
        for r in s:
            row = reduced[r]
            row.pop(c, None)
            if len(row) == 1:
                rows_q.append(r)

    while True:
        while cols_q or rows_q:
            if cols_q:
                c = cols_q.pop()
                s = col_rows.get(c)
                if s is None or len(s) != 1:
                    continue
                r = next(iter(s))
                rank += 1
                retire_row(r)
            else:
                r = rows_q.pop()
                row = reduced[r]
                if len(row) != 1:
                    continue
                c = next(iter(row))
                if r not in col_rows.get(c, ()):
                    continue
                rank += 1
                reduced[r] = {}
                col_rows[c].discard(r)
                kill_column(c)
        if not col_rows:
            return rank
        ncols = len(col_rows)
        live = {r for s in col_rows.values() for r in s}
        if ncols <= _DENSE_COLS and ncols * len(live) <= _DENSE_LIMIT:
            rank += _dense_rank_mod_p(reduced, sorted(live), sorted(col_rows), p)
            return rank
        c0 = min(col_rows, key=lambda c: (len(col_rows[c]), c))
        cand = col_rows[c0]
        r0 = min(cand, key=lambda r: (len(reduced[r]), r))
        piv_row = dict(reduced[r0])
        inv = pow(piv_row[c0], p - 2, p)
        rank += 1
        retire_row(r0)
        victims = list(col_rows.get(c0, ()))
        for r in victims:
            row = reduced[r]
            f = row[c0] * inv % p
            for c, v in piv_row.items():
                new = (row.get(c, 0) - f * v) % p
                if new:
                    if c not in row:
                        col_rows.setdefault(c, set()).add(r)
                    row[c] = new
                else:
                    if c in row:
                        del row[c]
                        s = col_rows.get(c)
                        if s is not None:
                            s.discard(r)
                            if not s:
                                del col_rows[c]
                            elif len(s) == 1:
                                cols_q.append(c)
            if len(row) == 1:
                rows_q.append(r)


def _dense_rank_mod_p(reduced, live_rows, live_cols, p):
    col_pos = {c: j for j, c in enumerate(live_cols)}
    m = np.zeros((len(live_rows), len(live_cols)), dtype=np.int64)
    for i, r in enumerate(live_rows):
        for c, v in reduced[r].items():
            m[i, col_pos[c]] = v
    rank = 0
    row = 0
    nrows, ncols = m.shape
    for col in range(ncols):
        piv = None
        for i in range(row, nrows):
            if m[i, col]:
                piv = i
                break
        if piv is None:
            continue
        if piv != row:
            m[[row, piv]] = m[[piv, row]]
        inv = pow(int(m[row, col]), p - 2, p)
        m[row] = m[row] * inv % p
        mask = m[row + 1:, col] != 0
        if mask.any():
            sub = m[row + 1:]
            sub[mask] = (sub[mask] - sub[mask][:, col][:, None] * m[row]) % p
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


@dataclass
class ModularRank:
    ranks: dict  # prime -> rank
    certified: bool

    @property
    def rank(self):
        return max(self.ranks.values()) if self.ranks else 0


def rank_modular(matrix, primes):
    """Rank mod each given prime (a lower bound for the rational rank).

    The result is flagged certified when all primes agree.  A prime that
    divides one of the entry denominators is rejected.
    """
    primes = list(primes)
    if not primes:
        raise ValueError("at least one prime required")
    for v in matrix.entries.values():
        for p in primes:
            if v.denominator % p == 0:
                raise BadPrimeError(f"prime {p} divides a denominator")
    rows = _integer_rows(matrix)
    ranks = {}
    for p in primes:
        ranks[p] = _rank_mod_p([dict(r) for r in rows], p)
    certified = len(set(ranks.values())) == 1
    return ModularRank(ranks=ranks, certified=certified)


def _echelonize(matrix):
    """Row echelon data over Q: list of (pivot col, row dict of Fractions).

    Pivot columns are strictly increasing along the list and each returned
    row is normalized to leading entry 1 and fully reduced against the
    other pivots (RREF), so the result is canonical.

    Forward elimination clears a pivot's column from all *later* rows, so
    a pivot row may still hold entries at pivots chosen after it; rows are
    therefore back-reduced in reverse chronological order, each against the
    already-clean later ones.
    """
    rows = _integer_rows(matrix)
    rank, pivots = _eliminate_integer_rows(rows, record_pivots=True)
    clean = []  # reverse-chronological, fully reduced
    clean_by_col = {}
    for c0, row in reversed(pivots):
        piv = row[c0]
        frac = {c: Fraction(v, piv) for c, v in row.items()}
        for c1 in list(frac):
            other = clean_by_col.get(c1)
            if other is None or c1 == c0:
                continue
            f = frac.get(c1)
            if not f:
                continue
            for c, v in other.items():
                new = frac.get(c, Fraction(0)) - f * v
                if new:
                    frac[c] = new
                else:
                    frac.pop(c, None)
        clean.append((c0, frac))
        clean_by_col[c0] = frac
    clean.sort(key=lambda t: t[0])
    return clean


def kernel_basis(matrix):
    """Echelon-normalized basis of the exact rational null space.

    Returns a list of dicts {col: Fraction}; the basis vector attached to
    free column c has entry 1 at c and support only on pivot columns
    otherwise.
    """
    rref = _echelonize(matrix)
    pivot_cols = [c for c, _ in rref]
    pivot_set = set(pivot_cols)
    basis = []
    for c in range(matrix.cols):
        if c in pivot_set:
            continue
        vec = {c: Fraction(1)}
        for pc, row in rref:
            coeff = row.get(c)
            if coeff:
                vec[pc] = -coeff
        basis.append(vec)
    return basis


class ImageReducer:
    """Canonical reduction modulo the column space of a matrix.

    The column space is echelonized once; ``reduce`` maps any vector with
    ``matrix.rows`` coordinates to the canonical representative of its
    coset (zero exactly for vectors in the image).  Idempotent and linear.
    """

    def __init__(self, matrix):
        self.nrows = matrix.rows
        self._rref = _echelonize(matrix.transpose())

    def reduce(self, vec):
        out = dict(vec)
        for pc, row in self._rref:
            f = out.get(pc)
            if f:
                for c, v in row.items():
                    new = out.get(c, Fraction(0)) - f * v
                    if new:
                        out[c] = new
                    else:
                        out.pop(c, None)
        return out


def reduce_mod_image(vec, matrix):
    """Canonical coset representative of vec modulo the column space."""
    if any(r < 0 or r >= matrix.rows for r in vec):
        raise IndexError("vector coordinate outside matrix row range")
    return ImageReducer(matrix).reduce(vec)


def solve_in_image(vec, matrix):
    """Whether vec lies in the column space (exact)."""
    return not reduce_mod_image(vec, matrix)


def solve(matrix, rhs):
    """One exact solution x of M x = rhs, or None; x and rhs are dicts."""
    aug = SparseRationalMatrix(matrix.rows, matrix.cols + 1)
    aug.entries = dict(matrix.entries)
    for r, v in rhs.items():
        aug.set(r, matrix.cols, -Fraction(v))
    for vec in kernel_basis(aug):
        t = vec.get(matrix.cols)
        if t:
            return {c: v / t for c, v in vec.items() if c != matrix.cols}
    if not rhs:
        return {}
    return None
