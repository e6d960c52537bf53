"""The super-exterior cochain complex of a Lie superalgebra.

Cochain monomials are e_value (x) f^{a_1} ... f^{a_k} with the dual word
in canonical nondecreasing order; even-parity duals never repeat, odd ones
may.  All signs in the package come from one Koszul routine: transposing
two dual generators multiplies by -(-1)^{p p'}, and a derivation slot
moving past a dual generator picks up the same factor.

The differential is assembled per (k, degree, weight, parity) slice; it
preserves all four labels, which is what makes slice-wise computation and
the weight-zero reduction possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .linalg import SparseRationalMatrix

COEFFS = ("adjoint", "pi_adjoint", "trivial")


def swapsign(pa, pb):
    """Koszul sign for transposing adjacent dual generators (or a
    derivation slot past a dual): -1 unless both parities are odd."""
    return 1 if (pa and pb) else -1


def _f2_rank(m):
    nrows, ncols = m.shape
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if m[i, c]:
                pr = i
                break
        if pr is None:
            continue
        m[[r, pr]] = m[[pr, r]]
        mask = m[:, c] == 1
        mask[r] = False
        m[mask] ^= m[r]
        r += 1
    return r


def _conserved_f2_labels(algebra):
    """Mod-2 gradings of the algebra: labels with l(k) = l(i) + l(j)
    whenever [e_i, e_j] has a component on e_k.  Found as the F_2 kernel
    of the relation matrix; includes parity and degree mod 2, and for the
    Poisson-type families genuinely finer invariants."""
    import numpy as np

    d = algebra.dim
    rels = set()
    for (i, j), terms in algebra.items():
        for k in terms:
            row = [0] * d
            row[i] ^= 1
            row[j] ^= 1
            row[k] ^= 1
            rels.add(tuple(row))
    if not rels:
        return []
    m = np.array(sorted(rels), dtype=np.int8) % 2
    # F_2 row reduction of m to find kernel of the relation map
    nrows, ncols = m.shape
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if m[i, c]:
                pr = i
                break
        if pr is None:
            continue
        m[[r, pr]] = m[[pr, r]]
        mask = m[:, c] == 1
        mask[r] = False
        m[mask] ^= m[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    labels = []
    for fc in free:
        lab = [0] * ncols
        lab[fc] = 1
        for ri, pc in enumerate(pivots):
            if m[ri, fc]:
                lab[pc] = 1
        labels.append(tuple(lab))
    # drop labels already determined by parity, degree and weight mod 2:
    # they can never split a (degree, weight, parity) slice
    known = [tuple(b.parity for b in algebra.basis),
             tuple(b.degree % 2 for b in algebra.basis)]
    for t in range(algebra.weight_rank):
        known.append(tuple(b.weight[t] % 2 for b in algebra.basis))
    kept = []
    basis_rows = [np.array(k, dtype=np.int8) for k in known]
    for lab in labels:
        stack = np.array(basis_rows + [np.array(lab, dtype=np.int8)])
        if _f2_rank(stack.copy()) > _f2_rank(np.array(basis_rows, dtype=np.int8).copy()):
            kept.append(lab)
            basis_rows.append(np.array(lab, dtype=np.int8))
    return kept


def sort_word(word, parities):
    """Canonical form of a dual word: (sign, sorted tuple), or None if the
    word vanishes (a repeated even-parity dual)."""
    w = list(word)
    sign = 1
    for i in range(1, len(w)):
        x = w[i]
        px = parities[x]
        j = i - 1
        while j >= 0 and w[j] > x:
            if not (px and parities[w[j]]):
                sign = -sign
            w[j + 1] = w[j]
            j -= 1
        w[j + 1] = x
        if j >= 0 and w[j] == x and not px:
            return None
    return sign, tuple(w)


def word_parity(word, parities):
    return sum(parities[a] for a in word) % 2


@dataclass(frozen=True)
class CochainMonomial:
    """API-level view of a monomial; internally monomials are raw tuples."""

    value_index: object  # int, or None for trivial coefficients
    dual_indices: tuple

    def key(self):
        return (-1 if self.value_index is None else self.value_index,
                self.dual_indices)


class ComplexData:
    """Per-(algebra, coefficients) differential tables and sign data."""

    def __init__(self, algebra, coeff="adjoint"):
        if coeff not in COEFFS:
            raise ValueError(f"unknown coefficients {coeff!r}")
        self.algebra = algebra
        self.coeff = coeff
        self.parities = [b.parity for b in algebra.basis]
        self.degrees = [b.degree for b in algebra.basis]
        self.weights = [b.weight for b in algebra.basis]
        # m[i<=j] with m_ii = c_ii/2 represents the bracket 2-cochain
        pair_table = {}
        action_table = {}
        for (i, j), terms in algebra.items():
            if i > j:
                continue
            for k, v in terms.items():
                m = v / 2 if i == j else v
                pair_table.setdefault(k, []).append((i, j, m))
        for gamma in pair_table:
            pair_table[gamma].sort()
        for nu in range(algebra.dim):
            acts = {}
            for gamma, rows in pair_table.items():
                for (i, j, m) in rows:
                    if i == nu and j == nu:
                        acts[(nu, gamma)] = acts.get((nu, gamma), Fraction(0)) + 2 * m
                    elif i == nu:
                        acts[(j, gamma)] = acts.get((j, gamma), Fraction(0)) + m
                    elif j == nu:
                        s = swapsign(self.parities[nu], self.parities[i])
                        acts[(i, gamma)] = acts.get((i, gamma), Fraction(0)) + s * m
            action_table[nu] = sorted(
                (s, c, v) for (s, c), v in acts.items() if v
            )
        self.pair_table = pair_table
        self.action_table = action_table
        self.f2_labels = _conserved_f2_labels(algebra)

    def monomial_f2_label(self, mono):
        """Conserved mod-2 label vector; the differential preserves it, so
        slices split into independent blocks along it."""
        if not self.f2_labels:
            return ()
        value, word = mono
        out = []
        for lab in self.f2_labels:
            x = lab[value] if value is not None else 0
            for a in word:
                x ^= lab[a]
            out.append(x)
        return tuple(out)

    # -- monomial attributes --------------------------------------------

    def monomial_parity(self, mono):
        """Internal parity p(value) + sum p(duals), plus 1 for pi-adjoint."""
        value, word = mono
        q = word_parity(word, self.parities)
        if value is not None:
            q = (q + self.parities[value]) % 2
        if self.coeff == "pi_adjoint":
            q = (q + 1) % 2
        return q

    def monomial_degree(self, mono):
        value, word = mono
        d = self.degrees[value] if value is not None else 0
        return d - sum(self.degrees[a] for a in word)

    def monomial_weight(self, mono):
        value, word = mono
        r = self.algebra.weight_rank
        w = list(self.weights[value]) if value is not None else [0] * r
        for a in word:
            wa = self.weights[a]
            for t in range(r):
                w[t] -= wa[t]
        return tuple(w)

    # -- the differential -------------------------------------------------

    def d_monomial(self, mono):
        """Image of one monomial under the differential, as a dict."""
        value, word = mono
        par = self.parities
        k = len(word)
        out = {}

        def put(key, coeff):
            s = out.get(key, Fraction(0)) + coeff
            if s:
                out[key] = s
            else:
                out.pop(key, None)

        if value is not None:
            q = (par[value] + word_parity(word, par)) % 2
            g1 = -1 if (q + k - 1) % 2 else 1
            g2 = -1 if q == 0 else 1  # -(-1)^q
            for (s, c, coef) in self.action_table[value]:
                r = sort_word(word + (s,), par)
                if r is None:
                    continue
                sgn, neww = r
                put((c, neww), g1 * coef * sgn)
        else:
            g2 = 1
        evens_before = 0
        for t in range(k):
            gamma = word[t]
            if par[gamma]:
                sigma = -1 if evens_before % 2 else 1
            else:
                sigma = -1 if t % 2 else 1
                evens_before += 1
            rest = word[:t] + word[t + 1:]
            for (i, j, m) in self.pair_table.get(gamma, ()):
                r = sort_word((i, j) + rest, par)
                if r is None:
                    continue
                sgn, neww = r
                put((value, neww), g2 * sigma * m * sgn)
        return out

    def d_cochain(self, terms):
        """Differential of a sparse cochain {(value, word): coeff}."""
        out = {}
        for mono, coeff in terms.items():
            for key, v in self.d_monomial(mono).items():
                s = out.get(key, Fraction(0)) + coeff * v
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return out


@dataclass
class ComplexSlice:
    k: int
    degree: object  # int or None (no filter)
    weight: object  # tuple or None (no filter)
    parity: object  # 0/1 or None (no filter)
    basis: list  # ordered list of (value, word) monomials

    def __post_init__(self):
        self.index = {m: i for i, m in enumerate(self.basis)}

    @property
    def dim(self):
        return len(self.basis)


def _suffix_bounds(values):
    """suffix_min[s], suffix_max[s] over values[s:]."""
    n = len(values)
    mins = [0] * (n + 1)
    maxs = [0] * (n + 1)
    if n:
        mins[n - 1] = maxs[n - 1] = values[n - 1]
        for s in range(n - 2, -1, -1):
            mins[s] = min(values[s], mins[s + 1])
            maxs[s] = max(values[s], maxs[s + 1])
    return mins, maxs


def enumerate_words(data, k, deg_target, wt_target):
    """All canonical dual words of length k with the given total degree
    and weight of the *word part* (sums over letters); None = no filter."""
    par = data.parities
    degs = data.degrees
    wts = data.weights
    d = len(par)
    rank = data.algebra.weight_rank
    dmin, dmax = _suffix_bounds(degs)
    wmin = []
    wmax = []
    for t in range(rank):
        mn, mx = _suffix_bounds([w[t] for w in wts])
        wmin.append(mn)
        wmax.append(mx)
    out = []
    word = []

    def rec(start, remaining, deg_rem, wt_rem):
        if remaining == 0:
            if (deg_target is None or deg_rem == 0) and (
                wt_target is None or all(x == 0 for x in wt_rem)
            ):
                out.append(tuple(word))
            return
        if start >= d:
            return
        if deg_target is not None:
            lo = remaining * dmin[start]
            hi = remaining * dmax[start]
            if not (lo <= deg_rem <= hi):
                return
        if wt_target is not None:
            for t in range(rank):
                lo = remaining * wmin[t][start]
                hi = remaining * wmax[t][start]
                if not (lo <= wt_rem[t] <= hi):
                    return
        for a in range(start, d):
            # even duals may not repeat
            nxt = a if par[a] else a + 1
            word.append(a)
            rec(
                nxt,
                remaining - 1,
                deg_rem - degs[a] if deg_target is not None else 0,
                tuple(wt_rem[t] - wts[a][t] for t in range(rank))
                if wt_target is not None
                else wt_rem,
            )
            word.pop()

    rec(0, k, deg_rem=deg_target if deg_target is not None else 0,
        wt_rem=tuple(wt_target) if wt_target is not None else ())
    return out


def enumerate_slice(data, k, degree=None, weight=None, parity=None):
    """Deterministically ordered monomial basis of a complex slice.

    data: ComplexData; degree/weight/parity of None mean "all".
    """
    if k < 0:
        raise ValueError("cochain degree must be >= 0")
    basis = []
    if data.coeff == "trivial":
        deg_t = -degree if degree is not None else None
        words = enumerate_words(data, k, deg_t,
                                tuple(-x for x in weight) if weight is not None else None)
        for w in words:
            basis.append((None, w))
    else:
        for nu in range(data.algebra.dim):
            deg_t = data.degrees[nu] - degree if degree is not None else None
            wt_t = (
                tuple(data.weights[nu][t] - weight[t]
                      for t in range(data.algebra.weight_rank))
                if weight is not None
                else None
            )
            for w in enumerate_words(data, k, deg_t, wt_t):
                basis.append((nu, w))
    if parity is not None:
        basis = [m for m in basis if data.monomial_parity(m) == parity]
    return ComplexSlice(k, degree, weight, parity, basis)


def differential_matrix(data, source, target):
    """Matrix of the differential from a slice to the next one.

    Columns follow source.basis, rows follow target.basis.  Every image
    monomial must land in the target slice; anything else means the slices
    are mismatched and raises.
    """
    if target.k != source.k + 1:
        raise ValueError("target must have cochain degree source.k + 1")
    for label in ("degree", "weight", "parity"):
        if getattr(source, label) != getattr(target, label):
            raise ValueError(f"slice {label} filters differ")
    m = SparseRationalMatrix(target.dim, source.dim)
    idx = target.index
    for col, mono in enumerate(source.basis):
        for key, v in data.d_monomial(mono).items():
            row = idx.get(key)
            if row is None:
                raise ValueError(
                    f"differential image {key} escapes the target slice"
                )
            m.add_to(row, col, v)
    return m


def check_grading(data, k_max):
    """Verify the differential preserves (degree, weight, parity) labels
    on the full complex up to k_max; returns the list of defects."""
    defects = []
    for k in range(k_max + 1):
        src = enumerate_slice(data, k)
        for mono in src.basis:
            d0 = data.monomial_degree(mono)
            w0 = data.monomial_weight(mono)
            q0 = data.monomial_parity(mono)
            for key in data.d_monomial(mono):
                if (
                    data.monomial_degree(key) != d0
                    or data.monomial_weight(key) != w0
                    or data.monomial_parity(key) != q0
                ):
                    defects.append((k, mono, key))
    return defects


def cochain_space_dimension(data, k):
    """Closed-form dim C^k (module dim times super-exterior count)."""
    from math import comb

    d0 = sum(1 for p in data.parities if p == 0)
    d1 = len(data.parities) - d0
    total = 0
    for a in range(min(k, d0) + 1):
        b = k - a
        if d1 == 0 and b > 0:
            continue
        total += comb(d0, a) * (comb(d1 + b - 1, b) if b else 1)
    if data.coeff == "trivial":
        return total
    return total * data.algebra.dim


def dump_slice_matrix(data, source, target, fh):
    """Coordinate dump of a slice differential with a labeled header."""
    m = differential_matrix(data, source, target)
    m.dump(
        fh,
        header=(
            ("k", source.k),
            ("degree", source.degree),
            ("weight", source.weight),
            ("parity", source.parity),
            ("dims", f"{target.dim} {source.dim}"),
        ),
    )
    return m
