"""Finite-dimensional Lie superalgebras as exact structure-constant data.

A SuperAlgebra is an ordered basis with parities, integer degrees and
integer weight vectors, plus a sparse rational structure tensor
[e_i, e_j] = sum_k c[i,j][k] e_k.  Validation (super-antisymmetry, the
super Jacobi identity, parity/degree/weight homogeneity) is exact; a
valid algebra has defect count zero, not "small".

Generic surgery: derived subalgebra and quotient by the center, both
performed blockwise per (degree, weight) so the result stays graded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import SparseRationalMatrix, kernel_basis, _echelonize


@dataclass(frozen=True)
class BasisVector:
    index: int
    name: str
    parity: int  # 0 even, 1 odd
    degree: int = 0
    weight: tuple = ()

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"parity must be 0 or 1, got {self.parity}")


class SuperAlgebra:
    """Immutable after construction; safe to share across workers."""

    def __init__(self, basis, brackets, name="", validate=True):
        """brackets: dict (i, j) -> {k: Fraction}, zero entries omitted."""
        self.basis = tuple(basis)
        self.name = name
        self.dim = len(self.basis)
        wlen = {len(b.weight) for b in self.basis}
        if len(wlen) > 1:
            raise ValueError("inconsistent weight vector lengths")
        self.weight_rank = wlen.pop() if wlen else 0
        table = {}
        for (i, j), terms in brackets.items():
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise IndexError(f"bracket index ({i},{j}) out of range")
            clean = {k: Fraction(v) for k, v in terms.items() if Fraction(v)}
            for k in clean:
                if not 0 <= k < self.dim:
                    raise IndexError(f"bracket target {k} out of range")
            if clean:
                table[(i, j)] = clean
        self._table = table
        if validate:
            bad = self.check_antisymmetry()
            if bad:
                raise ValueError(f"super-antisymmetry fails at {bad[:3]}...")
            bad = self.check_homogeneity()
            if bad:
                raise ValueError(f"grading homogeneity fails at {bad[:3]}...")

    # -- basic structure ---------------------------------------------------

    def parity(self, i):
        return self.basis[i].parity

    def degree(self, i):
        return self.basis[i].degree

    def weight(self, i):
        return self.basis[i].weight

    @property
    def superdim(self):
        even = sum(1 for b in self.basis if b.parity == 0)
        return (even, self.dim - even)

    def structure(self, i, j):
        """[e_i, e_j] as a dict {k: Fraction}."""
        return self._table.get((i, j), {})

    def items(self):
        return self._table.items()

    def bracket(self, a, b):
        """Bilinear extension; a, b are dicts {index: Fraction}."""
        out = {}
        for i, ca in a.items():
            if not 0 <= i < self.dim:
                raise IndexError(f"index {i} out of range")
            for j, cb in b.items():
                if not 0 <= j < self.dim:
                    raise IndexError(f"index {j} out of range")
                for k, c in self.structure(i, j).items():
                    s = out.get(k, Fraction(0)) + ca * cb * c
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
        return out

    # -- validation --------------------------------------------------------

    def check_antisymmetry(self):
        """[x,y] = -(-1)^{p(x)p(y)} [y,x]; returns violating pairs."""
        bad = []
        for i in range(self.dim):
            for j in range(i, self.dim):
                sign = -((-1) ** (self.parity(i) * self.parity(j)))
                lhs = self.structure(i, j)
                rhs = self.structure(j, i)
                keys = set(lhs) | set(rhs)
                for k in keys:
                    if lhs.get(k, Fraction(0)) != sign * rhs.get(k, Fraction(0)):
                        bad.append((i, j))
                        break
        return bad

    def check_homogeneity(self):
        """c_ijk nonzero forces parity/degree/weight additivity."""
        bad = []
        for (i, j), terms in self._table.items():
            p = (self.parity(i) + self.parity(j)) % 2
            d = self.degree(i) + self.degree(j)
            w = tuple(a + b for a, b in zip(self.weight(i), self.weight(j)))
            for k in terms:
                if self.parity(k) != p or self.degree(k) != d or self.weight(k) != w:
                    bad.append((i, j, k))
        return bad

    def check_jacobi(self):
        """Exhaustive super Jacobi scan; returns violating triples."""
        bad = []
        for i in range(self.dim):
            for j in range(i, self.dim):
                bij = self.structure(i, j)
                for k in range(j, self.dim):
                    # [[i,j],k] - [i,[j,k]] + (-1)^{p_i p_j} [j,[i,k]] = 0
                    acc = {}
                    for m, c in bij.items():
                        for t, v in self.structure(m, k).items():
                            acc[t] = acc.get(t, Fraction(0)) + c * v
                    for m, c in self.structure(j, k).items():
                        for t, v in self.structure(i, m).items():
                            acc[t] = acc.get(t, Fraction(0)) - c * v
                    sgn = (-1) ** (self.parity(i) * self.parity(j))
                    for m, c in self.structure(i, k).items():
                        for t, v in self.structure(j, m).items():
                            acc[t] = acc.get(t, Fraction(0)) + sgn * c * v
                    if any(acc.values()):
                        bad.append((i, j, k))
        return bad

    def validate_fully(self):
        return {
            "antisymmetry": self.check_antisymmetry(),
            "homogeneity": self.check_homogeneity(),
            "jacobi": self.check_jacobi(),
        }

    # -- surgery -----------------------------------------------------------

    def center(self):
        """Basis of {x : [x, g] = 0} as dicts {index: Fraction}."""
        m = SparseRationalMatrix(self.dim * self.dim, self.dim)
        for (i, j), terms in self._table.items():
            for k, v in terms.items():
                m.add_to(j * self.dim + k, i, v)
        return kernel_basis(m)

    def _blocks(self):
        blocks = {}
        for b in self.basis:
            blocks.setdefault((b.degree, b.weight, b.parity), []).append(b.index)
        return blocks

    def _subquotient(self, keep_spans, name):
        """Rebuild on a graded sub/quotient basis.

        keep_spans: dict block -> list of (pivot col, echelon row) pairs
        over original indices, as produced by _echelonize.  Each row
        becomes one new basis vector.  Structure constants are obtained by
        bracketing representatives and expressing against the retained
        rows; if the span is not closed this raises.
        """
        new_vectors = []
        rows = []
        for key in sorted(keep_spans, key=lambda t: (t[0], t[1], t[2])):
            for pc, row in keep_spans[key]:
                rows.append((key, pc, row))
        # prefer original names when a row is a single basis vector
        for idx, (key, pc, row) in enumerate(rows):
            deg, wt, par = key
            if len(row) == 1:
                nm = self.basis[pc].name
            else:
                nm = f"{name}_{idx}"
            new_vectors.append(BasisVector(idx, nm, par, deg, wt))
        block_rows = {}
        for idx, (key, pc, row) in enumerate(rows):
            block_rows.setdefault(key, []).append((idx, pc, row))

        def express(vec):
            # expansion in the new basis; the echelon rows have entry 1 at
            # their pivot and 0 at every other pivot of the same block
            out = {}
            groups = {}
            for i, c in vec.items():
                b = self.basis[i]
                groups.setdefault((b.degree, b.weight, b.parity), {})[i] = c
            for key, sub in groups.items():
                for idx, pc, row in block_rows.get(key, ()):
                    coef = sub.get(pc)
                    if not coef:
                        continue
                    out[idx] = coef
                    for c2, v2 in row.items():
                        s = sub.get(c2, Fraction(0)) - coef * v2
                        if s:
                            sub[c2] = s
                        else:
                            sub.pop(c2, None)
                if any(sub.values()):
                    raise ValueError("span not closed under bracket")
            return out

        brackets = {}
        for a, (_, _, ra) in enumerate(rows):
            for b, (_, _, rb) in enumerate(rows):
                terms = express(self.bracket(ra, rb))
                if terms:
                    brackets[(a, b)] = terms
        alg = SuperAlgebra(new_vectors, brackets, name=name)
        alg._embedding = rows  # parent-coordinate rows, index-aligned
        alg._parent_basis = self.basis
        return alg

    def derived_subalgebra(self):
        """Span of all brackets, with induced structure constants."""
        spans = {}
        for (i, j), terms in self._table.items():
            for k in terms:
                b = self.basis[k]
                key = (b.degree, b.weight, b.parity)
                break
            row = {k: v for k, v in terms.items()}
            spans.setdefault(key, []).append(row)
        keep = {}
        for key, vecs in spans.items():
            m = SparseRationalMatrix(len(vecs), self.dim)
            for r, row in enumerate(vecs):
                for c, v in row.items():
                    m.set(r, c, v)
            keep[key] = _echelonize(m)
        return self._subquotient(keep, name=f"derived({self.name})")

    def quotient_by_center(self):
        """Quotient by the center, on a graded complement basis."""
        center = self.center()
        for vec in center:
            degs = {self.basis[i].degree for i in vec}
            wts = {self.basis[i].weight for i in vec}
            pars = {self.basis[i].parity for i in vec}
            if len(degs) > 1 or len(wts) > 1 or len(pars) > 1:
                raise ValueError("center is not graded; cannot quotient")
        # complement basis: original vectors away from the echelon pivots,
        # bracket values reduced modulo the center
        center_m = SparseRationalMatrix(len(center), self.dim)
        for r, vec in enumerate(center):
            for c, v in vec.items():
                center_m.set(r, c, v)
        ech = _echelonize(center_m)
        drop = {pc for pc, _ in ech}
        keep_idx = [i for i in range(self.dim) if i not in drop]
        pos = {i: a for a, i in enumerate(keep_idx)}

        def reduce_mod_center(vec):
            out = dict(vec)
            for pc, row in ech:
                f = out.get(pc)
                if f:
                    for c, v in row.items():
                        s = out.get(c, Fraction(0)) - f * v
                        if s:
                            out[c] = s
                        else:
                            out.pop(c, None)
            return out

        new_vectors = []
        for a, i in enumerate(keep_idx):
            b = self.basis[i]
            new_vectors.append(BasisVector(a, b.name, b.parity, b.degree, b.weight))
        brackets = {}
        for i in keep_idx:
            for j in keep_idx:
                terms = reduce_mod_center(self.structure(i, j))
                if terms:
                    brackets[(pos[i], pos[j])] = {pos[k]: v for k, v in terms.items()}
        return SuperAlgebra(new_vectors, brackets, name=f"{self.name}/center")

    # -- serialization -----------------------------------------------------

    def to_definition(self):
        """The algebra-definition document (see load_definition)."""
        return {
            "name": self.name,
            "basis": [
                {
                    "name": b.name,
                    "parity": b.parity,
                    "degree": b.degree,
                    "weight": list(b.weight),
                }
                for b in self.basis
            ],
            "brackets": [
                {
                    "i": i,
                    "j": j,
                    "terms": [
                        {"k": k, "num": v.numerator, "den": v.denominator}
                        for k, v in sorted(terms.items())
                    ],
                }
                for (i, j), terms in sorted(self._table.items())
            ],
        }


def grading_element(alg, coordinate=None, eigenvalues=None):
    """Solve for an even element t with [t, e_i] = lambda_i e_i exactly.

    With ``coordinate=s`` the eigenvalues are the s-th weight component of
    each basis vector; an explicit eigenvalue list can be given instead
    (e.g. degrees).  Returns the element as a dict or None when no such
    inner element exists.
    """
    from .linalg import SparseRationalMatrix, solve

    if eigenvalues is None:
        eigenvalues = [b.weight[coordinate] for b in alg.basis]
    m = SparseRationalMatrix(alg.dim * alg.dim, alg.dim)
    rhs = {}
    for (j, i), terms in alg.items():
        for k, v in terms.items():
            m.add_to(i * alg.dim + k, j, v)
    for i, lam in enumerate(eigenvalues):
        if lam:
            rhs[i * alg.dim + i] = Fraction(lam)
    return solve(m, rhs)


def express_in_embedding(alg, parent_vec):
    """Coordinates of a parent-algebra vector in a subquotient's basis.

    Only valid for algebras produced by _subquotient; raises if the vector
    is not in the retained span.
    """
    rows = alg._embedding
    basis = alg._parent_basis
    out = {}
    groups = {}
    for i, c in parent_vec.items():
        b = basis[i]
        groups.setdefault((b.degree, b.weight, b.parity), {})[i] = Fraction(c)
    block_rows = {}
    for idx, (key, pc, row) in enumerate(rows):
        block_rows.setdefault(key, []).append((idx, pc, row))
    for key, sub in groups.items():
        for idx, pc, row in block_rows.get(key, ()):
            coef = sub.get(pc)
            if not coef:
                continue
            out[idx] = coef
            for c2, v2 in row.items():
                s = sub.get(c2, Fraction(0)) - coef * v2
                if s:
                    sub[c2] = s
                else:
                    sub.pop(c2, None)
        if any(sub.values()):
            raise ValueError("vector not in the retained span")
    return out


def load_definition(text_or_dict, name=""):
    """Build a SuperAlgebra from a definition document.

    The document has a `basis` list of {name, parity, degree, weight} and
    a `brackets` list of {i, j, terms: [{k, num, den}]}.  All SuperAlgebra
    invariants are enforced; a document violating any of them is rejected.
    """
    doc = text_or_dict
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    basis = []
    for idx, b in enumerate(doc["basis"]):
        basis.append(
            BasisVector(
                idx,
                str(b["name"]),
                int(b["parity"]),
                int(b.get("degree", 0)),
                tuple(int(x) for x in b.get("weight", ())),
            )
        )
    brackets = {}
    for entry in doc.get("brackets", ()):
        i, j = int(entry["i"]), int(entry["j"])
        terms = {
            int(t["k"]): Fraction(int(t["num"]), int(t.get("den", 1)))
            for t in entry["terms"]
        }
        brackets[(i, j)] = terms
    alg = SuperAlgebra(basis, brackets, name=name or doc.get("name", "user"))
    bad = alg.check_jacobi()
    if bad:
        raise ValueError(f"super Jacobi identity fails at triples {bad[:3]}")
    return alg
