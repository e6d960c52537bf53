"""Builders for the Lie superalgebra families handled by this package.

Matrix families (gl, sl, psl), the one-parameter family osp(4|2;alpha) in
its three-sl(2) model, vector fields and divergence-free fields on a
purely odd superspace, and the Poisson/Hamiltonian tower po, h = po/center,
h' = [h, h].

Every builder returns a SuperAlgebra whose basis carries an integer degree
and a weight vector; the weight coordinates are exact ad-eigenvalues under
an explicit torus of even elements of the algebra itself, which is what
makes the weight-zero reduction of the cochain complex legitimate.  The
torus elements are recorded in ``algebra.meta['torus']``.

The Poisson family is realized with a split (hyperbolic) pairing on the
odd generators so that the torus acts diagonally with integer eigenvalues
over Q; ``po0n_ortho`` builds the orthonormal-pairing model of the same
complex algebra for cross-validation on small n.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import grassmann as gr
from .superalgebra import BasisVector, SuperAlgebra
from .linalg import SparseRationalMatrix, _echelonize

FAMILIES = (
    "gl",
    "sl",
    "sl2",
    "sl3",
    "psl22",
    "osp_4_2_alpha",
    "vect0n",
    "svect0n",
    "po0n",
    "po0n_ortho",
    "h0n",
    "h_prime_0n",
)

_CLI_ALIASES = {
    "gl": "gl",
    "sl": "sl",
    "sl2": "sl2",
    "sl3": "sl3",
    "psl22": "psl22",
    "osp42": "osp_4_2_alpha",
    "osp_4_2_alpha": "osp_4_2_alpha",
    "vect0n": "vect0n",
    "svect0n": "svect0n",
    "po0n": "po0n",
    "po0n_ortho": "po0n_ortho",
    "h0n": "h0n",
    "hprime0n": "h_prime_0n",
    "h_prime_0n": "h_prime_0n",
}


@dataclass(frozen=True)
class AlgebraSpec:
    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def key(self):
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(str(p) for p in self.params)


def parse_spec(text):
    """Parse the CLI grammar family[:param[,param]], e.g. po0n:5, osp42:3/7."""
    text = text.strip()
    if ":" in text:
        fam, _, rest = text.partition(":")
        params = []
        for tok in rest.split(","):
            tok = tok.strip()
            if re.fullmatch(r"-?\d+", tok):
                params.append(int(tok))
            else:
                params.append(Fraction(tok))
        params = tuple(params)
    else:
        fam, params = text, ()
    fam = fam.strip().lower()
    if fam not in _CLI_ALIASES:
        raise ValueError(f"unknown algebra family {fam!r}")
    return AlgebraSpec(_CLI_ALIASES[fam], params)


def _sorted_algebra(vectors, brackets, name, torus_rows=None, meta=None):
    """Reorder a raw basis by (degree, parity, name) and build the algebra.

    torus_rows: optional list of {raw_index: Fraction} realizing the weight
    functionals; re-expressed in the sorted order and stored in meta.
    """
    order = sorted(
        range(len(vectors)),
        key=lambda i: (vectors[i].degree, vectors[i].parity, vectors[i].name),
    )
    pos = {old: new for new, old in enumerate(order)}
    new_vectors = [
        BasisVector(new, vectors[old].name, vectors[old].parity,
                    vectors[old].degree, vectors[old].weight)
        for new, old in enumerate(order)
    ]
    new_brackets = {}
    for (i, j), terms in brackets.items():
        clean = {pos[k]: v for k, v in terms.items() if v}
        if clean:
            new_brackets[(pos[i], pos[j])] = clean
    alg = SuperAlgebra(new_vectors, new_brackets, name=name)
    alg.meta = dict(meta or {})
    if torus_rows is not None:
        alg.meta["torus"] = [
            {pos[i]: Fraction(v) for i, v in row.items()} for row in torus_rows
        ]
    return alg


# ----------------------------------------------------------------------
# matrix families
# ----------------------------------------------------------------------

def _build_gl(m, n):
    """gl(m|n) on matrix units, block degree and diagonal-torus weights."""
    d = m + n

    def blk(a):
        return 0 if a < m else 1

    idx = {}
    vectors = []
    for a in range(d):
        for b in range(d):
            i = len(vectors)
            idx[(a, b)] = i
            wt = [0] * d
            wt[a] += 1
            wt[b] -= 1
            vectors.append(
                BasisVector(
                    i,
                    f"E[{a + 1},{b + 1}]",
                    (blk(a) + blk(b)) % 2,
                    blk(b) - blk(a),
                    tuple(wt),
                )
            )
    brackets = {}
    for (a, b), i in idx.items():
        pi = vectors[i].parity
        for (c, e), j in idx.items():
            pj = vectors[j].parity
            terms = {}
            if b == c:
                terms[idx[(a, e)]] = terms.get(idx[(a, e)], Fraction(0)) + 1
            if e == a:
                sgn = (-1) ** (pi * pj)
                terms[idx[(c, b)]] = terms.get(idx[(c, b)], Fraction(0)) - sgn
            terms = {k: v for k, v in terms.items() if v}
            if terms:
                brackets[(i, j)] = terms
    return vectors, brackets, idx


def build_gl(m, n):
    vectors, brackets, idx = _build_gl(m, n)
    torus = [{idx[(a, a)]: Fraction(1)} for a in range(m + n)]
    return _sorted_algebra(vectors, brackets, f"gl({m}|{n})", torus)


def _sl_spans(vectors, idx, m, n):
    """Echelon spans for the supertraceless subalgebra of gl(m|n)."""
    d = m + n
    spans = {}
    for (a, b), i in idx.items():
        if a != b:
            v = vectors[i]
            key = (v.degree, v.weight, v.parity)
            spans.setdefault(key, []).append({i: Fraction(1)})
    diag_rows = []
    for a in range(d - 1):
        sgn = 1 if (a < m) == (a + 1 < m) else -1
        diag_rows.append({idx[(a, a)]: Fraction(1), idx[(a + 1, a + 1)]: Fraction(-sgn)})
    key = (0, vectors[idx[(0, 0)]].weight, 0)
    spans[key] = diag_rows
    return spans


def build_sl(m, n, name=None, degree_map=None):
    """sl(m|n): supertrace-zero matrices inside gl(m|n).

    Weights are re-expressed as eigenvalues under the supertraceless
    Cartan basis H_a (inner for sl and for quotients of it), not the full
    gl diagonal; this keeps the weight-zero reduction honest for m = n.
    """
    if (m, n) == (1, 1):
        raise ValueError("sl(1|1) is not handled (supertrace degenerates)")
    d = m + n
    signs = [1 if (a < m) == (a + 1 < m) else -1 for a in range(d - 1)]
    vectors, brackets, idx = _build_gl(m, n)
    remapped = []
    for v in vectors:
        w = v.weight
        new_w = tuple(w[a] - signs[a] * w[a + 1] for a in range(d - 1))
        deg = degree_map(v.name) if degree_map is not None else v.degree
        remapped.append(BasisVector(v.index, v.name, v.parity, deg, new_w))
    vectors = remapped
    gl = SuperAlgebra(vectors, brackets, name=f"gl({m}|{n})")
    spans = _sl_spans(vectors, idx, m, n)
    ech_spans = {}
    for key, rows in spans.items():
        mat = SparseRationalMatrix(len(rows), gl.dim)
        for r, row in enumerate(rows):
            for c, v in row.items():
                mat.set(r, c, v)
        ech_spans[key] = _echelonize(mat)
    alg = gl._subquotient(ech_spans, name=name or f"sl({m}|{n})")
    alg.meta = {}
    return alg


def build_sl_classical(size):
    """sl(n) with the principal grading deg E[a,b] = b - a."""

    def degree_map(nm):
        a, b = nm[2:-1].split(",")
        return int(b) - int(a)

    raw = build_sl(size, 0, name=f"sl{size}", degree_map=degree_map)
    return raw


def build_psl22():
    """psl(2|2) = sl(2|2) / scalar matrices, standard-format block grading."""
    sl = build_sl(2, 2)
    alg = sl.quotient_by_center()
    alg.name = "psl(2|2)"
    alg.meta = {}
    return alg


# ----------------------------------------------------------------------
# osp(4|2; alpha) in the three-sl(2) model
# ----------------------------------------------------------------------

def build_osp42(alpha):
    """The one-parameter family with even part sl(2)^3 and odd part 2x2x2.

    Odd-odd brackets are weighted by (1, alpha, -1-alpha); the three
    weights summing to zero is exactly what makes the Jacobi identity
    hold.  alpha in {0, -1} is flagged non-simple.
    """
    alpha = Fraction(alpha)
    weights3 = (Fraction(1), alpha, Fraction(-1) - alpha)
    vectors = []
    idx = {}

    def add(key, name, parity, weight):
        i = len(vectors)
        idx[key] = i
        vectors.append(BasisVector(i, name, parity, 0, weight))

    for s in range(3):
        wt = [0, 0, 0]
        wt[s] = 2
        add(("e", s), f"e{s + 1}", 0, tuple(wt))
        add(("h", s), f"h{s + 1}", 0, (0, 0, 0))
        wt[s] = -2
        add(("f", s), f"f{s + 1}", 0, tuple(wt))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                lbl = "".join("+-"[t] for t in (a, b, c))
                add(("v", a, b, c), f"v[{lbl}]", 1,
                    (1 - 2 * a, 1 - 2 * b, 1 - 2 * c))

    brackets = {}

    def put(i, j, k, coeff):
        if not coeff:
            return
        row = brackets.setdefault((i, j), {})
        row[k] = row.get(k, Fraction(0)) + Fraction(coeff)
        if not row[k]:
            del row[k]

    # sl(2) relations per factor: [h,e]=2e, [h,f]=-2f, [e,f]=h
    for s in range(3):
        e, h, f = idx[("e", s)], idx[("h", s)], idx[("f", s)]
        put(h, e, e, 2)
        put(e, h, e, -2)
        put(h, f, f, -2)
        put(f, h, f, 2)
        put(e, f, h, 1)
        put(f, e, h, -1)

    # action of sl(2) on C^2 with basis (u+, u-) = (0, 1)
    def act(gen, a):
        # returns list of (target, coeff)
        if gen == "e":
            return [(0, 1)] if a == 1 else []
        if gen == "f":
            return [(1, 1)] if a == 0 else []
        return [(a, 1 - 2 * a)]

    for s in range(3):
        for gen in ("e", "h", "f"):
            x = idx[(gen, s)]
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        v = idx[("v", a, b, c)]
                        t = (a, b, c)
                        for tgt, coeff in act(gen, t[s]):
                            tt = list(t)
                            tt[s] = tgt
                            w = idx[("v", tt[0], tt[1], tt[2])]
                            put(x, v, w, coeff)
                            put(v, x, w, -coeff)

    # symplectic pairing <u_a, u_b> and the symmetric map into sl(2):
    # P(u_a, u_b) w = <u_a, w> u_b + <u_b, w> u_a
    def pair(a, b):
        if a == b:
            return 0
        return 1 if a == 0 else -1

    def pmap(s, a, b):
        # coefficients of P(u_a, u_b) on (e_s, h_s, f_s)
        if a == b:
            return [((("e", s)), 2)] if a == 0 else [((("f", s)), -2)]
        return [((("h", s)), -1)]

    for a in range(2):
        for b in range(2):
            for c in range(2):
                i = idx[("v", a, b, c)]
                for a2 in range(2):
                    for b2 in range(2):
                        for c2 in range(2):
                            j = idx[("v", a2, b2, c2)]
                            if pair(b, b2) and pair(c, c2):
                                for key, coeff in pmap(0, a, a2):
                                    put(i, j, idx[key],
                                        weights3[0] * pair(b, b2) * pair(c, c2) * coeff)
                            if pair(a, a2) and pair(c, c2):
                                for key, coeff in pmap(1, b, b2):
                                    put(i, j, idx[key],
                                        weights3[1] * pair(a, a2) * pair(c, c2) * coeff)
                            if pair(a, a2) and pair(b, b2):
                                for key, coeff in pmap(2, c, c2):
                                    put(i, j, idx[key],
                                        weights3[2] * pair(a, a2) * pair(b, b2) * coeff)

    torus = [{idx[("h", s)]: Fraction(1)} for s in range(3)]
    meta = {"alpha": alpha, "non_simple": alpha in (0, -1)}
    return _sorted_algebra(vectors, brackets, f"osp(4|2;{alpha})", torus, meta)


# ----------------------------------------------------------------------
# vector fields on a purely odd superspace
# ----------------------------------------------------------------------

def _vect_data(n):
    monos = gr.all_monomials(n)
    vectors = []
    idx = {}
    for f in monos:
        for j in range(n):
            i = len(vectors)
            idx[(f, j)] = i
            wt = [f.count(t) for t in range(n)]
            wt[j] -= 1
            fname = "".join(f"x{t + 1}" for t in f) or "1"
            vectors.append(
                BasisVector(i, f"({fname})d{j + 1}", (len(f) + 1) % 2,
                            len(f) - 1, tuple(wt))
            )
    return monos, vectors, idx


def build_vect(n):
    """vect(0|n): derivations of the Grassmann algebra on n odd generators."""
    if n < 1:
        raise ValueError("vect(0|n) needs n >= 1")
    monos, vectors, idx = _vect_data(n)
    brackets = {}
    for (f, i), a in idx.items():
        pa = vectors[a].parity
        for (g, j), b in idx.items():
            pb = vectors[b].parity
            terms = {}
            for m, c in gr.mul({f: Fraction(1)}, gr.derive({g: Fraction(1)}, i)).items():
                k = idx[(m, j)]
                terms[k] = terms.get(k, Fraction(0)) + c
            sgn = (-1) ** (pa * pb)
            for m, c in gr.mul({g: Fraction(1)}, gr.derive({f: Fraction(1)}, j)).items():
                k = idx[(m, i)]
                terms[k] = terms.get(k, Fraction(0)) - sgn * c
            terms = {k: v for k, v in terms.items() if v}
            if terms:
                brackets[(a, b)] = terms
    torus = [{idx[((t,), t)]: Fraction(1)} for t in range(n)]
    return _sorted_algebra(vectors, brackets, f"vect(0|{n})", torus)


def divergence_matrix(n):
    """The divergence map vect(0|n) -> Grassmann algebra, as a sparse matrix.

    Row order is gr.all_monomials(n); column order is the *sorted* basis of
    build_vect(n).
    """
    monos, vectors, idx = _vect_data(n)
    alg = build_vect(n)
    name_to_new = {v.name: v.index for v in alg.basis}
    mono_pos = {m: r for r, m in enumerate(monos)}
    mat = SparseRationalMatrix(len(monos), alg.dim)
    for (f, j), old in idx.items():
        col = name_to_new[vectors[old].name]
        d = gr.mono_derive(f, j)
        if d is None:
            continue
        sign, m = d
        mat.add_to(mono_pos[m], col, sign)
    return mat, alg


def build_svect(n):
    """svect(0|n): divergence-free fields; weights reduced to the inner torus."""
    if n < 2:
        raise ValueError("svect(0|n) needs n >= 2")
    mat, vect = divergence_matrix(n)
    cols = mat.columns()
    blocks = {}
    for v in vect.basis:
        blocks.setdefault((v.degree, v.weight, v.parity), []).append(v.index)
    spans = {}
    for key, members in sorted(blocks.items(), key=lambda t: (t[0][0], t[0][1], t[0][2])):
        sub = SparseRationalMatrix(mat.rows, len(members))
        for c_new, c_old in enumerate(members):
            for r, val in cols.get(c_old, {}).items():
                sub.set(r, c_new, val)
        kern = []
        from .linalg import kernel_basis

        for vec in kernel_basis(sub):
            kern.append({members[c]: v for c, v in vec.items()})
        if kern:
            em = SparseRationalMatrix(len(kern), vect.dim)
            for r, row in enumerate(kern):
                for c, v in row.items():
                    em.set(r, c, v)
            spans[key] = _echelonize(em)
    alg = vect._subquotient(spans, name=f"svect(0|{n})")
    # weights of vect are eigenvalues under x_i d_i, which are not
    # divergence-free; the inner torus is spanned by x_i d_i - x_n d_n,
    # with eigenvalues w_i - w_n.
    vectors = [
        BasisVector(v.index, v.name, v.parity, v.degree,
                    tuple(v.weight[i] - v.weight[n - 1] for i in range(n - 1)))
        for v in alg.basis
    ]
    out = SuperAlgebra(vectors, dict(alg.items()), name=alg.name)
    from .superalgebra import express_in_embedding

    vect_idx = {v.name: v.index for v in vect.basis}
    torus = []
    for t in range(n - 1):
        parent_vec = {
            vect_idx[f"(x{t + 1})d{t + 1}"]: Fraction(1),
            vect_idx[f"(x{n})d{n}"]: Fraction(-1),
        }
        torus.append(express_in_embedding(alg, parent_vec))
    out.meta = {"torus": torus}
    return out


# ----------------------------------------------------------------------
# the Poisson tower
# ----------------------------------------------------------------------

def _poisson_pairs(n, ortho=False):
    """Contraction terms (a, b, coeff) of the pairing used in {f, g}."""
    if ortho:
        return [(a, a, Fraction(1)) for a in range(n)]
    pairs = []
    for i in range(n // 2):
        pairs.append((2 * i, 2 * i + 1, Fraction(1)))
        pairs.append((2 * i + 1, 2 * i, Fraction(1)))
    if n % 2:
        pairs.append((n - 1, n - 1, Fraction(1)))
    return pairs


def poisson_bracket(f, g, n, ortho=False):
    """{f, g} = (-1)^{p(f)} sum over pairing contractions of df dg.

    f, g are homogeneous-parity Grassmann elements as dicts.
    """
    pf = None
    for m in f:
        pf = len(m) % 2
        break
    if pf is None:
        return {}
    out = {}
    for a, b, coeff in _poisson_pairs(n, ortho):
        term = gr.mul(gr.derive(f, a), gr.derive(g, b))
        for m, c in term.items():
            s = out.get(m, Fraction(0)) + (-1) ** pf * coeff * c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def build_po(n, ortho=False):
    """po(0|n): the Grassmann algebra on n odd generators under {.,.}.

    Elements are written K_f; deg K_f = polynomial degree of f minus 2.
    The default model uses the split pairing (x1,x2), (x3,x4), ... with a
    self-paired last generator for odd n; ortho=True uses the orthonormal
    pairing instead (no rational torus; weights are empty).
    """
    if n < 1:
        raise ValueError("po(0|n) needs n >= 1")
    monos = gr.all_monomials(n)
    pos = {m: i for i, m in enumerate(monos)}
    vectors = []
    for i, m in enumerate(monos):
        if ortho:
            wt = ()
        else:
            wt = tuple(
                m.count(2 * t + 1) - m.count(2 * t) for t in range(n // 2)
            )
        fname = "".join(f"x{t + 1}" for t in m) or "1"
        vectors.append(BasisVector(i, f"K({fname})", len(m) % 2, len(m) - 2, wt))
    brackets = {}
    one = Fraction(1)
    for i, mi in enumerate(monos):
        for j, mj in enumerate(monos):
            res = poisson_bracket({mi: one}, {mj: one}, n, ortho)
            terms = {pos[m]: c for m, c in res.items()}
            if terms:
                brackets[(i, j)] = terms
    torus = None
    if not ortho:
        torus = [
            {pos[(2 * t, 2 * t + 1)]: Fraction(1)} for t in range(n // 2)
        ]
    suffix = "~ortho" if ortho else ""
    return _sorted_algebra(vectors, brackets, f"po(0|{n}){suffix}", torus)


def _pair_torus(alg, n):
    name_of = {v.name: v.index for v in alg.basis}
    return [
        {name_of[f"K(x{2 * t + 1}x{2 * t + 2})"]: Fraction(1)}
        for t in range(n // 2)
    ]


def build_h(n, ortho=False):
    alg = build_po(n, ortho).quotient_by_center()
    alg.name = f"h(0|{n})" + ("~ortho" if ortho else "")
    alg.meta = {} if ortho else {"torus": _pair_torus(alg, n)}
    return alg


def build_h_prime(n, ortho=False):
    alg = build_h(n, ortho).derived_subalgebra()
    alg.name = f"h'(0|{n})" + ("~ortho" if ortho else "")
    alg.meta = {} if ortho else {"torus": _pair_torus(alg, n)}
    return alg


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def build_algebra(spec):
    """Construct the algebra described by an AlgebraSpec (or spec string)."""
    if isinstance(spec, str):
        spec = parse_spec(spec)
    fam, params = spec.family, spec.params
    if fam == "gl":
        m, n = (int(params[0]), int(params[1])) if len(params) == 2 else (int(params[0]), 0)
        alg = build_gl(m, n)
    elif fam == "sl":
        m, n = (int(params[0]), int(params[1])) if len(params) == 2 else (int(params[0]), 0)
        alg = build_sl(m, n)
    elif fam == "sl2":
        alg = build_sl_classical(2)
    elif fam == "sl3":
        alg = build_sl_classical(3)
    elif fam == "psl22":
        alg = build_psl22()
    elif fam == "osp_4_2_alpha":
        if len(params) != 1:
            raise ValueError("osp42 takes exactly one parameter alpha")
        alg = build_osp42(params[0])
    elif fam == "vect0n":
        alg = build_vect(int(params[0]))
    elif fam == "svect0n":
        alg = build_svect(int(params[0]))
    elif fam == "po0n":
        alg = build_po(int(params[0]))
    elif fam == "po0n_ortho":
        alg = build_po(int(params[0]), ortho=True)
    elif fam == "h0n":
        alg = build_h(int(params[0]))
    elif fam == "h_prime_0n":
        alg = build_h_prime(int(params[0]))
    else:  # pragma: no cover
        raise ValueError(f"unhandled family {fam}")
    if not hasattr(alg, "meta"):
        alg.meta = {}
    alg.meta.setdefault("spec", spec.key)
    return alg
