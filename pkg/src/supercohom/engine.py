"""Slice-wise cohomology orchestration and superdimension reports.

For each grading degree (or one aggregate tower when the algebra carries
no grading) and each internal parity, the engine enumerates the
weight-zero cochain bases up to k_max + 1, assembles the differentials,
and takes ranks: dim H^k = dim C^k - rank d_k - rank d_{k-1}.

Ranks use fraction-free exact elimination on small slices and the modular
path on large ones; a modular rank counts as certified when the requested
number of independently chosen 31-bit primes agree, and is escalated to
the exact path otherwise.  Reports are deterministic byte-for-byte across
worker counts: tasks are keyed by degree, primes are derived from the task
key, and the merge order is sorted.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .cochains import ComplexData, enumerate_slice, differential_matrix
from .families import build_algebra, parse_spec
from .linalg import (
    ImageReducer,
    SparseRationalMatrix,
    kernel_basis,
    rank_exact,
    rank_modular,
    _echelonize,
)

REPORT_FORMAT = "supercohom-report-v1"
FIXTURE_FORMAT = "supercohom-fixture-v1"


@dataclass
class EngineOptions:
    weight_zero: bool = True
    workers: int = 1
    primes: int = 2
    verify_rational: bool = False
    exact_cols_limit: int = 260
    max_slice_cols: int = None
    cache_dir: str = None
    reps: bool = False

    def policy_key(self):
        return (
            self.weight_zero,
            self.primes,
            self.verify_rational,
            self.exact_cols_limit,
            self.max_slice_cols,
        )


# ----------------------------------------------------------------------
# deterministic 31-bit primes
# ----------------------------------------------------------------------

def _is_probable_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def derive_primes(seed_text, count, avoid=()):
    """`count` distinct 31-bit primes derived deterministically from text."""
    primes = []
    attempt = 0
    avoid = set(avoid)
    while len(primes) < count:
        h = hashlib.sha256(f"{seed_text}#{attempt}".encode()).digest()
        n = (int.from_bytes(h[:4], "big") | 0x40000001) & 0x7FFFFFFF
        attempt += 1
        if _is_probable_prime(n) and n not in primes and n not in avoid:
            primes.append(n)
    return primes


def _denominator_factors(matrix):
    dens = set()
    for v in matrix.entries.values():
        dens.add(v.denominator)
    return dens


# ----------------------------------------------------------------------
# tower computation
# ----------------------------------------------------------------------

def _rank_with_policy(matrix, seed_text, opts):
    """Rank of one slice differential under the certification policy."""
    if matrix.cols == 0 or matrix.nnz == 0:
        return {"rank": 0, "method": "trivial", "primes": [], "certified": True}
    if opts.verify_rational or matrix.cols <= opts.exact_cols_limit:
        return {
            "rank": rank_exact(matrix),
            "method": "exact",
            "primes": [],
            "certified": True,
        }
    dens = _denominator_factors(matrix)
    primes = []
    attempt = 0
    while len(primes) < opts.primes:
        cand = derive_primes(f"{seed_text}|{attempt}", 1, avoid=primes)[0]
        attempt += 1
        if all(d % cand for d in dens):
            primes.append(cand)
    res = rank_modular(matrix, primes)
    if res.certified:
        return {
            "rank": res.rank,
            "method": "modular",
            "primes": primes,
            "certified": True,
        }
    return {
        "rank": rank_exact(matrix),
        "method": "exact-escalated",
        "primes": primes,
        "certified": True,
    }


def _compute_tower(data, k_max, degree, opts, seed_base):
    """dims/ranks for one degree tower, both parities.

    Slices are split along every conserved mod-2 label (parity, and the
    finer invariants of the family); the differential is block diagonal
    over the classes, so ranks are taken per class and summed.

    Returns {q: {"cdims": [...], "ranks": [...], "skipped": [...]}} with
    lists over k = 0..k_max (+1 for cdims).
    """
    from .cochains import ComplexSlice

    wt0 = tuple([0] * data.algebra.weight_rank) if opts.weight_zero else None
    buckets = []  # per k: {(q, label): ComplexSlice}
    for k in range(k_max + 2):
        s = enumerate_slice(data, k, degree=degree, weight=wt0)
        b = {}
        for mono in s.basis:
            key = (data.monomial_parity(mono), data.monomial_f2_label(mono))
            b.setdefault(key, []).append(mono)
        buckets.append(
            {key: ComplexSlice(k, degree, wt0, key[0], monos)
             for key, monos in b.items()}
        )
    keys = sorted({key for b in buckets for key in b})
    out = {
        q: {
            "cdims": [0] * (k_max + 2),
            "ranks": [None] * (k_max + 1),
            "skipped": [],
        }
        for q in (0, 1)
    }
    for q in (0, 1):
        for k in range(k_max + 2):
            out[q]["cdims"][k] = sum(
                s.dim for (qq, lab), s in buckets[k].items() if qq == q
            )
    for q in (0, 1):
        info = out[q]
        for k in range(k_max + 1):
            if opts.max_slice_cols is not None and info["cdims"][k] > opts.max_slice_cols:
                info["skipped"].append({"k": k, "reason": "budget"})
                continue
            total = 0
            methods = set()
            primes = set()
            for key in keys:
                qq, lab = key
                if qq != q:
                    continue
                src = buckets[k].get(key)
                if src is None or src.dim == 0:
                    continue
                tgt = buckets[k + 1].get(key)
                if tgt is None:
                    tgt = ComplexSlice(k + 1, degree, wt0, q, [])
                    buckets[k + 1][key] = tgt
                mat = differential_matrix(data, src, tgt)
                seed = f"{seed_base}|deg={degree}|q={q}|k={k}|lab={lab}"
                res = _rank_with_policy(mat, seed, opts)
                total += res["rank"]
                methods.add(res["method"])
                primes.update(res["primes"])
            info["ranks"][k] = {
                "rank": total,
                "method": "+".join(sorted(methods)) if methods else "trivial",
                "primes": sorted(primes),
                "certified": True,
            }
    return out


_WORKER = {}


def _worker_init(algebra_key, coeff):
    alg = build_algebra(algebra_key)
    _WORKER["data"] = ComplexData(alg, coeff)


def _worker_run(args):
    degree, k_max, opts_dict, seed_base = args
    opts = EngineOptions(**opts_dict)
    tower = _compute_tower(_WORKER["data"], k_max, degree, opts, seed_base)
    return degree, tower


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------

def _convention_for(coeff):
    return "pi_shifted" if coeff == "pi_adjoint" else "plain"


def split_cell(dims_q, k, convention, natural_convention=None):
    """(even, odd) display pair from internal-parity dims under a convention.

    The displayed parity of a class folds the cochain degree into the
    internal parity: cell parity = q + k (mod 2).  dims_q is indexed by the
    coefficient-adjusted internal parity q (pi-adjoint coefficients already
    carry the extra shift), so the fold alone renders the report's natural
    convention; rendering in the other convention flips the pair.
    """
    q0, q1 = dims_q
    flip = k % 2
    if natural_convention is not None and convention != natural_convention:
        flip = (flip + 1) % 2
    if flip:
        return (q1, q0)
    return (q0, q1)


@dataclass
class CohomologyReport:
    algebra_key: str
    algebra_name: str
    superdim: tuple
    coeff: str
    convention: str
    weight_mode: str
    k_max: int
    degrees: list  # degree labels, sorted
    dims: dict  # (k, degree) -> [h_q0, h_q1]
    cochain_dims: dict  # (k, degree) -> [c_q0, c_q1]
    rank_log: list
    skipped: list  # [{"k":, "degree":, "reason":}]
    representatives: dict = field(default_factory=dict)

    # -- content ---------------------------------------------------------

    def entry(self, k, degree):
        return self.dims.get((k, degree), [0, 0])

    def cell(self, k, degree, convention=None):
        return split_cell(
            self.entry(k, degree), k, convention or self.convention, self.convention
        )

    def is_skipped(self, k, degree):
        for s in self.skipped:
            if s["k"] == k and s["degree"] == degree:
                return True
        return False

    def total_superdim(self, k, convention=None):
        even = odd = 0
        for deg in self.degrees:
            e, o = self.cell(k, deg, convention)
            even += e
            odd += o
        return (even, odd)

    # -- serialization -----------------------------------------------------

    def to_document(self):
        entries = []
        for (k, deg), dq in sorted(self.dims.items(), key=lambda t: (t[0][0], _degkey(t[0][1]))):
            if dq == [0, 0]:
                continue
            even, odd = split_cell(dq, k, self.convention)
            entries.append(
                {
                    "k": k,
                    "k_minus_1": k - 1,
                    "degree": deg,
                    "even": even,
                    "odd": odd,
                    "dims_q": list(dq),
                }
            )
        cdims = []
        for (k, deg), dq in sorted(self.cochain_dims.items(), key=lambda t: (t[0][0], _degkey(t[0][1]))):
            if dq != [0, 0]:
                cdims.append({"k": k, "degree": deg, "dims_q": list(dq)})
        return {
            "format": REPORT_FORMAT,
            "algebra": self.algebra_key,
            "algebra_name": self.algebra_name,
            "superdim": list(self.superdim),
            "coefficients": self.coeff,
            "convention": self.convention,
            "weight": self.weight_mode,
            "k_max": self.k_max,
            "degrees": self.degrees,
            "entries": entries,
            "cochain_dims": cdims,
            "ranks": self.rank_log,
            "skipped": sorted(self.skipped, key=lambda s: (s["k"], _degkey(s["degree"]))),
        }

    def to_json(self):
        return json.dumps(self.to_document(), sort_keys=True, indent=1) + "\n"


def _degkey(deg):
    return (0, deg) if isinstance(deg, int) else (1, str(deg))


def report_from_document(doc):
    if doc.get("format") != REPORT_FORMAT:
        raise ValueError("not a cohomology report document")
    dims = {}
    for e in doc["entries"]:
        dims[(e["k"], e["degree"])] = list(e["dims_q"])
    cdims = {}
    for e in doc.get("cochain_dims", ()):
        cdims[(e["k"], e["degree"])] = list(e["dims_q"])
    return CohomologyReport(
        algebra_key=doc["algebra"],
        algebra_name=doc.get("algebra_name", doc["algebra"]),
        superdim=tuple(doc.get("superdim", (0, 0))),
        coeff=doc["coefficients"],
        convention=doc["convention"],
        weight_mode=doc["weight"],
        k_max=doc["k_max"],
        degrees=list(doc["degrees"]),
        dims=dims,
        cochain_dims=cdims,
        rank_log=doc.get("ranks", []),
        skipped=list(doc.get("skipped", ())),
    )


# ----------------------------------------------------------------------
# the main entry point
# ----------------------------------------------------------------------

def structural_degree_window(data, k_max):
    """Hull of achievable cochain degrees for k = 0..k_max + 1."""
    degs = data.degrees
    if not degs:
        return (0, 0)
    lo_d, hi_d = min(degs), max(degs)
    K = k_max + 1
    return (min(lo_d, 0) - K * max(hi_d, 0), max(hi_d, 0) - K * min(lo_d, 0))


def version_hash():
    """Hash of the package sources; cache entries are keyed on it."""
    root = os.path.dirname(os.path.abspath(__file__))
    h = hashlib.sha256()
    for name in sorted(os.listdir(root)):
        if name.endswith(".py"):
            with open(os.path.join(root, name), "rb") as fh:
                h.update(name.encode())
                h.update(fh.read())
    return h.hexdigest()[:16]


def _cache_path(cache_dir, key_text):
    h = hashlib.sha256(key_text.encode()).hexdigest()[:32]
    return os.path.join(cache_dir, f"tower_{h}.json")


def cohomology(
    algebra_key,
    coeff="adjoint",
    k_max=3,
    degrees=None,
    options=None,
):
    """Superdimensions of H^k for k = 0..k_max, sliced by grading degree.

    algebra_key: spec string (e.g. "po0n:4"); degrees: explicit iterable
    of degree labels, or None for the full structural window.  Returns a
    CohomologyReport.
    """
    opts = options or EngineOptions()
    alg = build_algebra(algebra_key)
    key = alg.meta["spec"]
    data = ComplexData(alg, coeff)
    if degrees is None:
        lo, hi = structural_degree_window(data, k_max)
        degree_list = list(range(lo, hi + 1))
    else:
        degree_list = sorted(set(degrees))
    wt_mode = "zero" if opts.weight_zero else "full"
    seed0 = f"{key}|{coeff}|{wt_mode}|K={k_max}"
    ver = version_hash()

    tasks = [
        (deg, k_max, opts.__dict__, f"{seed0}|{deg}") for deg in degree_list
    ]
    results = {}
    cached = {}
    if opts.cache_dir:
        os.makedirs(opts.cache_dir, exist_ok=True)
        remaining = []
        for t in tasks:
            path = _cache_path(
                opts.cache_dir, f"{ver}|{seed0}|{t[0]}|{opts.policy_key()}"
            )
            if os.path.exists(path):
                with open(path) as fh:
                    doc = json.load(fh)
                cached[t[0]] = _tower_from_json(doc)
            else:
                remaining.append(t)
        tasks = remaining

    if opts.workers > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(
            processes=min(opts.workers, len(tasks)),
            initializer=_worker_init,
            initargs=(key, coeff),
        ) as pool:
            for deg, tower in pool.imap_unordered(_worker_run, tasks):
                results[deg] = tower
    else:
        for t in tasks:
            deg, tower = t[0], _compute_tower(data, k_max, t[0], opts, t[3])
            results[deg] = tower
    results.update(cached)

    if opts.cache_dir:
        for deg, tower in results.items():
            if deg in cached:
                continue
            path = _cache_path(
                opts.cache_dir, f"{ver}|{seed0}|{deg}|{opts.policy_key()}"
            )
            with open(path, "w") as fh:
                json.dump(_tower_to_json(tower), fh, sort_keys=True)

    dims = {}
    cochain_dims = {}
    rank_log = []
    skipped = []
    for deg in degree_list:
        tower = results[deg]
        for k in range(k_max + 1):
            cell = [0, 0]
            ccell = [0, 0]
            cell_skipped = False
            for q in (0, 1):
                info = tower[q]
                ccell[q] = info["cdims"][k]
                rk = info["ranks"][k] if k <= k_max else None
                rk_prev = info["ranks"][k - 1] if k >= 1 else {"rank": 0}
                if rk is None or rk_prev is None:
                    cell_skipped = True
                    continue
                h = info["cdims"][k] - rk["rank"] - rk_prev["rank"]
                if h < 0:
                    raise AssertionError(
                        f"negative cohomology dim at k={k} deg={deg} q={q}"
                    )
                cell[q] = h
                if info["cdims"][k] or rk["rank"]:
                    rank_log.append(
                        {
                            "k": k,
                            "degree": deg,
                            "parity": q,
                            "cols": info["cdims"][k],
                            "rank": rk["rank"],
                            "method": rk["method"],
                            "primes": rk["primes"],
                        }
                    )
            if cell_skipped:
                skipped.append({"k": k, "degree": deg, "reason": "budget"})
            elif cell != [0, 0]:
                dims[(k, deg)] = cell
            if ccell != [0, 0]:
                cochain_dims[(k, deg)] = ccell
    report = CohomologyReport(
        algebra_key=key,
        algebra_name=alg.name,
        superdim=alg.superdim,
        coeff=coeff,
        convention=_convention_for(coeff),
        weight_mode=wt_mode,
        k_max=k_max,
        degrees=degree_list,
        dims=dims,
        cochain_dims=cochain_dims,
        rank_log=sorted(
            rank_log, key=lambda r: (r["k"], _degkey(r["degree"]), r["parity"])
        ),
        skipped=skipped,
    )
    return report


def _tower_to_json(tower):
    return {
        str(q): {
            "cdims": info["cdims"],
            "ranks": info["ranks"],
            "skipped": info["skipped"],
        }
        for q, info in tower.items()
    }


def _tower_from_json(doc):
    return {int(q): info for q, info in doc.items()}


# ----------------------------------------------------------------------
# representatives
# ----------------------------------------------------------------------

def representatives(algebra_key, coeff, k, degree, options=None):
    """Echelon-normalized cocycle representatives of H^k in one slice.

    Returns a list of cochains as dicts {(value, word): Fraction}; the
    count equals the slice's cohomology dimension.  Exact arithmetic only.
    """
    opts = options or EngineOptions()
    alg = build_algebra(algebra_key)
    data = ComplexData(alg, coeff)
    wt0 = tuple([0] * alg.weight_rank) if opts.weight_zero else None
    src = enumerate_slice(data, k, degree=degree, weight=wt0)
    tgt = enumerate_slice(data, k + 1, degree=degree, weight=wt0)
    dmat = differential_matrix(data, src, tgt)
    kern = kernel_basis(dmat)
    if k == 0:
        reduced = kern
    else:
        prev = enumerate_slice(data, k - 1, degree=degree, weight=wt0)
        dprev = differential_matrix(data, prev, src)
        reducer = ImageReducer(dprev)
        reduced = [reducer.reduce(v) for v in kern]
        reduced = [v for v in reduced if v]
    if not reduced:
        return []
    m = SparseRationalMatrix(len(reduced), src.dim)
    for r, vec in enumerate(reduced):
        for c, v in vec.items():
            m.set(r, c, v)
    reps = []
    for _, row in _echelonize(m):
        reps.append({src.basis[c]: v for c, v in row.items()})
    return reps
