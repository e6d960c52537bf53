"""Grassmann algebra on n odd generators, over exact rationals.

Monomials are strictly increasing tuples of generator indices; elements
are dicts {monomial: Fraction}.  Products and left partial derivatives
carry the usual anticommutation signs.  This backs the vector-field and
Poisson-type algebra constructions.
"""

from __future__ import annotations

from fractions import Fraction


def mono_mul(a, b):
    """Product of two monomials: (sign, monomial) or None if it vanishes."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return None
    merged = list(a)
    sign = 1
    for x in b:
        # insert x, counting transpositions past strictly larger entries
        pos = len(merged)
        while pos > 0 and merged[pos - 1] > x:
            pos -= 1
        sign *= (-1) ** (len(merged) - pos)
        merged.insert(pos, x)
    return sign, tuple(merged)


def mono_derive(mono, i):
    """Left derivative d/d(theta_i) of a monomial: (sign, monomial) or None."""
    if i not in mono:
        return None
    pos = mono.index(i)
    return (-1) ** pos, mono[:pos] + mono[pos + 1:]


def mul(f, g):
    """Product of two elements."""
    out = {}
    for ma, ca in f.items():
        for mb, cb in g.items():
            r = mono_mul(ma, mb)
            if r is None:
                continue
            sign, m = r
            s = out.get(m, Fraction(0)) + sign * ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def derive(f, i):
    """Left derivative of an element."""
    out = {}
    for m, c in f.items():
        r = mono_derive(m, i)
        if r is None:
            continue
        sign, mm = r
        s = out.get(mm, Fraction(0)) + sign * c
        if s:
            out[mm] = s
        else:
            out.pop(mm, None)
    return out


def add_scaled(f, g, scale=1):
    out = dict(f)
    for m, c in g.items():
        s = out.get(m, Fraction(0)) + Fraction(scale) * c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def all_monomials(n):
    """All 2^n monomials on generators 0..n-1, shortest first, then lex."""
    from itertools import combinations

    monos = []
    for k in range(n + 1):
        monos.extend(combinations(range(n), k))
    return monos


def parity(mono):
    return len(mono) % 2
