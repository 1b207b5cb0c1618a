"""Expression trees over the position and momentum generators.

An expression is built from the atoms ``XQ``, ``PQ``, ``ONE``, ``V(...)``
(potential of ``XQ``) and ``HQ(...)`` with ``scale``, ``add``, ``mul`` and
``sym`` (average over all orderings of every monomial).  ``mul(A, B)`` is
the operator product ``A B``: ``B`` acts first.  The same tree evaluates
either on a classical wave function in phase space or as a matrix on the
sub-lattices of a coarse density matrix.  The text form is documented in
``docs/expression_grammar.md``.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .grid import GridSpec
from .potentials import Potential, parse_potential

__all__ = [
    "Expr", "Atom", "Scale", "Add", "Mul", "Sym", "PotentialOf", "Hamiltonian",
    "XQ", "PQ", "ONE", "ExpressionError",
    "parse_expression", "polynomial_expression", "expand", "block_matrices",
]


class ExpressionError(ValueError):
    """Malformed or unsupported operator expression."""


class Expr:
    """Base node.  Subclasses are frozen dataclasses, hence hashable."""

    def __add__(self, other: "Expr") -> "Expr":
        return Add((self, other))

    def __matmul__(self, other: "Expr") -> "Expr":
        return Mul((self, other))

    def __rmul__(self, c) -> "Expr":
        return Scale(complex(c), self)

    def to_text(self) -> str:
        raise NotImplementedError

    def is_hermitian(self) -> bool:
        """Structural test: every monomial is matched by its reverse with the conjugate coefficient."""
        coeffs: dict = {}
        for c, mono in expand(self):
            coeffs[mono] = coeffs.get(mono, 0j) + c
        return all(abs(coeffs.get(tuple(reversed(m)), 0j) - c.conjugate()) < 1e-12 * (1 + abs(c))
                   for m, c in coeffs.items())

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Atom(Expr):
    name: str

    def to_text(self) -> str:
        return self.name


XQ = Atom("XQ")
PQ = Atom("PQ")
ONE = Atom("ONE")


@dataclass(frozen=True)
class PotentialOf(Expr):
    potential: Potential

    def to_text(self) -> str:
        return f"V({self.potential.to_text('expr')})"


@dataclass(frozen=True)
class Hamiltonian(Expr):
    potential: Potential

    def to_text(self) -> str:
        return f"HQ({self.potential.to_text('expr')})"


@dataclass(frozen=True)
class Scale(Expr):
    factor: complex
    inner: Expr

    def to_text(self) -> str:
        c = complex(self.factor)
        if c.imag == 0:
            num = repr(c.real)
        else:
            num = f"({c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}j)"
        return f"scale({num},{self.inner.to_text()})"


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def to_text(self) -> str:
        return "add(" + ",".join(t.to_text() for t in self.terms) + ")"


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def to_text(self) -> str:
        return "mul(" + ",".join(f.to_text() for f in self.factors) + ")"


@dataclass(frozen=True)
class Sym(Expr):
    inner: Expr

    def to_text(self) -> str:
        return f"sym({self.inner.to_text()})"


def expand(expr: Expr) -> list[tuple[complex, tuple]]:
    """Sum of ``(coefficient, ordered atoms)``; ``ONE`` disappears from products."""
    if isinstance(expr, Atom):
        if expr.name == "ONE":
            return [(1.0 + 0j, ())]
        return [(1.0 + 0j, (expr,))]
    if isinstance(expr, (PotentialOf, Hamiltonian)):
        return [(1.0 + 0j, (expr,))]
    if isinstance(expr, Scale):
        return [(complex(expr.factor) * c, m) for c, m in expand(expr.inner)]
    if isinstance(expr, Add):
        return [t for term in expr.terms for t in expand(term)]
    if isinstance(expr, Mul):
        out = [(1.0 + 0j, ())]
        for f in expr.factors:
            out = [(c1 * c2, m1 + m2) for c1, m1 in out for c2, m2 in expand(f)]
        return out
    if isinstance(expr, Sym):
        out = []
        for c, mono in expand(expr.inner):
            orders = set(itertools.permutations(mono))
            out.extend((c / len(orders), o) for o in sorted(orders, key=repr))
        return out
    raise ExpressionError(f"unknown node {expr!r}")


def polynomial_expression(coefficients: dict) -> Expr:
    """``sum c_ab sym(XQ^a PQ^b)`` from ``{(a, b): c}``."""
    terms = []
    for (a, b), c in sorted(coefficients.items()):
        factors = (XQ,) * a + (PQ,) * b
        mono = ONE if not factors else (factors[0] if len(factors) == 1 else Mul(factors))
        terms.append(Scale(complex(c), Sym(mono)))
    if not terms:
        return Scale(0j, ONE)
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


# ---------------------------------------------------------------- parsing

_NAME = re.compile(r"[A-Za-z_]+")


def parse_expression(text: str) -> Expr:
    """Inverse of ``Expr.to_text``."""
    expr, pos = _parse(text, 0)
    if text[pos:].strip():
        raise ExpressionError(f"trailing input at {pos}: {text[pos:]!r}")
    return expr


def _skip(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _expect(text: str, pos: int, char: str) -> int:
    pos = _skip(text, pos)
    if pos >= len(text) or text[pos] != char:
        raise ExpressionError(f"expected {char!r} at {pos} in {text!r}")
    return pos + 1


def _until_close(text: str, pos: int) -> tuple[str, int]:
    depth, start = 0, pos
    while pos < len(text):
        ch = text[pos]
        if ch == "(":
            depth += 1
        elif ch == ")":
            if depth == 0:
                return text[start:pos], pos
            depth -= 1
        elif ch == "," and depth == 0:
            return text[start:pos], pos
        pos += 1
    raise ExpressionError(f"unbalanced parentheses in {text!r}")


def _parse(text: str, pos: int) -> tuple[Expr, int]:
    pos = _skip(text, pos)
    m = _NAME.match(text, pos)
    if not m:
        raise ExpressionError(f"expected a name at {pos} in {text!r}")
    name, pos = m.group(0), m.end()
    if name in ("XQ", "PQ", "ONE"):
        return Atom(name), pos
    pos = _expect(text, pos, "(")
    if name in ("V", "HQ"):
        body, pos = _until_close(text, pos)
        pot = parse_potential(body.strip())
        node = PotentialOf(pot) if name == "V" else Hamiltonian(pot)
        return node, _expect(text, pos, ")")
    if name == "scale":
        body, pos = _until_close(text, pos)
        try:
            factor = complex(body.strip().replace(" ", ""))
        except ValueError as exc:
            raise ExpressionError(f"bad scale factor {body!r}") from exc
        pos = _expect(text, pos, ",")
        inner, pos = _parse(text, pos)
        return Scale(factor, inner), _expect(text, pos, ")")
    if name in ("add", "mul", "sym"):
        args = []
        while True:
            arg, pos = _parse(text, pos)
            args.append(arg)
            pos = _skip(text, pos)
            if pos < len(text) and text[pos] == ",":
                pos += 1
                continue
            pos = _expect(text, pos, ")")
            break
        if name == "sym":
            if len(args) != 1:
                raise ExpressionError("sym takes one argument")
            return Sym(args[0]), pos
        if len(args) < 2:
            raise ExpressionError(f"{name} needs at least two arguments")
        return (Add if name == "add" else Mul)(tuple(args)), pos
    raise ExpressionError(f"unknown operator {name!r}")


# ------------------------------------------------------ matrix evaluation

@lru_cache(maxsize=64)
def _block_generators(grid: GridSpec, parity: int):
    """Position and momentum matrices on one coarse sub-lattice (spacing 2 dz)."""
    size = (grid.n_z + grid.n_p) // 2
    dx = 2 * grid.dz
    x = ((np.arange(size) * 2 + parity) - grid.n_z // 2 - grid.n_p // 2) * grid.dz
    k = 2 * math.pi * sfft.fftfreq(size, d=dx)
    if size % 2 == 0:
        k[size // 2] = 0.0  # drop the unpaired Nyquist mode so P stays Hermitian
    f = sfft.fft(np.eye(size), axis=0)
    p = sfft.ifft(grid.hbar * k[:, None] * f, axis=0)
    p = 0.5 * (p + p.conj().T)
    return x, p


def block_matrices(expr: Expr, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``expr`` on the even and odd sub-lattices."""
    out = []
    for parity in (0, 1):
        x, p = _block_generators(grid, parity)
        eye = np.eye(x.size, dtype=complex)

        def atom(node):
            if node == XQ:
                return np.diag(x).astype(complex)
            if node == PQ:
                return p
            if isinstance(node, PotentialOf):
                return np.diag(node.potential(x)).astype(complex)
            if isinstance(node, Hamiltonian):
                return p @ p / (2 * grid.mass) + np.diag(node.potential(x))
            raise ExpressionError(f"unsupported atom {node!r}")

        total = np.zeros_like(eye)
        for c, mono in expand(expr):
            mat = eye
            for node in mono:
                mat = mat @ atom(node)
            total = total + c * mat
        out.append(total)
    return tuple(out)
