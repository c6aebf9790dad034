"""Polynomial potentials ``U(q_1, ..., q_n)`` of total degree at most four."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import factorial, prod

import numpy as np

from .errors import DomainError
from .states import ModeConstants

__all__ = ["PolynomialPotential", "harmonic", "parse_potential", "MAX_DEGREE"]

MAX_DEGREE = 4


@dataclass(frozen=True)
class PolynomialPotential:
    """Sum of monomials ``c * q_1^d_1 * ... * q_n^d_n``.

    Parameters
    ----------
    terms : dict
        Maps exponent tuples (length ``modes``) to real coefficients.
    modes : int
        Number of degrees of freedom.
    constants : tuple of ModeConstants
        Per-mode mass, frequency and hbar; one entry per mode.
    """

    terms: dict
    modes: int = 1
    constants: tuple = field(default=None)

    def __post_init__(self):
        if self.modes < 1:
            raise DomainError("a potential needs at least one mode")
        clean = {}
        for exps, c in dict(self.terms).items():
            exps = tuple(int(e) for e in (exps if isinstance(exps, tuple) else (exps,)))
            if len(exps) != self.modes or min(exps) < 0:
                raise DomainError(f"bad exponent vector {exps} for {self.modes} mode(s)")
            if sum(exps) > MAX_DEGREE:
                raise DomainError(f"monomial degree {sum(exps)} exceeds {MAX_DEGREE}")
            if np.iscomplexobj(c) and np.imag(c) != 0:
                raise DomainError("potential coefficients must be real")
            c = float(np.real(c))
            if c != 0.0:
                clean[exps] = clean.get(exps, 0.0) + c
        object.__setattr__(self, "terms", clean)
        consts = self.constants
        if consts is None:
            consts = tuple(ModeConstants() for _ in range(self.modes))
        elif isinstance(consts, ModeConstants):
            consts = (consts,) * self.modes
        consts = tuple(consts)
        if len(consts) != self.modes:
            raise DomainError("one ModeConstants entry per mode is required")
        if len({c.hbar for c in consts}) != 1:
            raise DomainError("all modes must share the same hbar")
        object.__setattr__(self, "constants", consts)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @property
    def hbar(self) -> float:
        return self.constants[0].hbar

    def is_zero(self) -> bool:
        return not self.terms

    def derivative(self, k) -> "PolynomialPotential":
        """Partial derivative with multi-index ``k`` (an int for one mode)."""
        k = (k,) if np.isscalar(k) else tuple(k)
        if len(k) != self.modes:
            raise DomainError("derivative multi-index has the wrong length")
        out = {}
        for exps, c in self.terms.items():
            if all(e >= j for e, j in zip(exps, k)):
                fall = prod(factorial(e) // factorial(e - j) for e, j in zip(exps, k))
                new = tuple(e - j for e, j in zip(exps, k))
                out[new] = out.get(new, 0.0) + c * fall
        return PolynomialPotential(out, self.modes, self.constants)

    def __call__(self, *q):
        """Evaluate on coordinates (broadcasting)."""
        if len(q) != self.modes:
            raise DomainError(f"expected {self.modes} coordinate(s)")
        total = 0.0
        for exps, c in self.terms.items():
            total = total + c * prod(np.asarray(x) ** e for x, e in zip(q, exps))
        return total

    def multi_indices(self, parity=None):
        """Nonzero multi-indices ``k`` with ``|k| <= degree``, optionally by parity of ``|k|``."""
        out = []
        for total in range(self.degree + 1):
            if parity is not None and total % 2 != parity:
                continue
            out.extend(_compositions(total, self.modes))
        return out

    def __add__(self, other):
        if other.modes != self.modes:
            raise DomainError("mode count mismatch")
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0.0) + c
        return PolynomialPotential(t, self.modes, self.constants)

    def scaled(self, s) -> "PolynomialPotential":
        return PolynomialPotential({e: s * c for e, c in self.terms.items()},
                                   self.modes, self.constants)

    def describe(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms.items()):
            mono = "*".join(
                (f"q{i + 1}" if self.modes > 1 else "q") + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(exps) if e)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _compositions(total, parts):
    if parts == 1:
        return [(total,)]
    return [(i,) + rest for i in range(total, -1, -1)
            for rest in _compositions(total - i, parts - 1)]


def harmonic(modes=1, constants=None) -> PolynomialPotential:
    """``sum_s m_s w_s^2 q_s^2 / 2``."""
    pot = PolynomialPotential({}, modes, constants)
    terms = {}
    for s, c in enumerate(pot.constants):
        e = [0] * modes
        e[s] = 2
        terms[tuple(e)] = 0.5 * c.mass * c.frequency ** 2
    return PolynomialPotential(terms, modes, pot.constants)


_FACTOR = re.compile(r"^q(\d*)(?:\^(\d+))?$")


def _parse_number(tok):
    if "/" in tok:
        a, b = tok.split("/", 1)
        return float(a) / float(b)
    return float(tok)


def parse_potential(text: str, modes=None, constants=None) -> PolynomialPotential:
    """Parse strings like ``"q^2/2"``, ``"0.5*q1^2 + 0.5*q2^2"`` or ``"q1*q2"``.

    Terms are separated by ``+``/``-``; each term is a product (``*``) of
    numbers and factors ``q``, ``qN`` or ``qN^d``, optionally followed by
    ``/number``.  ``q`` alone means ``q1``.  The mode count defaults to the
    largest index mentioned.
    """
    text = text.strip()
    if text in ("", "0"):
        return PolynomialPotential({}, modes or 1, constants)
    chunks = re.findall(r"[+-]?[^+-]+", text.replace(" ", "").replace("e-", "E~").replace("e+", "E#"))
    parsed = []
    top = 1
    for chunk in chunks:
        chunk = chunk.replace("E~", "e-").replace("E#", "e+")
        sign = -1.0 if chunk.startswith("-") else 1.0
        body = chunk.lstrip("+-")
        if not body:
            raise DomainError(f"cannot parse potential {text!r}")
        num, _, den = body.partition("/")
        coeff = sign
        if den:
            try:
                coeff /= float(den)
            except ValueError:
                raise DomainError(f"bad denominator in {chunk!r}") from None
        powers = {}
        for fac in num.split("*"):
            m = _FACTOR.match(fac)
            if m:
                idx = int(m.group(1) or 1)
                if idx < 1:
                    raise DomainError(f"mode indices start at 1 in {chunk!r}")
                powers[idx] = powers.get(idx, 0) + int(m.group(2) or 1)
                top = max(top, idx)
            else:
                try:
                    coeff *= _parse_number(fac)
                except ValueError:
                    raise DomainError(f"cannot parse factor {fac!r} in {text!r}") from None
        parsed.append((powers, coeff))
    n = modes or top
    if top > n:
        raise DomainError(f"potential mentions mode {top} but only {n} mode(s) exist")
    terms = {}
    for powers, c in parsed:
        e = tuple(powers.get(i + 1, 0) for i in range(n))
        terms[e] = terms.get(e, 0.0) + c
    return PolynomialPotential(terms, n, constants)
