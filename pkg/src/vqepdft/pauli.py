"""Pauli-string algebra on a fixed qubit register.

A Pauli string is stored in the symplectic (two-bitmask) encoding:
bit i of ``x_mask`` is set when qubit i carries X or Y, bit i of
``z_mask`` when it carries Z or Y.  Products and commutation checks are
then XOR/popcount operations.  Qubit 0 is the least-significant bit.

Phases stay out of the string itself: ``PauliString`` is always the bare
tensor product with coefficient +1, and operations that can produce a
phase return it separately (or fold it into a ``PauliSum`` coefficient).
"""

from __future__ import annotations

from typing import Dict, Iterator, Tuple

_LETTERS = "IXZY"  # index = x_bit + 2*z_bit -> I=0, X=1, Z=2, Y=3

# phase_table[a][b] = k such that sigma_a * sigma_b = i^k * sigma_(a XOR b),
# with the a, b encoding above (I=0, X=1, Z=2, Y=3).
_PHASE_TABLE = (
    (0, 0, 0, 0),
    (0, 0, 3, 1),  # X*Z = -iY, X*Y = iZ
    (0, 1, 0, 3),  # Z*X = +iY, Z*Y = -iX
    (0, 3, 1, 0),  # Y*X = -iZ, Y*Z = +iX
)

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

DEFAULT_PRUNE_THRESHOLD = 1e-12


class DimensionError(ValueError):
    """Raised when operands act on registers of different sizes."""


class PauliString:
    """Immutable Pauli tensor product on ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "x_mask", "z_mask", "_hash")

    def __init__(self, n_qubits: int, x_mask: int = 0, z_mask: int = 0):
        if n_qubits < 0:
            raise ValueError("n_qubits must be nonnegative")
        limit = 1 << n_qubits
        if x_mask >= limit or z_mask >= limit or x_mask < 0 or z_mask < 0:
            raise ValueError("mask exceeds register size")
        self.n_qubits = n_qubits
        self.x_mask = x_mask
        self.z_mask = z_mask
        self._hash = hash((n_qubits, x_mask, z_mask))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a letter string where position i is the letter on qubit i."""
        x = z = 0
        for i, ch in enumerate(label):
            if ch == "X":
                x |= 1 << i
            elif ch == "Y":
                x |= 1 << i
                z |= 1 << i
            elif ch == "Z":
                z |= 1 << i
            elif ch != "I":
                raise ValueError(f"invalid Pauli letter {ch!r}")
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
        label = ["I"] * n_qubits
        label[qubit] = letter
        return cls.from_label("".join(label))

    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x_mask >> qubit) & 1) + 2 * ((self.z_mask >> qubit) & 1)]

    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    @property
    def support(self) -> int:
        """Bitmask of qubits carrying a non-identity letter."""
        return self.x_mask | self.z_mask

    def weight(self) -> int:
        return bin(self.support).count("1")

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n_qubits == other.n_qubits
            and self.x_mask == other.x_mask
            and self.z_mask == other.z_mask
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "PauliString") -> bool:
        # Lexicographic on (x_mask, z_mask): the deterministic term order
        # used for iteration, serialization and Trotter products.
        return (self.x_mask, self.z_mask) < (other.x_mask, other.z_mask)

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def mul(a: PauliString, b: PauliString) -> Tuple[complex, PauliString]:
    """Operator product a*b as (phase, string) with phase in {1, i, -1, -i}."""
    _check_sizes(a, b)
    power = 0
    both = (a.x_mask | a.z_mask) & (b.x_mask | b.z_mask)
    q = both
    while q:
        low = q & -q
        i = low.bit_length() - 1
        la = ((a.x_mask >> i) & 1) + 2 * ((a.z_mask >> i) & 1)
        lb = ((b.x_mask >> i) & 1) + 2 * ((b.z_mask >> i) & 1)
        power += _PHASE_TABLE[la][lb]
        q ^= low
    out = PauliString(a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask)
    return _I_POW[power % 4], out


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff ab == ba (even number of anticommuting qubit positions)."""
    _check_sizes(a, b)
    anti = (a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)
    return bin(anti).count("1") % 2 == 0


def qubitwise_compatible(a: PauliString, b: PauliString) -> bool:
    """True when on every qubit the letters agree or one of them is I.

    Strings in one qubit-wise compatible group share a single measurement
    basis, which is how measurement settings get merged.
    """
    _check_sizes(a, b)
    overlap = a.support & b.support
    return (a.x_mask & overlap) == (b.x_mask & overlap) and (
        a.z_mask & overlap
    ) == (b.z_mask & overlap)


class PauliSum:
    """Weighted sum of Pauli strings with automatic term merging.

    Coefficients with magnitude below ``prune_threshold`` are dropped, so
    an exactly cancelling sequence of updates leaves an empty sum.
    """

    __slots__ = ("n_qubits", "terms", "prune_threshold")

    def __init__(self, n_qubits: int, prune_threshold: float = DEFAULT_PRUNE_THRESHOLD):
        self.n_qubits = n_qubits
        self.terms: Dict[PauliString, complex] = {}
        self.prune_threshold = prune_threshold

    @classmethod
    def from_terms(
        cls, n_qubits: int, terms: Dict[PauliString, complex] | list, prune_threshold: float = DEFAULT_PRUNE_THRESHOLD
    ) -> "PauliSum":
        s = cls(n_qubits, prune_threshold)
        items = terms.items() if isinstance(terms, dict) else terms
        for p, c in items:
            s.add_scaled(c, p)
        return s

    def copy(self) -> "PauliSum":
        s = PauliSum(self.n_qubits, self.prune_threshold)
        s.terms = dict(self.terms)
        return s

    def add_scaled(self, coeff: complex, string: PauliString) -> "PauliSum":
        """Add ``coeff * string`` in place; returns self for chaining."""
        if string.n_qubits != self.n_qubits:
            raise DimensionError(
                f"string on {string.n_qubits} qubits added to sum on {self.n_qubits}"
            )
        new = self.terms.get(string, 0j) + coeff
        if abs(new) <= self.prune_threshold:
            self.terms.pop(string, None)
        else:
            self.terms[string] = new
        return self

    def add_sum(self, other: "PauliSum", scale: complex = 1.0) -> "PauliSum":
        for p, c in other.terms.items():
            self.add_scaled(scale * c, p)
        return self

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[PauliString, complex]]:
        """Iterate terms in the deterministic lexicographic order."""
        for p in sorted(self.terms.keys(), key=lambda s: (s.x_mask, s.z_mask)):
            yield p, self.terms[p]

    def coefficient(self, string: PauliString) -> complex:
        return self.terms.get(string, 0j)

    def scaled(self, factor: complex) -> "PauliSum":
        s = PauliSum(self.n_qubits, self.prune_threshold)
        for p, c in self.terms.items():
            s.add_scaled(factor * c, p)
        return s

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product of two sums."""
        if self.n_qubits != other.n_qubits:
            raise DimensionError("qubit counts differ in product")
        out = PauliSum(self.n_qubits, self.prune_threshold)
        for pa, ca in self.terms.items():
            for pb, cb in other.terms.items():
                phase, p = mul(pa, pb)
                out.add_scaled(ca * cb * phase, p)
        return out

    def dagger(self) -> "PauliSum":
        s = PauliSum(self.n_qubits, self.prune_threshold)
        for p, c in self.terms.items():
            s.add_scaled(c.conjugate(), p)
        return s

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def hermitized(self, tol: float = 1e-10) -> "PauliSum":
        """Drop imaginary dust from coefficients; raise if it is not dust."""
        s = PauliSum(self.n_qubits, self.prune_threshold)
        for p, c in self.terms.items():
            if abs(c.imag) > tol:
                raise ValueError(f"coefficient {c} of {p.label()} is not real")
            s.add_scaled(complex(c.real), p)
        return s

    def to_text(self) -> str:
        """One term per line: ``<re> <im> <letters>`` in deterministic order."""
        lines = []
        for p, c in self:
            lines.append(f"{c.real:.16e} {c.imag:.16e} {p.label()}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, prune_threshold: float = DEFAULT_PRUNE_THRESHOLD) -> "PauliSum":
        n_qubits = None
        parsed = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {ln}: expected '<re> <im> <letters>'")
            re_c, im_c, label = float(parts[0]), float(parts[1]), parts[2]
            if n_qubits is None:
                n_qubits = len(label)
            elif len(label) != n_qubits:
                raise ValueError(f"line {ln}: inconsistent qubit count")
            parsed.append((PauliString.from_label(label), complex(re_c, im_c)))
        if n_qubits is None:
            raise ValueError("empty Pauli sum text")
        return cls.from_terms(n_qubits, parsed, prune_threshold)

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"
