"""Pauli string/sum algebra against dense Kronecker-product references."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqepdft.pauli import (
    DimensionError,
    PauliString,
    PauliSum,
    commutes,
    mul,
    qubitwise_compatible,
)

from oracles import dense_pauli


def random_label(rng, n):
    return "".join(rng.choice(list("IXYZ")) for _ in range(n))


def test_single_qubit_products():
    x = PauliString.from_label("X")
    y = PauliString.from_label("Y")
    z = PauliString.from_label("Z")
    phase, out = mul(x, y)
    assert phase == 1j and out == z
    phase, out = mul(z, z)
    assert phase == 1 and out.is_identity()


def test_two_qubit_product_matches_dense():
    a = PauliString.from_label("XZ")
    b = PauliString.from_label("ZX")
    phase, out = mul(a, b)
    assert out == PauliString.from_label("YY")
    ref = dense_pauli("XZ") @ dense_pauli("ZX")
    assert np.allclose(phase * dense_pauli(out.label()), ref)


def test_size_mismatch_raises():
    with pytest.raises(DimensionError):
        mul(PauliString.from_label("X"), PauliString.from_label("XX"))
    with pytest.raises(DimensionError):
        commutes(PauliString.from_label("X"), PauliString.from_label("XX"))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_mul_matches_dense_oracle(n, seed):
    rng = np.random.RandomState(seed)
    la = random_label(rng, n)
    lb = random_label(rng, n)
    a, b = PauliString.from_label(la), PauliString.from_label(lb)
    phase, out = mul(a, b)
    assert phase in (1, -1, 1j, -1j)
    assert np.allclose(phase * dense_pauli(out.label()), dense_pauli(la) @ dense_pauli(lb))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_commutes_matches_dense(n, seed):
    rng = np.random.RandomState(seed)
    a = PauliString.from_label(random_label(rng, n))
    b = PauliString.from_label(random_label(rng, n))
    ma, mb = dense_pauli(a.label()), dense_pauli(b.label())
    comm_norm = np.abs(ma @ mb - mb @ ma).max()
    assert commutes(a, b) == (comm_norm < 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_mul_associative_identity(n, seed):
    rng = np.random.RandomState(seed)
    a = PauliString.from_label(random_label(rng, n))
    b = PauliString.from_label(random_label(rng, n))
    c = PauliString.from_label(random_label(rng, n))
    p1, ab = mul(a, b)
    p2, ab_c = mul(ab, c)
    q1, bc = mul(b, c)
    q2, a_bc = mul(a, bc)
    assert ab_c == a_bc and np.isclose(p1 * p2, q1 * q2)
    ident = PauliString.identity(n)
    assert mul(ident, a) == (1, a) and mul(a, ident) == (1, a)


def test_commutes_examples():
    assert not commutes(PauliString.from_label("X"), PauliString.from_label("Z"))
    # Two anticommuting positions -> overall commuting.
    assert commutes(PauliString.from_label("XZ"), PauliString.from_label("ZX"))


def test_add_scaled_cancellation():
    s = PauliSum(1)
    x = PauliString.from_label("X")
    s.add_scaled(1.0, x)
    s.add_scaled(-1.0, x)
    assert len(s) == 0


def test_add_scaled_accumulates():
    s = PauliSum(2)
    ident = PauliString.identity(2)
    s.add_scaled(0.5, ident)
    s.add_scaled(0.5, ident)
    assert np.isclose(s.coefficient(ident), 1.0)


def test_sum_product_matches_dense():
    rng = np.random.RandomState(3)
    for n in (1, 2, 3, 4):
        terms_a = [(random_label(rng, n), complex(*rng.randn(2))) for _ in range(3)]
        terms_b = [(random_label(rng, n), complex(*rng.randn(2))) for _ in range(3)]
        sa = PauliSum.from_terms(n, [(PauliString.from_label(l), c) for l, c in terms_a])
        sb = PauliSum.from_terms(n, [(PauliString.from_label(l), c) for l, c in terms_b])
        dense_a = sum(c * dense_pauli(l) for l, c in terms_a)
        dense_b = sum(c * dense_pauli(l) for l, c in terms_b)
        prod = sa @ sb
        dense_prod = sum(c * dense_pauli(p.label()) for p, c in prod.terms.items())
        assert np.allclose(dense_prod, dense_a @ dense_b, atol=1e-12)


def test_deterministic_iteration_order():
    rng = np.random.RandomState(7)
    labels = [random_label(rng, 3) for _ in range(8)]
    s1 = PauliSum.from_terms(3, [(PauliString.from_label(l), 1.0) for l in labels])
    s2 = PauliSum.from_terms(3, [(PauliString.from_label(l), 1.0) for l in reversed(labels)])
    assert [p.label() for p, _ in s1] == [p.label() for p, _ in s2]


def test_text_round_trip():
    s = PauliSum(4)
    s.add_scaled(0.5, PauliString.from_label("XZYI"))
    s.add_scaled(-0.25 + 0.0j, PauliString.from_label("IIZZ"))
    text = s.to_text()
    assert "XZYI" in text
    back = PauliSum.from_text(text)
    assert back.n_qubits == 4
    for p, c in s.terms.items():
        assert np.isclose(back.coefficient(p), c)


def test_hermitized_rejects_complex():
    s = PauliSum(1)
    s.add_scaled(1j, PauliString.from_label("X"))
    with pytest.raises(ValueError):
        s.hermitized()


def test_qubitwise_compatibility():
    a = PauliString.from_label("XIZ")
    b = PauliString.from_label("XYI")
    c = PauliString.from_label("YIZ")
    assert qubitwise_compatible(a, b)
    assert not qubitwise_compatible(a, c)
