from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from backend.engine.errors import ContractError, QueryBudgetExceeded, ResourceLimitError
from backend.engine.oracle import (
    OracleHandle,
    OracleTable,
    oracle_layout,
    oracle_permutation,
    oracle_unitary,
    reprogram,
    reprogram_distinguisher_bound,
    sample_oracle,
    soundness_epsilon,
)
from backend.engine.tensor import basis_state


def test_sampling_is_reproducible():
    assert sample_oracle(8, 2, 42, 0) == sample_oracle(8, 2, 42, 0)
    assert sample_oracle(8, 2, 42, 0) != sample_oracle(8, 2, 42, 1)


def test_reprogram_is_functional():
    h = sample_oracle(4, 1, 1)
    target = 1 - h.lookup(3)
    updated = reprogram(h, 3, target)
    assert updated.lookup(3) == target
    assert h.lookup(3) != target
    assert updated.reprogram_log == ((3, target),)
    assert all(updated.lookup(r) == h.lookup(r) for r in range(16) if r != 3)


def test_reprogram_rejects_out_of_range_value():
    with pytest.raises(ContractError):
        reprogram(sample_oracle(3, 1, 1), 0, 2)


def test_permutation_is_an_involution():
    perm = oracle_permutation(sample_oracle(5, 2, 7))
    np.testing.assert_array_equal(perm[perm], np.arange(perm.size))


def test_unitary_oracle_is_self_inverse():
    u = oracle_unitary(sample_oracle(3, 1, 8))
    assert u.is_unitary()
    np.testing.assert_allclose(u.matrix @ u.matrix, np.eye(u.dim), atol=1e-12)


def test_superposition_query_on_basis_state():
    h = sample_oracle(3, 2, 9)
    handle = OracleHandle(h)
    layout = oracle_layout(h)
    r = 5
    digits = [int(bit) for bit in format(r, "03b")] + [0, 0]
    out = handle.apply(basis_state(layout, digits))
    expected = [int(bit) for bit in format(r, "03b") + format(h.lookup(r), "02b")]
    assert abs(out.overlap(basis_state(layout, expected))) == pytest.approx(1.0)
    assert handle.count == 1


def test_handle_enforces_budget():
    handle = OracleHandle(sample_oracle(4, 1, 10), budget=1)
    handle.query(0)
    with pytest.raises(QueryBudgetExceeded):
        handle.query(1)
    assert handle.count == 2


def test_table_validation():
    with pytest.raises(ContractError):
        OracleTable(2, 1, (0, 1, 0))
    with pytest.raises(ContractError):
        OracleTable(1, 1, (0, 2))
    with pytest.raises(ResourceLimitError):
        sample_oracle(25, 1, 0)


def test_epsilon_values():
    assert soundness_epsilon(0, 8, 1).epsilon == pytest.approx(0.853553390593, abs=1e-12)
    bound = soundness_epsilon(2, 8, 3)
    assert bound.epsilon == pytest.approx(0.25 + (0.5 + 2**-1.5) ** 3, abs=1e-12)
    assert not bound.vacuous
    assert soundness_epsilon(100, 8, 1).vacuous


def test_distinguisher_bound():
    assert reprogram_distinguisher_bound(1, 8) == pytest.approx(0.125)
    with pytest.raises(ContractError):
        reprogram_distinguisher_bound(-1, 8)


def test_identity_oracle_is_a_cnot():
    u = oracle_unitary(OracleTable(1, 1, (0, 1)))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(u.matrix.real, cnot)
    assert u.labels == ("r0", "b0")


def test_sampled_values_look_uniform():
    values = np.array(sample_oracle(12, 2, 11).table)
    counts = np.bincount(values, minlength=4)
    assert counts.sum() == 4096
    assert stats.chisquare(counts).pvalue > 1e-4
