import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gentensor import (BasisChange, SmoothMap, SmoothTensorField, TensorAtPoint,
                       TensorType, contract_full, tensor_product)
from gentensor.errors import RankCapError, TypeMismatchError
from gentensor.tensors import (all_indices, apply_slotwise, basis_dual_tensor,
                               flatten_index, scalar_tensor, tensor_from_json,
                               tensor_to_json, unflatten_index, zero_tensor)

P0 = np.array([0.0])
P00 = np.array([0.0, 0.0])


def brute_contract(t, tt):
    """Independent oracle: explicit loop over all index tuples."""
    r, s = t.ttype.r, t.ttype.s
    n = t.dim
    total = 0.0
    for big_i in itertools.product(range(n), repeat=r):
        for big_j in itertools.product(range(n), repeat=s):
            total += t.components[big_i + big_j] * tt.components[big_j + big_i]
    return total


class TestContractFull:
    def test_trace_with_identity(self):
        t = TensorAtPoint(TensorType(1, 1), P00, [[1.0, 2.0], [3.0, 4.0]])
        ident = TensorAtPoint(TensorType(1, 1), P00, np.eye(2))
        assert contract_full(t, ident) == pytest.approx(5.0)

    def test_zero_partner(self):
        t = TensorAtPoint(TensorType(1, 1), P00, [[1.0, 2.0], [3.0, 4.0]])
        assert contract_full(t, zero_tensor(TensorType(1, 1), P00)) == 0.0

    def test_hand_vector_covector(self):
        t = TensorAtPoint(TensorType(1, 0), P00, [2.0, 3.0])
        tt = TensorAtPoint(TensorType(0, 1), P00, [5.0, 7.0])
        assert contract_full(t, tt) == pytest.approx(31.0)  # 2*5 + 3*7

    def test_scalar_case(self):
        assert contract_full(scalar_tensor(3.0, P0), scalar_tensor(4.0, P0)) == 12.0

    def test_type_mismatch(self):
        t = TensorAtPoint(TensorType(1, 0), P00, [1.0, 0.0])
        with pytest.raises(TypeMismatchError):
            contract_full(t, t)

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 2), st.integers(0, 2), st.integers(1, 3),
           st.integers(0, 2 ** 31 - 1))
    def test_brute_force_oracle(self, r, s, n, seed):
        rng = np.random.default_rng(seed)
        base = np.zeros(n)
        t = TensorAtPoint(TensorType(r, s), base, rng.standard_normal((n,) * (r + s)))
        tt = TensorAtPoint(TensorType(s, r), base, rng.standard_normal((n,) * (r + s)))
        got = contract_full(t, tt)
        want = brute_contract(t, tt)
        assert got == pytest.approx(want, rel=1e-13, abs=1e-13)

    def test_bilinear(self, rng):
        base = np.zeros(2)
        t1 = TensorAtPoint(TensorType(1, 1), base, rng.standard_normal((2, 2)))
        t2 = TensorAtPoint(TensorType(1, 1), base, rng.standard_normal((2, 2)))
        tt = TensorAtPoint(TensorType(1, 1), base, rng.standard_normal((2, 2)))
        lhs = contract_full(t1 + 2.5 * t2, tt)
        rhs = contract_full(t1, tt) + 2.5 * contract_full(t2, tt)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestTensorProduct:
    def test_hand_outer_product(self):
        v = TensorAtPoint(TensorType(1, 0), P00, [1.0, 0.0])
        b = TensorAtPoint(TensorType(0, 1), P00, [0.0, 1.0])
        out = tensor_product(v, b)
        assert out.ttype == TensorType(1, 1)
        assert np.allclose(out.components, [[0.0, 1.0], [0.0, 0.0]])

    def test_scalar_unit(self):
        v = TensorAtPoint(TensorType(1, 0), P00, [3.0, -1.0])
        one = scalar_tensor(1.0, P00)
        assert np.allclose(tensor_product(v, one).components, v.components)
        assert np.allclose(tensor_product(one, v).components, v.components)

    def test_bilinearity(self):
        u = TensorAtPoint(TensorType(1, 0), P00, [1.0, 2.0])
        v = TensorAtPoint(TensorType(0, 1), P00, [0.5, -0.5])
        left = tensor_product(3.0 * u, v)
        right = 3.0 * tensor_product(u, v)
        assert np.allclose(left.components, right.components)

    def test_contravariant_block_first(self):
        # (1,1) (x) (1,0): index order (i, k; j)
        a = TensorAtPoint(TensorType(1, 1), P00, np.arange(4.0).reshape(2, 2))
        b = TensorAtPoint(TensorType(1, 0), P00, [1.0, 10.0])
        out = tensor_product(a, b)
        assert out.ttype == TensorType(2, 1)
        for i, k, j in itertools.product(range(2), repeat=3):
            assert out.components[i, k, j] == a.components[i, j] * b.components[k]

    def test_rank_cap(self):
        big = TensorAtPoint(TensorType(2, 1), P00, np.zeros((2, 2, 2)))
        with pytest.raises(RankCapError):
            tensor_product(big, big)

    def test_reproduces_slotwise_pairings(self, rng):
        # contraction of v (x) beta against the dual pattern reproduces the
        # product of slot pairings (brute-force oracle)
        v = TensorAtPoint(TensorType(1, 0), P00, rng.standard_normal(2))
        beta = TensorAtPoint(TensorType(0, 1), P00, rng.standard_normal(2))
        w = TensorAtPoint(TensorType(0, 1), P00, rng.standard_normal(2))
        alpha = TensorAtPoint(TensorType(1, 0), P00, rng.standard_normal(2))
        lhs = contract_full(tensor_product(v, beta), tensor_product(w, alpha))
        want = brute_contract(tensor_product(v, beta), tensor_product(w, alpha))
        slotwise = float(np.dot(v.components, w.components)
                         * np.dot(beta.components, alpha.components))
        assert lhs == pytest.approx(want, rel=1e-13)
        assert lhs == pytest.approx(slotwise, rel=1e-12)


class TestIndexing:
    @pytest.mark.parametrize("n,rank", [(n, r) for n in (1, 2, 3) for r in (0, 1, 2, 3, 4)])
    def test_roundtrip_exhaustive(self, n, rank):
        for flat, idx in enumerate(all_indices(n, rank)):
            assert flatten_index(idx, n) == flat
            assert unflatten_index(flat, n, rank) == idx

    def test_dual_basis_extracts_component(self, rng):
        ttype = TensorType(1, 1)
        t = TensorAtPoint(ttype, P00, rng.standard_normal((2, 2)))
        for idx in all_indices(2, 2):
            dual = basis_dual_tensor(ttype, P00, idx)
            assert contract_full(t, dual) == pytest.approx(t.components[idx])


class TestApplySlotwise:
    def test_against_brute_force(self, rng):
        n, r, s = 2, 1, 1
        comp = rng.standard_normal((n, n))
        m1 = rng.standard_normal((n, n))
        m2 = rng.standard_normal((n, n))
        got = apply_slotwise(comp, r, s, m1, m2)
        want = np.zeros((n, n))
        for k, l, i, j in itertools.product(range(n), repeat=4):
            want[k, l] += m1[k, i] * m2[j, l] * comp[i, j]
        assert np.allclose(got, want, atol=1e-13)

    def test_rank0_passthrough(self):
        comp = np.asarray(7.0)
        assert apply_slotwise(comp, 0, 0, np.eye(1), np.eye(1)) == 7.0


class TestSmoothTensorField:
    def test_component_maps_and_partials(self):
        f = SmoothTensorField.from_component_maps(
            TensorType(1, 0), 1,
            [SmoothMap(lambda p: p[0] ** 2, partials=lambda p, a: 2 * p[0])])
        v = f.value(np.array([2.0]))
        assert v.components[0] == pytest.approx(4.0)
        assert f.partial(np.array([2.0]), 0)[0] == pytest.approx(4.0)

    def test_fd_partial_fallback(self):
        f = SmoothTensorField(TensorType(0, 0), 1, lambda p: np.asarray(np.sin(p[0])))
        assert float(f.partial(np.array([0.3]), 0)) == pytest.approx(np.cos(0.3), abs=1e-9)

    def test_scale_by(self):
        f = SmoothTensorField.constant(TensorType(1, 0), 1, [1.0])
        g = SmoothMap(lambda p: p[0], partials=lambda p, a: 1.0)
        scaled = f.scale_by(g)
        assert scaled.value(np.array([0.7])).components[0] == pytest.approx(0.7)
        assert scaled.partial(np.array([0.7]), 0)[0] == pytest.approx(1.0)


class TestBasisChange:
    def test_identity(self):
        bc = BasisChange.identity(2)
        assert np.allclose(bc.matrix(np.zeros(1)), np.eye(2))

    def test_inverse(self):
        bc = BasisChange(((SmoothMap(lambda p: np.exp(-p[0])),),))
        p = np.array([0.4])
        assert bc.inverse_matrix(p)[0, 0] == pytest.approx(np.exp(0.4))

    def test_compose(self):
        a = BasisChange(((SmoothMap(lambda p: 2.0),),))
        b = BasisChange(((SmoothMap(lambda p: p[0]),),))
        ab = a.compose(b)
        assert ab.matrix(np.array([3.0]))[0, 0] == pytest.approx(6.0)


class TestJson:
    def test_roundtrip(self, rng):
        t = TensorAtPoint(TensorType(1, 1), np.array([0.3, -0.2]),
                          rng.standard_normal((2, 2)))
        d = tensor_to_json(t)
        assert d["shape"] == [2, 1, 1]
        back = tensor_from_json(d)
        assert back.ttype == t.ttype
        assert np.allclose(back.components, t.components)
        assert np.allclose(back.base, t.base)
