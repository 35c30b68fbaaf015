import numpy as np
import pytest

from gentensor import (Chart, Regular, SmoothTensorField, TensorDistribution,
                       TensorType, embed_iota_distribution, embed_iota_field,
                       embed_sigma, lie_classical, lie_hat,
                       lie_derivative_distribution, make_mollifier, mu_hat,
                       pullback_field, pushforward_data, pushforward_field,
                       pushforward_vector_field)
from gentensor.calculus import PushedData
from gentensor.catalogs import diffeo, scalar_map, tensor_field, vector_field
from gentensor.geometry import compose_diffeos, smooth_const


@pytest.fixture
def codomain4():
    return Chart(1, [-4.0], [4.0])


@pytest.fixture
def scaling2():
    return diffeo("scaling:2", 1)


def regular_tensor(g_name, e_name, dim=1):
    g = scalar_map(g_name, dim)
    e = tensor_field(e_name, dim)
    return TensorDistribution(e.ttype, ((Regular(g), e),))


class TestLieClassical:
    def test_vector_field_bracket(self, chart1):
        # L_{d_x}(x^2 d_x) = 2x d_x
        out = lie_classical(tensor_field("x2_dx", 1), vector_field("unit_x", chart1))
        assert out.value(np.array([0.7])).components[0] == pytest.approx(1.4, abs=1e-9)

    def test_zero_field(self, chart1):
        zero = vector_field("unit_x", chart1).scaled(0.0)
        out = lie_classical(tensor_field("x2_dx", 1), zero)
        assert out.value(np.array([0.7])).norm_inf() < 1e-12

    def test_covector_cartan(self, chart1):
        # L_{x d_x}(dx) = dx
        out = lie_classical(tensor_field("dx_form", 1), vector_field("linear_x", chart1))
        assert out.value(np.array([0.4])).components[0] == pytest.approx(1.0, abs=1e-9)

    def test_mixed_tensor_2d(self, chart2):
        # rotation field on a constant (1,1) tensor: L_X T = -DX T + T DX
        x_field = vector_field("rotation2", chart2)
        comp = np.array([[1.0, 2.0], [0.0, -1.0]])
        field = SmoothTensorField.constant(TensorType(1, 1), 2, comp)
        out = lie_classical(field, x_field).value(np.array([0.3, -0.2]))
        dmat = np.array([[0.0, -1.0], [1.0, 0.0]])
        want = -dmat @ comp + comp @ dmat
        assert np.allclose(out.components, want, atol=1e-9)


class TestPushforwardData:
    def test_identity_unchanged(self, chart1, bump_sym1, identity_cut1):
        ident = diffeo("identity", 1)
        om = make_mollifier(bump_sym1, [0.2], 0.3, chart1)
        p = np.array([0.1])
        pushed = pushforward_data(ident, om, p, identity_cut1, chart1)
        assert isinstance(pushed, PushedData)
        assert np.allclose(pushed.point_push, p)
        q = np.array([0.25])
        assert pushed.omega_push(q) == pytest.approx(om(q), rel=1e-12)
        assert np.allclose(pushed.transport_push(p, q), identity_cut1(p, q), atol=1e-12)

    def test_scaling_density_substitution(self, chart1, bump_sym1, identity_cut1,
                                          scaling2, codomain4):
        # mu(x) = 2x: pushed density is phi(y/2)/2 and keeps unit integral
        om = make_mollifier(bump_sym1, [0.0], 0.4, chart1)
        pushed = pushforward_data(scaling2, om, np.zeros(1), identity_cut1, codomain4)
        y = np.array([0.3])
        assert pushed.omega_push(y) == pytest.approx(om(y / 2) / 2, rel=1e-12)
        assert pushed.omega_push.integral() == pytest.approx(1.0, abs=1e-9)

    def test_identity_transport_conjugates_to_identity(self, chart1, bump_sym1,
                                                       identity_cut1, scaling2, codomain4):
        om = make_mollifier(bump_sym1, [0.0], 0.3, chart1)
        pushed = pushforward_data(scaling2, om, np.zeros(1), identity_cut1, codomain4)
        pp, qq = np.array([0.5]), np.array([-0.7])
        # cutoff of the source evaluated at the pulled-back points, times Id
        src = identity_cut1(pp / 2, qq / 2)
        assert np.allclose(pushed.transport_push(pp, qq), src, atol=1e-12)


class TestFieldTransport:
    def test_pullback_vector_field_values(self, scaling2):
        # mu(x) = 2x on v(y) d_y: (mu^* v)(x) = v(2x)/2 for the vector part
        g = tensor_field("x_dx", 1)  # y d_y
        pulled = pullback_field(scaling2, g)
        assert pulled.value(np.array([0.3])).components[0] == pytest.approx(0.3)
        # covector pulls back with the Jacobian
        w = tensor_field("dx_form", 1)
        pulled_w = pullback_field(scaling2, w)
        assert pulled_w.value(np.array([0.3])).components[0] == pytest.approx(2.0)

    def test_pushforward_inverts_pullback(self, scaling2, rng):
        g = tensor_field("sin_dx", 1)
        back = pullback_field(scaling2, pushforward_field(scaling2, g))
        for _ in range(5):
            p = rng.uniform(-1.5, 1.5, 1)
            assert back.value(p).components[0] == pytest.approx(
                g.value(p).components[0], rel=1e-10)

    def test_pushforward_vector_field(self, chart1, scaling2, codomain4):
        # mu_*(x d_x) = y d_y under mu(x) = 2x
        x_field = vector_field("linear_x", chart1)
        pushed = pushforward_vector_field(scaling2, x_field, codomain4)
        assert pushed.value(np.array([1.0]))[0] == pytest.approx(1.0)


class TestMuHat:
    def test_identity_action(self, chart1, bump_sym1, identity_cut1):
        ident = diffeo("identity", 1)
        t = embed_iota_field(tensor_field("sin_dx", 1))
        moved = mu_hat(ident, t, chart1)
        om = make_mollifier(bump_sym1, [0.2], 0.1, chart1)
        p = np.array([0.3])
        a = moved(om, p, identity_cut1)
        b = t(om, p, identity_cut1)
        assert np.allclose(a.components, b.components, atol=1e-12)

    def test_sigma_compatibility(self, chart1, bump_sym1, identity_cut1,
                                 scaling2, codomain4):
        # mu-hat(sigma(f)) = sigma(mu^* f) up to roundoff
        f = tensor_field("sin_dx", 1)
        lhs = mu_hat(scaling2, embed_sigma(f), codomain4)
        rhs = embed_sigma(pullback_field(scaling2, f))
        om = make_mollifier(bump_sym1, [0.1], 0.2, chart1)
        for p in (np.array([0.4]), np.array([-0.8])):
            a = lhs(om, p, identity_cut1)
            b = rhs(om, p, identity_cut1)
            assert np.allclose(a.components, b.components, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("mu_name,cod", [("scaling:2", (-4.0, 4.0)),
                                             ("sinh", (-3.7, 3.7))])
    def test_iota_requirement(self, chart1, bump_sym1, identity_cut1, rng, mu_name, cod):
        # the defining requirement: mu-hat after embedding equals embedding
        # of the pullback, on regular tensor distributions (10 triples each)
        mu = diffeo(mu_name, 1)
        codomain = Chart(1, [cod[0]], [cod[1]])
        u_n = regular_tensor("sinx", "x_dx")
        lhs = mu_hat(mu, embed_iota_distribution(u_n), codomain)
        pulled = pullback_field(mu, tensor_field("x_dx", 1).scale_by(scalar_map("sinx", 1)))
        rhs = embed_iota_distribution(
            TensorDistribution(pulled.ttype, ((Regular(smooth_const(1.0)), pulled),)))
        for _ in range(10):
            p = rng.uniform(-0.8, 0.8, 1)
            om = make_mollifier(bump_sym1, rng.uniform(-0.8, 0.8, 1),
                                rng.uniform(0.05, 0.1), chart1)
            a = lhs(om, p, identity_cut1)
            b = rhs(om, p, identity_cut1)
            scale = max(a.norm_inf(), b.norm_inf(), 1e-30)
            assert (a - b).norm_inf() / scale < 1e-7

    def test_functoriality(self, chart1, bump_sym1, identity_cut1):
        # (mu o nu)-hat = nu-hat o mu-hat on sampled triples
        nu = diffeo("scaling:2", 1)          # M -> N
        mu = diffeo("scaling:1.5", 1)        # N -> L
        chart_n = Chart(1, [-4.0], [4.0])
        chart_l = Chart(1, [-6.0], [6.0])
        t = embed_iota_field(tensor_field("sin_dx", 1))  # element over L
        composed = mu_hat(compose_diffeos(mu, nu), t, chart_l)
        stacked = mu_hat(nu, mu_hat(mu, t, chart_l), chart_n)
        om = make_mollifier(bump_sym1, [0.2], 0.1, chart1)
        for p in (np.array([0.3]), np.array([-0.6])):
            a = composed(om, p, identity_cut1)
            b = stacked(om, p, identity_cut1)
            scale = max(a.norm_inf(), 1e-30)
            assert (a - b).norm_inf() / scale < 1e-9


class TestLieHat:
    def test_sigma_chain_rule(self, chart1, bump_sym1, identity_cut1):
        # lie-hat on a pointwise-embedded field matches the classical Lie
        # derivative to O(tau^2)
        x_field = vector_field("linear_x", chart1)
        g = tensor_field("x2_dx", 1)
        el = lie_hat(x_field, embed_sigma(g), tau_lie=1e-3)
        om = make_mollifier(bump_sym1, [0.2], 0.1, chart1)
        p = np.array([0.5])
        want = lie_classical(g, x_field).value(p)
        got = el(om, p, identity_cut1)
        assert (got - want).norm_inf() < 1e-5

    def test_zero_field_gives_zero(self, chart1, bump_sym1, identity_cut1):
        zero = vector_field("unit_x", chart1).scaled(0.0)
        el = lie_hat(zero, embed_sigma(tensor_field("x2_dx", 1)))
        om = make_mollifier(bump_sym1, [0.2], 0.1, chart1)
        assert el(om, np.array([0.4]), identity_cut1).norm_inf() < 1e-12

    def test_iota_compatibility_stated_triple(self, chart1, bump_sym1, identity_cut1):
        # t = iota(Regular(x^2) (x) d_x), X = d_x, compared against the
        # distributional Lie derivative at (omega_{0.1,p}, p=0.3)
        x_field = vector_field("unit_x", chart1)
        u = regular_tensor("x2", "dx")
        t = embed_iota_distribution(u)
        lhs = lie_hat(x_field, t)
        rhs = embed_iota_distribution(lie_derivative_distribution(u, x_field))
        p = np.array([0.3])
        om = make_mollifier(bump_sym1, p, 0.1, chart1)
        diff = (lhs(om, p, identity_cut1) - rhs(om, p, identity_cut1)).norm_inf()
        assert diff < 1e-5

    def test_iota_compatibility_covector(self, chart1, bump_sym1, identity_cut1):
        # X = x d_x with u = Regular(1) (x) dx: L_X u = dx classically
        x_field = vector_field("linear_x", chart1)
        u = regular_tensor("one", "dx_form")
        lhs = lie_hat(x_field, embed_iota_distribution(u))
        rhs = embed_iota_distribution(lie_derivative_distribution(u, x_field))
        p = np.array([0.3])
        om = make_mollifier(bump_sym1, p, 0.1, chart1)
        diff = (lhs(om, p, identity_cut1) - rhs(om, p, identity_cut1)).norm_inf()
        assert diff < 1e-4

    def test_commutes_with_diffeo(self, chart1, bump_sym1, identity_cut1, codomain4):
        # L-hat_X (mu-hat t) = mu-hat (L-hat_{mu_* X} t) for a linear pair
        mu = diffeo("scaling:2", 1)
        x_field = vector_field("linear_x", chart1)       # x d_x, mu_* X = y d_y
        x_pushed = pushforward_vector_field(mu, x_field, codomain4)
        t = embed_iota_field(tensor_field("sin_dx", 1))  # element over N
        lhs = lie_hat(x_field, mu_hat(mu, t, codomain4))
        rhs = mu_hat(mu, lie_hat(x_pushed, t), codomain4)
        p = np.array([0.3])
        om = make_mollifier(bump_sym1, p, 0.1, chart1)
        a = lhs(om, p, identity_cut1)
        b = rhs(om, p, identity_cut1)
        assert (a - b).norm_inf() < 1e-4
