import math

import numpy as np
import pytest

from rpeqda import qda, rpe, schemes
from rpeqda.covariance import DenseCovariance
from rpeqda.dataset import Dataset
from rpeqda.errors import DimensionMismatch, MemberDegenerate, ReducedDimTooLarge, SingularCovariance
from rpeqda.randproj import ProjectionFamily, generate
from rpeqda.rng import stream

SN = ProjectionFamily.STANDARD_NORMAL
STP = ProjectionFamily.SPARSE_THREE_POINT


def two_class_data(rng, n_per_class=30, p=5, shift=1.5):
    x0 = rng.standard_normal((n_per_class, p))
    scale = np.linspace(1.0, 2.0, p)
    x1 = rng.standard_normal((n_per_class, p)) * scale + shift
    features = np.vstack([x0, x1])
    labels = ("0",) * n_per_class + ("1",) * n_per_class
    return Dataset(features, labels)


def random_spd(rng, dim):
    a = rng.standard_normal((dim, dim))
    return a @ a.T + dim * np.eye(dim)


class TestFit:
    def test_determinism(self):
        data = two_class_data(np.random.default_rng(1))
        config = rpe.RpeConfig(B=5, d=3, master_seed=77)
        m1 = rpe.rpe_fit(data, config)
        m2 = rpe.rpe_fit(data, config)
        for a, b in zip(m1.members, m2.members):
            np.testing.assert_array_equal(a.matrix.to_dense(), b.matrix.to_dense())
        z = np.random.default_rng(2).standard_normal((10, 5))
        np.testing.assert_array_equal(rpe.rpe_scores_rows(m1, z),
                                      rpe.rpe_scores_rows(m2, z))

    def test_reduced_dim_too_large(self):
        data = two_class_data(np.random.default_rng(1), n_per_class=6)
        with pytest.raises(ReducedDimTooLarge):
            rpe.rpe_fit(data, rpe.RpeConfig(B=2, d=6))

    def test_default_dim_resolution(self):
        data = two_class_data(np.random.default_rng(1), n_per_class=30, p=5)
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=2, d=None))
        # min(29, ceil(log 5) = 2, 10) = 2
        assert model.config.d == 2
        assert rpe.default_reduced_dim(10000, 100) == 10
        assert rpe.default_reduced_dim(2000, 100) == 8
        assert rpe.default_reduced_dim(512, 5) == 4

    def test_member_degenerate_on_constant_features(self):
        features = np.ones((20, 8))
        labels = ("a",) * 10 + ("b",) * 10
        data = Dataset(features, labels)
        config = rpe.RpeConfig(B=2, d=2, max_regen_retries=3)
        with pytest.raises(MemberDegenerate) as err:
            rpe.rpe_fit(data, config)
        assert err.value.member == 1
        assert isinstance(err.value, SingularCovariance)

    def test_member_seeds_documented_derivation(self):
        data = two_class_data(np.random.default_rng(3))
        config = rpe.RpeConfig(B=4, d=3, master_seed=123)
        model = rpe.rpe_fit(data, config)
        for b, member in enumerate(model.members, start=1):
            assert member.matrix.seed == rpe.member_seed(123, b)

    def test_projected_fit_equals_projected_estimators(self):
        # member QDA mean/cov must equal R mu_hat and R Sigma_hat R'
        rng = np.random.default_rng(4)
        data = two_class_data(rng, n_per_class=20, p=7)
        config = rpe.RpeConfig(B=1, d=3, master_seed=5)
        model = rpe.rpe_fit(data, config)
        member = model.members[0]
        r = member.matrix.to_dense()
        for c in member.model.classes:
            rows = data.features[data.class_indices(c.label)]
            mu = rows.mean(axis=0)
            centered = rows - mu
            ambient_cov = centered.T @ centered / (len(rows) - 1)
            np.testing.assert_allclose(c.mean, r @ mu, rtol=1e-10)
            np.testing.assert_allclose(
                c.cov_factor.lower @ c.cov_factor.lower.T,
                r @ ambient_cov @ r.T, rtol=1e-8, atol=1e-10)


class TestScores:
    def test_identical_members_average_to_single(self):
        data = two_class_data(np.random.default_rng(5))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=1, d=3, master_seed=9))
        member = model.members[0]
        tripled = rpe.RpeModel(config=model.config, p=model.p,
                               class_labels=model.class_labels,
                               members=(member, member, member))
        z = np.random.default_rng(6).standard_normal(5)
        np.testing.assert_allclose(rpe.rpe_scores(tripled, z),
                                   rpe.rpe_scores(model, z), rtol=1e-12)

    def test_pairwise_mean_arithmetic(self):
        # members with discriminants 1.0 and -0.2 average to 0.4
        def const_member(d01):
            classes = (
                qda.GaussianClassModel("0", 0.5, math.log(0.5) + d01,
                                       np.zeros(1), _unit_factor()),
                qda.GaussianClassModel("1", 0.5, math.log(0.5),
                                       np.zeros(1), _unit_factor()))
            matrix = generate(SN, 1, 3, seed=int(d01 * 10) & 0xFFFF)
            return rpe.ProjectionMember(matrix=matrix,
                                        model=qda.QdaModel(classes=classes))

        model = rpe.RpeModel(config=rpe.RpeConfig(B=2, d=1), p=3,
                             class_labels=("0", "1"),
                             members=(const_member(1.0), const_member(-0.2)))
        scores = rpe.rpe_scores(model, np.zeros(3))
        assert scores[0] - scores[1] == pytest.approx(0.4, abs=1e-12)

    def test_replication_invariance(self):
        data = two_class_data(np.random.default_rng(7))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=3, d=3, master_seed=11))
        doubled = rpe.RpeModel(config=model.config, p=model.p,
                               class_labels=model.class_labels,
                               members=model.members + model.members)
        z_rows = np.random.default_rng(8).standard_normal((20, 5))
        np.testing.assert_allclose(rpe.rpe_scores_rows(doubled, z_rows),
                                   rpe.rpe_scores_rows(model, z_rows), atol=1e-12)
        for z in z_rows:
            assert rpe.rpe_classify(doubled, z) == rpe.rpe_classify(model, z)

    def test_member_permutation_tolerance(self):
        data = two_class_data(np.random.default_rng(9))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=8, d=3, master_seed=13))
        permuted = rpe.RpeModel(config=model.config, p=model.p,
                                class_labels=model.class_labels,
                                members=model.members[::-1])
        z_rows = np.random.default_rng(10).standard_normal((25, 5))
        base = rpe.rpe_scores_rows(model, z_rows)
        swapped = rpe.rpe_scores_rows(permuted, z_rows)
        assert np.max(np.abs(base - swapped) / np.maximum(np.abs(base), 1e-9)) <= 1e-10
        for z in z_rows:
            assert rpe.rpe_classify(model, z) == rpe.rpe_classify(permuted, z)

    def test_prior_scaling_invariance_of_pairwise_discriminants(self):
        data = two_class_data(np.random.default_rng(11))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=4, d=3, master_seed=15))
        shift = math.log(3.7)
        scaled_members = tuple(
            rpe.ProjectionMember(
                matrix=m.matrix,
                model=qda.QdaModel(classes=tuple(
                    qda.GaussianClassModel(label=c.label, prior=c.prior,
                                           log_prior=c.log_prior + shift,
                                           mean=c.mean, cov_factor=c.cov_factor)
                    for c in m.model.classes)))
            for m in model.members)
        scaled = rpe.RpeModel(config=model.config, p=model.p,
                              class_labels=model.class_labels,
                              members=scaled_members)
        z = np.random.default_rng(12).standard_normal(5)
        s0 = rpe.rpe_scores(model, z)
        s1 = rpe.rpe_scores(scaled, z)
        assert (s1[0] - s1[1]) == pytest.approx(s0[0] - s0[1], abs=1e-12)

    def test_dimension_mismatch(self):
        data = two_class_data(np.random.default_rng(13))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=2, d=3))
        with pytest.raises(DimensionMismatch):
            rpe.rpe_scores(model, np.zeros(6))

    def test_single_member_reduces_to_member_qda(self):
        data = two_class_data(np.random.default_rng(14))
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=1, d=3, master_seed=21))
        member = model.members[0]
        z = np.random.default_rng(15).standard_normal(5)
        from rpeqda.randproj import project
        direct = qda.classify(member.model, project(member.matrix, z))
        assert rpe.rpe_classify(model, z) == direct


def _unit_factor():
    from rpeqda.linalg import cholesky
    return cholesky(np.eye(1))


class TestFullDimensionEquivalence:
    def test_sample_mode_square_projection_matches_classical(self):
        rng = np.random.default_rng(16)
        data = two_class_data(rng, n_per_class=30, p=5)
        classical = qda.fit(data)
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=1, d=5, master_seed=33))
        z_rows = rng.standard_normal((100, 5)) * 1.5
        ens = rpe.rpe_scores_rows(model, z_rows)
        direct = qda.class_scores_rows(classical, z_rows)
        np.testing.assert_allclose(ens[:, 0] - ens[:, 1],
                                   direct[:, 0] - direct[:, 1], atol=1e-8)

    def test_population_mode_square_projection_matches_classical(self):
        rng = np.random.default_rng(17)
        pops = [(0.5, rng.standard_normal(5), DenseCovariance(random_spd(rng, 5))),
                (0.5, rng.standard_normal(5), DenseCovariance(random_spd(rng, 5)))]
        config = rpe.RpeConfig(B=1, d=5, master_seed=44)
        z_rows = rng.standard_normal((100, 5)) * 2.0
        ens = rpe.population_rpe_scores(pops, 5, config, z_rows)
        direct = qda.population_class_scores(pops, z_rows)
        np.testing.assert_allclose(ens[:, 0] - ens[:, 1],
                                   direct[:, 0] - direct[:, 1], atol=1e-8)


class TestIndependentMemberOracle:
    def test_aggregated_decisions_match_sklearn_members(self):
        # independent per-member implementation; for two classes the
        # averaged log-posterior differences equal the averaged score
        # differences, so the aggregated decisions must coincide
        sklearn_qda = pytest.importorskip("sklearn.discriminant_analysis")
        rng = np.random.default_rng(23)
        data = two_class_data(rng, n_per_class=40, p=30)
        model = rpe.rpe_fit(data, rpe.RpeConfig(B=20, d=4, master_seed=3))
        z = rng.standard_normal((60, 30)) + 0.7
        from rpeqda.randproj import project_many
        members = [m.matrix for m in model.members]
        proj_test = project_many(members, z)
        proj_train = project_many(members, data.features)
        y = np.array([0] * 40 + [1] * 40)
        ours = np.zeros((60, 2))
        theirs = np.zeros((60, 2))
        for i, member in enumerate(model.members):
            ours += qda.class_scores_rows(member.model, proj_test[i])
            fitted = sklearn_qda.QuadraticDiscriminantAnalysis(
                store_covariance=False, tol=0.0).fit(proj_train[i], y)
            theirs += fitted.predict_log_proba(proj_test[i])
        np.testing.assert_array_equal(np.argmax(ours, axis=1),
                                      np.argmax(theirs, axis=1))


class TestPopulationMode:
    def test_identical_populations_zero_discriminant(self):
        rng = np.random.default_rng(18)
        cov = DenseCovariance(random_spd(rng, 6))
        mean = rng.standard_normal(6)
        pops = [(0.5, mean, cov), (0.5, mean, cov)]
        config = rpe.RpeConfig(B=3, d=2, master_seed=55)
        z_rows = rng.standard_normal((10, 6))
        scores = rpe.population_rpe_scores(pops, 6, config, z_rows)
        np.testing.assert_allclose(scores[:, 0], scores[:, 1], atol=1e-12)

    def test_scale_pair_member_log_det_gap(self):
        # members of a (Sigma, c Sigma) pair carry log-det difference
        # d log c exactly, checked against dense computation at p = 50
        spec = schemes.build_example2(50, c=2.0, r=3, spike_bound=4.0, seed=2)
        pops = [(pop.prior, pop.mean, pop.cov) for pop in spec.populations]
        config = rpe.RpeConfig(B=4, d=6, master_seed=66)
        for _, matrix, model in rpe.population_members(pops, 50, config):
            gap = model.classes[1].cov_factor.log_det - model.classes[0].cov_factor.log_det
            assert gap == pytest.approx(6 * math.log(2.0), rel=1e-10)
            r = matrix.to_dense()
            dense_cov = spec.populations[0].cov.dense()
            want = np.linalg.slogdet(r @ dense_cov @ r.T)[1]
            assert model.classes[0].cov_factor.log_det == pytest.approx(want, rel=1e-8)

    def test_population_scores_single_vector_shape(self):
        rng = np.random.default_rng(19)
        cov = DenseCovariance(random_spd(rng, 4))
        pops = [(0.5, np.zeros(4), cov), (0.5, np.ones(4), cov)]
        config = rpe.RpeConfig(B=2, d=2, master_seed=77)
        single = rpe.population_rpe_scores(pops, 4, config, np.zeros(4))
        assert single.shape == (2,)
