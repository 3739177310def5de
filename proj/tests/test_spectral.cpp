#include "collapse/checks.hpp"
#include "collapse/model.hpp"
#include "collapse/spectral.hpp"

#include "spectral_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace collapse;

namespace {

double pair_rel_diff(const PairState& a, const PairState& b) {
    const PairState d{a.features - b.features, a.weights - b.weights};
    return energy_norm(d) / std::max(energy_norm(b), 1e-300);
}

const ModelDims kDims{3, 3, 15};
const std::vector<Eigenspace> kSpaces{Eigenspace::E1Plus, Eigenspace::E1Minus,
                                      Eigenspace::E2Plus, Eigenspace::E2Minus,
                                      Eigenspace::E3};

} // namespace

TEST_CASE("operator eigen-relations on canonical members") {
    const double root_n = std::sqrt(3.0);

    // E1+ members have eigenvalue sqrt(N) for every beta
    const PairState u1 =
        checks::random_eigenspace_element(Eigenspace::E1Plus, kDims, 5);
    for (double beta : {0.0, 0.17, 1.0 / 3.0}) {
        const PairState lu = apply_operator(LinearizedOperator{kDims, beta}, u1);
        CHECK((lu.features - root_n * u1.features).norm() < 1e-12);
        CHECK((lu.weights - root_n * u1.weights).norm() < 1e-12);
    }

    // kernel members map to zero
    const PairState u3 =
        checks::random_eigenspace_element(Eigenspace::E3, kDims, 6);
    const PairState lu3 = apply_operator(LinearizedOperator{kDims, 0.21}, u3);
    CHECK(energy_norm(lu3) < 1e-12 * energy_norm(u3));

    // E2+ eigenvalue sqrt(N)(1 - C beta) vanishes at beta = 1/C
    const PairState u2 =
        checks::random_eigenspace_element(Eigenspace::E2Plus, kDims, 7);
    const PairState lu2 =
        apply_operator(LinearizedOperator{kDims, 1.0 / 3.0}, u2);
    CHECK(energy_norm(lu2) < 1e-12 * energy_norm(u2));
}

TEST_CASE("projectors fix their eigenspace and annihilate the others") {
    for (Eigenspace space : kSpaces) {
        const PairState u = checks::random_eigenspace_element(space, kDims, 11);
        CHECK(pair_rel_diff(project(space, u), u) < 1e-12);
        for (Eigenspace other : kSpaces) {
            if (other == space) continue;
            CHECK(energy_norm(project(other, u)) < 1e-12 * energy_norm(u));
        }
    }
}

TEST_CASE("five projections reassemble the input") {
    for (int trial = 0; trial < 5; ++trial) {
        const PairState u = checks::random_pair(kDims, 23 + trial);
        PairState sum{Matrix::Zero(15, 9), Matrix::Zero(3, 15)};
        for (Eigenspace space : kSpaces) {
            const PairState p = project(space, u);
            sum.features += p.features;
            sum.weights += p.weights;
        }
        CHECK(pair_rel_diff(sum, u) < 1e-12);
    }
}

TEST_CASE("oracle basis has the stated dimensions") {
    CHECK(oracle::orthonormal_basis(Eigenspace::E1Plus, kDims).size() == 30);
    CHECK(oracle::orthonormal_basis(Eigenspace::E1Minus, kDims).size() == 30);
    CHECK(oracle::orthonormal_basis(Eigenspace::E2Plus, kDims).size() == 15);
    CHECK(oracle::orthonormal_basis(Eigenspace::E2Minus, kDims).size() == 15);
    CHECK(oracle::orthonormal_basis(Eigenspace::E3, kDims).size() == 90);

    int total = 0;
    for (Eigenspace space : kSpaces) {
        const int dim = eigenspace_dim(space, kDims);
        CHECK(oracle::orthonormal_basis(space, kDims).size() ==
              static_cast<std::size_t>(dim));
        total += dim;
    }
    CHECK(total == 180); // pC(N+1)

    // empty kernel when N = 1
    CHECK(oracle::orthonormal_basis(Eigenspace::E3, ModelDims{2, 1, 2}).empty());
}

TEST_CASE("oracle bases are orthonormal in the energy inner product") {
    for (Eigenspace space : {Eigenspace::E1Plus, Eigenspace::E2Minus,
                             Eigenspace::E3}) {
        const auto basis = oracle::orthonormal_basis(space, ModelDims{3, 2, 4});
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double expected = i == j ? 1.0 : 0.0;
                CHECK(energy_inner(basis[i], basis[j]) ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
    }
}

TEST_CASE("operator equals its spectral decomposition on general inputs") {
    for (double beta : {0.0, 0.11, 1.0 / 3.0}) {
        const LinearizedOperator op{kDims, beta};
        const PairState u = checks::random_pair(kDims, 57);
        const PairState lu = apply_operator(op, u);
        PairState assembled{Matrix::Zero(15, 9), Matrix::Zero(3, 15)};
        for (Eigenspace space : kSpaces) {
            const double lambda = eigenvalue(space, kDims, beta);
            const PairState p = project(space, u);
            assembled.features += lambda * p.features;
            assembled.weights += lambda * p.weights;
        }
        CHECK(pair_rel_diff(lu, assembled) < 1e-12);
    }
}

TEST_CASE("closed-form projectors agree with the basis oracle") {
    for (const ModelDims dims : {ModelDims{3, 3, 15}, ModelDims{4, 2, 5}}) {
        for (int trial = 0; trial < 10; ++trial) {
            const PairState u = checks::random_pair(dims, 31 + trial);
            for (Eigenspace space : kSpaces) {
                const PairState fast = project(space, u);
                const PairState slow = oracle::basis_oracle_project(space, u);
                const PairState d{fast.features - slow.features,
                                  fast.weights - slow.weights};
                CHECK(energy_norm(d) < 1e-10 * energy_norm(u));
            }
        }
    }
}

TEST_CASE("projection onto the invariant subspace") {
    const ModelState snc = synthesize_snc_point(kDims, 3);
    const ModelState fixed = project_S(snc);
    CHECK((fixed.features - snc.features).norm() < 1e-13);
    CHECK((fixed.weights - snc.weights).norm() < 1e-13);
    CHECK((fixed.bias - snc.bias).norm() < 1e-15);

    ModelState one_hot{Matrix::Zero(5, 8), Matrix::Zero(4, 5), Vector::Unit(4, 0)};
    const ModelState projected = project_S(one_hot);
    CHECK((projected.bias - Vector::Constant(4, 0.25)).norm() == 0.0);

    // output lies in S: pair part in T, bias part constant
    const ModelState anywhere = checks::random_state(kDims, 79);
    const ModelState in_s = project_S(anywhere);
    CHECK(t_membership_defect(PairState{in_s.features, in_s.weights}) <
          1e-12 * energy_norm(anywhere));
    CHECK((in_s.bias - Vector::Constant(3, in_s.bias.mean())).norm() == 0.0);

    // residual of the projection is energy-orthogonal to random members of S
    const ModelState z = checks::random_state(kDims, 77);
    const ModelState on_s = project_S(z);
    const ModelState defect{z.features - on_s.features, z.weights - on_s.weights,
                            z.bias - on_s.bias};
    for (int trial = 0; trial < 10; ++trial) {
        const ModelState s = checks::random_s_state(kDims, 81 + trial);
        CHECK(std::abs(energy_inner(defect, s)) <
              1e-12 * energy_norm(defect) * energy_norm(s));
    }
}

TEST_CASE("relative distance from the invariant subspace") {
    const ModelState snc = synthesize_snc_point(kDims, 9);
    CHECK(distance_to_S_relative(snc) < 1e-13);

    // class-mean-zero features with no weights and no bias: fully orthogonal
    const PairState kernel_member =
        checks::random_eigenspace_element(Eigenspace::E3, kDims, 13);
    const ModelState orthogonal{kernel_member.features, kernel_member.weights,
                                Vector::Zero(3)};
    CHECK(distance_to_S_relative(orthogonal) == doctest::Approx(1.0).epsilon(1e-12));

    // small orthogonal perturbation of a strong-collapse point
    ModelState perturbed = snc;
    const double delta = 1e-3 * energy_norm(snc);
    PairState direction = kernel_member;
    const double norm = energy_norm(direction);
    perturbed.features += (delta / norm) * direction.features;
    CHECK(distance_to_S_relative(perturbed) ==
          doctest::Approx(delta / energy_norm(perturbed)).epsilon(1e-6));

    ModelState zero{Matrix::Zero(15, 9), Matrix::Zero(3, 15), Vector::Zero(3)};
    CHECK_THROWS_AS(distance_to_S_relative(zero), std::domain_error);
}

TEST_CASE("eigenvalue formulas") {
    CHECK(eigenvalue(Eigenspace::E1Plus, kDims, 0.1) == std::sqrt(3.0));
    CHECK(eigenvalue(Eigenspace::E1Minus, kDims, 0.9) == -std::sqrt(3.0));
    CHECK(eigenvalue(Eigenspace::E2Plus, kDims, 1.0 / 3.0) == 0.0);
    CHECK(eigenvalue(Eigenspace::E3, kDims, 0.5) == 0.0);
    CHECK(beta_of_time(0.0, kDims) == 0.0);
    CHECK(beta_of_time(100.0, kDims) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("spectral invariant groups hold") {
    CHECK(checks::operator_self_adjoint(41).pass);
    CHECK(checks::operator_eigen_relations(42).pass);
    CHECK(checks::projector_algebra(43).pass);
    CHECK(checks::pythagorean_identity(44).pass);
    CHECK(checks::t_equals_e1plus(45).pass);
}
