#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spdcsim/gaussian.hpp"

using namespace spdcsim;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("vacuum state") {
  const GaussianState one = make_vacuum(1);
  CHECK(max_abs_diff(one.cov, Eigen::MatrixXd::Identity(2, 2)) == 0.0);
  CHECK(one.disp.isZero(0.0));

  const GaussianState three = make_vacuum(3);
  CHECK(max_abs_diff(three.cov, Eigen::MatrixXd::Identity(6, 6)) == 0.0);
  CHECK(is_physical(three));

  CHECK_THROWS_AS(make_vacuum(0), std::invalid_argument);
}

TEST_CASE("coherent state") {
  CHECK(max_abs_diff(make_coherent(0, 0).cov, make_vacuum(1).cov) == 0.0);
  CHECK(make_coherent(0, 0).disp.isZero(0.0));

  const double s2 = std::sqrt(2.0);
  CHECK(make_coherent(1, 0).disp(0) == doctest::Approx(s2).epsilon(1e-15));
  CHECK(make_coherent(1, 0).disp(1) == 0.0);
  CHECK(make_coherent(0, 1).disp(0) == 0.0);
  CHECK(make_coherent(0, 1).disp(1) == doctest::Approx(s2).epsilon(1e-15));
}

TEST_CASE("tmsv covariance") {
  CHECK(max_abs_diff(make_tmsv(0).cov, Eigen::MatrixXd::Identity(4, 4)) ==
        0.0);

  const GaussianState st = make_tmsv(1.0);
  const double c = 2.0 * std::sqrt(2.0);
  CHECK(st.cov(0, 0) == doctest::Approx(3.0));
  CHECK(st.cov(0, 1) == doctest::Approx(c));
  CHECK(st.cov(2, 3) == doctest::Approx(-c));
  CHECK(st.cov(0, 2) == 0.0);

  for (double mu : {0.1, 1.0, 10.0}) {
    for (Sign sign : {Sign::plus, Sign::minus}) {
      const GaussianState t = make_tmsv(mu, sign);
      CHECK(t.cov.determinant() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(is_physical(t));
    }
  }
  CHECK_THROWS_AS(make_tmsv(-0.1), std::invalid_argument);
}

TEST_CASE("thermal state and partial trace") {
  CHECK(max_abs_diff(make_thermal(0).cov, Eigen::MatrixXd::Identity(2, 2)) ==
        0.0);
  CHECK(make_thermal(0.5).cov(0, 0) == doctest::Approx(2.0));
  CHECK(make_thermal(0.5).cov(1, 1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(make_thermal(-1), std::invalid_argument);

  const double mu = 0.7;
  const GaussianState tmsv = make_tmsv(mu, Sign::plus, "S", "I");
  const std::array<int, 1> keep{0};
  const GaussianState reduced = partial_trace(tmsv, keep);
  CHECK(max_abs_diff(reduced.cov, make_thermal(mu).cov) < 1e-15);
  CHECK(reduced.mode_labels == std::vector<std::string>{"S"});

  const std::array<int, 2> all{0, 1};
  CHECK(max_abs_diff(partial_trace(tmsv, all).cov, tmsv.cov) == 0.0);

  const GaussianState prod =
      tensor(make_vacuum(1, {"v"}), make_thermal(mu, "th"));
  const std::array<int, 1> keep_th{1};
  CHECK(max_abs_diff(partial_trace(prod, keep_th).cov, make_thermal(mu).cov) ==
        0.0);

  CHECK_THROWS_AS(partial_trace(tmsv, std::span<const int>{}),
                  std::invalid_argument);
  const std::array<int, 1> bad{5};
  CHECK_THROWS_AS(partial_trace(tmsv, bad), std::invalid_argument);
}

TEST_CASE("tensor product respects global xxpp ordering") {
  const GaussianState vv = tensor(make_vacuum(1, {"a"}), make_vacuum(1, {"b"}));
  CHECK(max_abs_diff(vv.cov, Eigen::MatrixXd::Identity(4, 4)) == 0.0);

  // Two TMSVs: the printed 4-mode form has per-quadrature blocks
  // diag(gamma_pair, gamma_pair).
  const double mu = 0.3;
  const GaussianState two = tensor(make_tmsv(mu, Sign::plus, "AH", "AV"),
                                   make_tmsv(mu, Sign::plus, "BH", "BV"));
  const double c = 2.0 * std::sqrt(mu * (mu + 1.0));
  const double v = 2.0 * mu + 1.0;
  Eigen::MatrixXd xblock = Eigen::MatrixXd::Zero(4, 4);
  xblock << v, c, 0, 0, c, v, 0, 0, 0, 0, v, c, 0, 0, c, v;
  CHECK(max_abs_diff(two.cov.topLeftCorner(4, 4), xblock) < 1e-15);
  CHECK(max_abs_diff(two.cov.block(4, 4, 4, 4),
                     (xblock - 2.0 * c * (Eigen::MatrixXd(4, 4) << 0, 1, 0, 0,
                                          1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0)
                                             .finished())) < 1e-15);
  CHECK(two.cov.topRightCorner(4, 4).isZero(0.0));

  const std::array<int, 2> first{0, 1};
  CHECK(max_abs_diff(partial_trace(two, first).cov, make_tmsv(mu).cov) <
        1e-15);

  CHECK_THROWS_AS(tensor(make_vacuum(1, {"x"}), make_vacuum(1, {"x"})),
                  std::invalid_argument);
}

TEST_CASE("beam splitter matrix") {
  CHECK(max_abs_diff(beam_splitter(2, 1.0, 0, 1).matrix,
                     Eigen::MatrixXd::Identity(4, 4)) == 0.0);

  const SymplecticOp half = beam_splitter(2, 0.5, 0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(half.matrix(0, 0) == doctest::Approx(r));
  CHECK(half.matrix(0, 1) == doctest::Approx(r));
  CHECK(half.matrix(1, 0) == doctest::Approx(-r));
  CHECK(half.matrix(2, 2) == doctest::Approx(r));
  CHECK(half.matrix(2, 3) == doctest::Approx(r));
  CHECK(half.matrix(3, 2) == doctest::Approx(-r));

  std::mt19937 rng(12);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const SymplecticOp op = beam_splitter(3, uni(rng), 0, 2);
    CHECK(op.orthogonality_defect() < 1e-12);
    CHECK(op.symplectic_defect() < 1e-12);
  }
  CHECK_THROWS_AS(beam_splitter(2, 1.5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(beam_splitter(2, 0.5, 0, 0), std::invalid_argument);
}

TEST_CASE("phase shift embedding") {
  CHECK(max_abs_diff(phase_shift(2, 0.0, 0).matrix,
                     Eigen::MatrixXd::Identity(4, 4)) == 0.0);

  // The rotation couples rows i and n+i; nothing else moves.
  const SymplecticOp op = phase_shift(3, 0.7, 1);
  CHECK(op.matrix(1, 1) == doctest::Approx(std::cos(0.7)));
  CHECK(op.matrix(1, 4) == doctest::Approx(std::sin(0.7)));
  CHECK(op.matrix(4, 1) == doctest::Approx(-std::sin(0.7)));
  CHECK(op.matrix(4, 4) == doctest::Approx(std::cos(0.7)));
  CHECK(op.matrix(0, 0) == 1.0);
  CHECK(op.matrix(2, 2) == 1.0);
  CHECK(op.orthogonality_defect() < 1e-12);
  CHECK(op.symplectic_defect() < 1e-12);

  const GaussianState vac = make_vacuum(1);
  const GaussianState rotated =
      apply_symplectic(vac, phase_shift(1, std::numbers::pi / 2, 0));
  CHECK(max_abs_diff(rotated.cov, vac.cov) < 1e-15);

  std::mt19937 rng(34);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double p1 = ang(rng), p2 = ang(rng);
    const Eigen::MatrixXd lhs =
        phase_shift(2, p1, 1).then(phase_shift(2, p2, 1)).matrix;
    const Eigen::MatrixXd rhs = phase_shift(2, p1 + p2, 1).matrix;
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("apply symplectic") {
  const GaussianState st = make_tmsv(0.4);
  const GaussianState same = apply_symplectic(st, make_identity_op(2));
  CHECK(max_abs_diff(same.cov, st.cov) == 0.0);

  const GaussianState three =
      tensor(make_tmsv(0.8, Sign::plus, "a", "b"), make_vacuum(1, {"c"}));
  const double before = total_mean_photons(three);
  const GaussianState mixed =
      apply_symplectic(three, beam_splitter(3, 0.5, 0, 2));
  CHECK(total_mean_photons(mixed) == doctest::Approx(before).epsilon(1e-12));
  CHECK(is_physical(mixed));

  CHECK_THROWS_AS(apply_symplectic(st, make_identity_op(3)),
                  std::invalid_argument);
}

TEST_CASE("loss channel") {
  const double mu = 0.9;
  const GaussianState th = make_thermal(mu);
  CHECK(max_abs_diff(apply_loss(th, LossChannel::uniform(1, 1.0)).cov,
                     th.cov) == 0.0);

  const double t = 0.37;
  CHECK(max_abs_diff(apply_loss(th, LossChannel::uniform(1, t)).cov,
                     make_thermal(t * mu).cov) < 1e-12);

  // TMSV through asymmetric loss reproduces the printed matrix.
  const double ta = 0.42, tb = 0.29;
  const GaussianState lossy = apply_loss(
      make_tmsv(mu), LossChannel{{ta, tb}});
  const double off = 2.0 * std::sqrt(ta * tb * mu * (mu + 1.0));
  CHECK(lossy.cov(0, 0) == doctest::Approx(2.0 * ta * mu + 1.0));
  CHECK(lossy.cov(1, 1) == doctest::Approx(2.0 * tb * mu + 1.0));
  CHECK(lossy.cov(0, 1) == doctest::Approx(off));
  CHECK(lossy.cov(2, 3) == doctest::Approx(-off));

  // Composition law on covariances.
  const GaussianState twice =
      apply_loss(apply_loss(th, LossChannel::uniform(1, 0.6)),
                 LossChannel::uniform(1, 0.5));
  CHECK(max_abs_diff(twice.cov,
                     apply_loss(th, LossChannel::uniform(1, 0.3)).cov) <
        1e-12);

  // Coherent displacement attenuates as sqrt(t).
  const GaussianState coh = apply_loss(make_coherent(2.0, -1.0),
                                       LossChannel::uniform(1, 0.25));
  CHECK(coh.disp(0) == doctest::Approx(std::sqrt(2.0) * 1.0));
  CHECK(coh.disp(1) == doctest::Approx(std::sqrt(2.0) * -0.5));

  std::mt19937 rng(56);
  std::uniform_real_distribution<double> mudist(0.0, 10.0);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const GaussianState s = apply_loss(
        make_tmsv(mudist(rng)), LossChannel{{tdist(rng), tdist(rng)}});
    CHECK(min_physicality_eigenvalue(s) >= -1e-9);
  }
}

TEST_CASE("mode mismatch expansion") {
  const double mu = 0.5;
  const GaussianState base = make_tmsv(mu, Sign::plus, "A1", "B1");

  SUBCASE("xi = 1 leaves auxiliaries in vacuum") {
    const GaussianState ex =
        expand_mode_mismatch(base, MismatchSpec{1.0, "A1", "B1"});
    CHECK(ex.n_modes() == 6);
    CHECK(ex.mode_labels[2] == "A1.2");
    CHECK(ex.mode_labels[5] == "B1.3");
    const Eigen::MatrixXd diff =
        ex.cov - tensor(base, make_vacuum(4, {"w", "x", "y", "z"})).cov;
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("xi = 0 moves the signal into the auxiliaries") {
    const GaussianState ex =
        expand_mode_mismatch(base, MismatchSpec{0.0, "A1", "B1"});
    const std::array<int, 2> originals{0, 1};
    CHECK((partial_trace(ex, originals).cov -
           Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    // A's signal sits in A1.2, B's in B1.3.
    CHECK(partial_trace(ex, std::array<int, 1>{2}).cov(0, 0) ==
          doctest::Approx(2.0 * mu + 1.0));
    CHECK(partial_trace(ex, std::array<int, 1>{5}).cov(0, 0) ==
          doctest::Approx(2.0 * mu + 1.0));
  }

  SUBCASE("photon number is conserved") {
    std::mt19937 rng(78);
    std::uniform_real_distribution<double> xid(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const GaussianState ex =
          expand_mode_mismatch(base, MismatchSpec{xid(rng), "A1", "B1"});
      CHECK(total_mean_photons(ex) ==
            doctest::Approx(total_mean_photons(base)).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(expand_mode_mismatch(base, MismatchSpec{1.5, "A1", "B1"}),
                  std::invalid_argument);
}

TEST_CASE("characteristic function") {
  const GaussianState vac = make_vacuum(1);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(evaluate_characteristic_function(vac, zero) ==
        std::complex<double>(1.0, 0.0));

  Eigen::VectorXd x(2);
  x << 2.0, 0.0;
  CHECK(std::abs(evaluate_characteristic_function(vac, x) -
                 std::exp(-1.0)) < 1e-15);

  const GaussianState coh = make_coherent(1.0, 0.0);
  x << 1.0, 0.0;
  const std::complex<double> expected =
      std::exp(-0.25) * std::exp(std::complex<double>(0.0, -std::sqrt(2.0)));
  CHECK(std::abs(evaluate_characteristic_function(coh, x) - expected) <
        1e-15);

  Eigen::VectorXd wrong = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(evaluate_characteristic_function(vac, wrong),
                  std::invalid_argument);
}

TEST_CASE("partial trace commutes with disjoint operations") {
  const GaussianState st =
      tensor(make_tmsv(0.6, Sign::plus, "a", "b"), make_thermal(0.2, "c"));
  // Operate on mode c only; the (a,b) reduction must be unaffected.
  const GaussianState turned = apply_symplectic(st, phase_shift(3, 1.1, 2));
  const std::array<int, 2> keep{0, 1};
  CHECK((partial_trace(turned, keep).cov - partial_trace(st, keep).cov)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("label lookup") {
  const GaussianState st = make_tmsv(0.1, Sign::plus, "sig", "idl");
  CHECK(st.index_of("idl") == 1);
  CHECK(st.has_mode("sig"));
  CHECK(!st.has_mode("nope"));
  CHECK_THROWS_AS(st.index_of("nope"), std::invalid_argument);
}
