#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spdcsim/experiments.hpp"
#include "spdcsim/fock.hpp"

using namespace spdcsim;

namespace {

HomConfig random_hom(std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  HomConfig c;
  c.mu = 0.01 + uni(rng);
  c.t_a = 0.05 + 0.95 * uni(rng);
  c.t_b = 0.05 + 0.95 * uni(rng);
  c.eta_a = 0.05 + 0.95 * uni(rng);
  c.eta_b = 0.05 + 0.95 * uni(rng);
  c.xi = uni(rng);
  c.sign = uni(rng) < 0.5 ? Sign::plus : Sign::minus;
  return c;
}

}  // namespace

TEST_CASE("hom coincidence matches the printed closed form") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const HomConfig c = random_hom(rng);
    for (bool delayed : {false, true}) {
      const double generic = hom_coincidence(c, delayed);
      const double closed = hom_coincidence_closed_form(c, delayed);
      CHECK(generic == doctest::Approx(closed).epsilon(1e-10));
    }
  }
}

TEST_CASE("hom closed form with dark counts matches the generic engine") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    HomConfig c = random_hom(rng);
    c.nu_a = 0.2 * uni(rng);
    c.nu_b = 0.2 * uni(rng);
    CHECK(hom_coincidence(c, false) ==
          doctest::Approx(hom_coincidence_closed_form(c, false))
              .epsilon(1e-10));
  }
}

TEST_CASE("hom coincidence edge cases") {
  HomConfig c;
  c.mu = 0.0;
  CHECK(hom_coincidence(c, false) == doctest::Approx(0.0));
  CHECK(hom_coincidence(c, true) == doctest::Approx(0.0));
  CHECK_THROWS_AS(hom_visibility(c), undefined_visibility_error);
}

TEST_CASE("hom visibility values") {
  SUBCASE("ideal setup") {
    HomConfig c;  // t = eta = xi = 1
    c.mu = 1e-6;
    CHECK(hom_visibility(c) > 0.999);

    c.mu = 0.1;
    CHECK(std::abs(hom_visibility(c) - 2.2 / 2.3) < 2e-3);
  }

  SUBCASE("low efficiency limit") {
    HomConfig c;
    c.mu = 0.05;
    c.eta_a = c.eta_b = 0.01;
    CHECK(std::abs(hom_visibility(c) - 1.1 / 1.2) < 5e-3);
  }

  SUBCASE("no overlap means no dip") {
    HomConfig c;
    c.mu = 0.2;
    c.xi = 0.0;
    CHECK(hom_visibility(c) == doctest::Approx(0.0));
  }

  SUBCASE("visibility grows with mode match") {
    HomConfig c;
    c.mu = 0.1;
    c.t_a = 0.6;
    c.eta_a = 0.7;
    double prev = -1.0;
    for (double xi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      c.xi = xi;
      const double v = hom_visibility(c);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }

  SUBCASE("sign branch does not matter") {
    HomConfig c;
    c.mu = 0.33;
    c.t_a = 0.42;
    c.eta_b = 0.7;
    c.xi = 0.95;
    c.sign = Sign::plus;
    const double vp = hom_visibility(c);
    c.sign = Sign::minus;
    CHECK(vp == doctest::Approx(hom_visibility(c)).epsilon(1e-10));
  }
}

TEST_CASE("hom against the fock oracle") {
  HomConfig c;
  c.mu = 0.05;
  c.t_a = 0.9;
  c.t_b = 1.0;
  c.eta_a = 0.8;
  c.eta_b = 0.6;
  c.xi = 0.9;
  for (bool delayed : {false, true}) {
    const double gauss = hom_coincidence(c, delayed);
    const double fock = fock_hom_coincidence(c, delayed, 4);
    CHECK(std::abs(gauss - fock) < 1e-5);
  }
}

TEST_CASE("sagnac source structure") {
  CHECK((sagnac_source(0.0).cov - Eigen::MatrixXd::Identity(8, 8))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  const double mu = 1.0;
  const GaussianState st = sagnac_source(mu);
  const double c = 2.0 * std::sqrt(mu * (mu + 1.0));

  // Printed gamma^SL: x block with +c at (AH,BV) and (AV,BH), p block -c.
  Eigen::MatrixXd xblock = (2.0 * mu + 1.0) * Eigen::MatrixXd::Identity(4, 4);
  xblock(0, 3) = xblock(3, 0) = c;
  xblock(1, 2) = xblock(2, 1) = c;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  expected.topLeftCorner(4, 4) = xblock;
  expected.bottomRightCorner(4, 4) =
      2.0 * (2.0 * mu + 1.0) * Eigen::MatrixXd::Identity(4, 4) - xblock;
  CHECK((st.cov - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("epr coincidence matches the printed closed form") {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (double theta_a : {0.0, std::numbers::pi / 8, std::numbers::pi / 4}) {
    for (double theta_b : {0.0, std::numbers::pi / 8, std::numbers::pi / 4}) {
      for (double mu : {0.01, 0.1}) {
        EprConfig c;
        c.mu = mu;
        c.theta_a = theta_a;
        c.theta_b = theta_b;
        c.eta_ah = 0.1 + 0.9 * uni(rng);
        c.eta_av = uni(rng) * 0.2;
        c.eta_bh = 0.1 + 0.9 * uni(rng);
        c.eta_bv = uni(rng) * 0.2;
        const double generic = epr_coincidence(c);
        const double closed = epr_coincidence_closed_form(c);
        CHECK(generic == doctest::Approx(closed).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("epr edge cases") {
  EprConfig c;
  c.mu = 0.3;
  c.eta_ah = c.eta_av = c.eta_bh = c.eta_bv = 0.0;
  CHECK(epr_coincidence(c) == doctest::Approx(0.0));
  CHECK_THROWS_AS(epr_visibility(c), undefined_visibility_error);
}

TEST_CASE("epr visibility closed form") {
  // eta_V = 0, eta_H = eta on both arms reduces to
  // (1+mu)/(1+3mu+2eta(2-eta)mu^2).
  const double mu = 0.1, eta = 0.1;
  EprConfig c;
  c.mu = mu;
  c.eta_ah = c.eta_bh = eta;
  c.eta_av = c.eta_bv = 0.0;
  const double expected =
      (1.0 + mu) / (1.0 + 3.0 * mu + 2.0 * eta * (2.0 - eta) * mu * mu);
  CHECK(std::abs(epr_visibility(c) - expected) < 1e-6);
  CHECK(expected == doctest::Approx(0.84367).epsilon(1e-4));

  c.mu = 0.01;
  const double v = epr_visibility(c);
  CHECK(v >= 0.979);
  CHECK(v <= 0.981);
}

TEST_CASE("epr sign branch irrelevance") {
  EprConfig c;
  c.mu = 0.2;
  c.eta_ah = 0.4;
  c.eta_av = 0.02;
  c.eta_bh = 0.5;
  c.eta_bv = 0.01;
  c.sign = Sign::plus;
  const double vp = epr_visibility(c);
  c.sign = Sign::minus;
  CHECK(vp == doctest::Approx(epr_visibility(c)).epsilon(1e-10));
}

TEST_CASE("epr against the fock oracle") {
  EprConfig c;
  c.mu = 0.05;
  c.theta_a = 0.3;
  c.theta_b = 1.1;
  c.eta_ah = 0.7;
  c.eta_av = 0.05;
  c.eta_bh = 0.6;
  c.eta_bv = 0.08;
  const double gauss = epr_coincidence(c);
  const double fock = fock_epr_coincidence(c, 4);
  CHECK(std::abs(gauss - fock) < 1e-5);
}

TEST_CASE("ces state basics") {
  CesConfig c;
  c.m_bm = 1;
  c.mu = 0.0;
  CHECK((ces_state(c).cov - Eigen::MatrixXd::Identity(16, 16))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  CHECK(ces_detector_mode_labels(1) ==
        std::vector<std::string>{"1", "7", "3", "6"});

  // Total photons before loss: each Sagnac loop carries 4*mu.
  CesConfig full;
  full.m_bm = 2;
  full.mu = 0.37;
  full.eta = 1.0;
  full.theta_a = 0.4;
  full.theta_b = 1.2;
  CHECK(total_mean_photons(ces_state(full)) ==
        doctest::Approx(4.0 * full.mu * (full.m_bm + 1)).epsilon(1e-10));
}

TEST_CASE("ces state equals the transcribed block structure") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int m_bm : {1, 2, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      CesConfig c;
      c.m_bm = m_bm;
      c.mu = 0.01 + uni(rng);
      c.eta = 0.05 + 0.95 * uni(rng);
      c.theta_a = 3.0 * uni(rng);
      c.theta_b = 3.0 * uni(rng);
      c.sign = uni(rng) < 0.5 ? Sign::plus : Sign::minus;
      const GaussianState generic = ces_state(c);
      const GaussianState direct = ces_state_direct(c);
      const double diff =
          (generic.cov - direct.cov).cwiseAbs().maxCoeff();
      CAPTURE(m_bm);
      CAPTURE(c.mu);
      CAPTURE(c.theta_a);
      CHECK(diff < 1e-12);
    }
  }
}

TEST_CASE("ces joint click") {
  SUBCASE("vacuum never clicks without dark counts") {
    CesConfig c;
    c.mu = 0.0;
    CHECK(ces_joint_click(c) == doctest::Approx(0.0));
  }

  SUBCASE("matches the direct inclusion-exclusion sum") {
    // P = 1 + sum_m sum_{C(M,m)} (-2(1-nu))^m / sqrt(det(cov_C + I)).
    CesConfig c;
    c.m_bm = 1;
    c.mu = 0.21;
    c.eta = 0.64;
    c.nu = 0.013;
    c.theta_a = 0.3;
    c.theta_b = 0.9;
    const GaussianState st = ces_state(c);
    const auto det_modes = ces_detector_mode_labels(1);
    double expected = 1.0;
    for (std::size_t mask = 1; mask < 16; ++mask) {
      std::vector<std::string> subset;
      for (std::size_t i = 0; i < 4; ++i) {
        if (mask & (std::size_t{1} << i)) subset.push_back(det_modes[i]);
      }
      const GaussianState sub = partial_trace_labels(st, subset);
      const double det =
          (sub.cov +
           Eigen::MatrixXd::Identity(sub.cov.rows(), sub.cov.rows()))
              .determinant();
      expected += std::pow(-2.0 * (1.0 - c.nu),
                           static_cast<double>(subset.size())) /
                  std::sqrt(det);
    }
    CHECK(ces_joint_click(c) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("fock oracle agreement at m_bm = 1") {
    CesConfig c;
    c.m_bm = 1;
    c.mu = 0.05;
    c.eta = 0.5;
    c.nu = 0.0;
    c.theta_a = 0.0;
    c.theta_b = std::numbers::pi / 2;
    const double gauss = ces_joint_click(c);
    const double fock = fock_ces_joint_click(c, 3);
    CHECK(std::abs(gauss - fock) < 1e-4);
  }
}

TEST_CASE("ces visibility") {
  SUBCASE("ideal single swap at small mu") {
    CesConfig c;
    c.m_bm = 1;
    c.mu = 1e-4;
    c.eta = 1.0;
    c.nu = 0.0;
    CHECK(ces_visibility(c) > 0.99);
  }

  SUBCASE("fringe extrema sit at (0,0) and (0,pi/2)") {
    CesConfig c;
    c.m_bm = 1;
    c.mu = 0.05;
    c.eta = 0.5;
    std::vector<double> grid;
    for (int i = 0; i <= 32; ++i) {
      grid.push_back(std::numbers::pi * i / 32.0);
    }
    const std::vector<double> fringe = ces_fringe(c, grid);
    const double p00 = fringe.front();
    const double p0p2 = fringe[16];
    for (double p : fringe) {
      CHECK(p >= p00 - 1e-12);
      CHECK(p <= p0p2 + 1e-12);
    }
  }

  SUBCASE("oracle agreement") {
    // n_max = 3 resolves the joint probabilities to ~1e-7 but leaves a
    // 1.6e-3 visibility bias; one more photon per mode brings the
    // visibility within 1e-3.
    CesConfig c;
    c.m_bm = 1;
    c.mu = 0.05;
    c.eta = 0.5;
    c.nu = 0.0;
    const double gauss = ces_visibility(c);
    CesConfig f = c;
    f.theta_a = 0.0;
    f.theta_b = 0.0;
    const double fock_min = fock_ces_joint_click(f, 4, 6);
    f.theta_b = std::numbers::pi / 2;
    const double fock_max = fock_ces_joint_click(f, 4, 6);
    const double fock_vis = (fock_max - fock_min) / (fock_max + fock_min);
    CHECK(std::abs(gauss - fock_vis) < 1e-3);
  }

  SUBCASE("interior maximum with dark counts") {
    CesConfig c;
    c.m_bm = 1;
    c.eta = 0.04;
    c.nu = 1e-5;
    std::vector<double> vs;
    for (double mu : {1e-4, 3e-4, 1e-3, 1e-2, 1e-1}) {
      c.mu = mu;
      vs.push_back(ces_visibility(c));
    }
    const auto max_it = std::max_element(vs.begin(), vs.end());
    CHECK(max_it != vs.begin());
    CHECK(max_it != vs.end() - 1);
  }
}

TEST_CASE("ces distance sweep") {
  const std::array<double, 3> grid{1e-3, 1e-2, 1e-1};

  // alpha = 0 and eta_d = 1 reduces to the ideal-eta sweep.
  const auto ideal = ces_distance_sweep(500.0, 0.0, 1.0, 0.0, 1, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CesConfig c;
    c.m_bm = 1;
    c.mu = grid[i];
    c.eta = 1.0;
    CHECK(ideal[i].visibility ==
          doctest::Approx(ces_visibility(c)).epsilon(1e-12));
  }

  // 1000 km split over four arms: per-arm transmittance 1e-5.
  const auto fiber = ces_distance_sweep(1000.0, 0.2, 0.7, 1e-5, 1, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CesConfig c;
    c.m_bm = 1;
    c.mu = grid[i];
    c.eta = 0.7 * 1e-5;
    c.nu = 1e-5;
    CHECK(fiber[i].visibility ==
          doctest::Approx(ces_visibility(c)).epsilon(1e-12));
  }
}

TEST_CASE("pair generation rate axis") {
  CHECK(pair_generation_rate(1.0, false) == doctest::Approx(0.5));
  CHECK(pair_generation_rate(1.0, true) == doctest::Approx(1.0));
  CHECK(lambda2_to_mu(mu_to_lambda2(0.37)) == doctest::Approx(0.37));
}
