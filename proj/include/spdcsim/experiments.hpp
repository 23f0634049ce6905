#pragma once

#include <span>
#include <vector>

#include "spdcsim/click.hpp"
#include "spdcsim/gaussian.hpp"

namespace spdcsim {

/// Hong-Ou-Mandel test of a single SPDC source: TMSV, arm losses t_a/t_b,
/// mode mismatch xi at the 50/50 beam splitter, detector efficiencies and
/// dark rates per output arm.
struct HomConfig {
  double mu = 0.1;
  double t_a = 1.0;
  double t_b = 1.0;
  double eta_a = 1.0;
  double eta_b = 1.0;
  double xi = 1.0;
  double nu_a = 0.0;
  double nu_b = 0.0;
  Sign sign = Sign::plus;
};

/// EPR (polarization correlation) test of a Sagnac-loop source. Polarizer
/// angles are in radians; eta_* are the combined per-arm transmittances
/// (PBS extinction times detector efficiency) for each polarization mode.
struct EprConfig {
  double mu = 0.1;
  double theta_a = 0.0;
  double theta_b = 0.0;
  double eta_ah = 1.0;
  double eta_av = 1.0;
  double eta_bh = 1.0;
  double eta_bv = 1.0;
  Sign sign = Sign::plus;
};

/// Concatenated entanglement swapping: m_bm Bell measurements linking
/// m_bm + 1 Sagnac-loop sources, uniform per-arm transmittance eta (channel
/// and detector combined) and uniform dark rate nu on every detector.
struct CesConfig {
  int m_bm = 1;
  double mu = 0.01;
  double eta = 1.0;
  double nu = 0.0;
  double theta_a = 0.0;
  double theta_b = 0.0;
  Sign sign = Sign::plus;
};

// HOM interference

/// Six-mode state just before detection (labels A1, B1 and the mismatch
/// auxiliaries A1.2, B1.2, A1.3, B1.3). `delayed` models the scanned-out
/// delay by setting xi = 0.
GaussianState hom_state(const HomConfig& config, bool delayed);
std::vector<DetectorSpec> hom_detectors(const HomConfig& config);

/// Coincidence probability through the generic state/click pipeline.
double hom_coincidence(const HomConfig& config, bool delayed);
/// Same quantity from the printed closed-form determinants.
double hom_coincidence_closed_form(const HomConfig& config, bool delayed);
/// V = (P_mean - P_min)/P_mean; throws undefined_visibility_error when
/// P_mean = 0.
double hom_visibility(const HomConfig& config);

// EPR interference

/// gamma^SL: two TMSVs with the vertical polarization modes swapped.
/// Default labels AH, AV, BH, BV.
GaussianState sagnac_source(double mu, Sign sign = Sign::plus);
GaussianState sagnac_source(double mu, Sign sign,
                            std::array<std::string, 4> labels);

GaussianState epr_state(const EprConfig& config);
double epr_coincidence(const EprConfig& config);
double epr_coincidence_closed_form(const EprConfig& config);
/// V = (P_max - P_min)/(P_max + P_min) with P_min = P(0,0) and
/// P_max = P(0, pi/2).
double epr_visibility(const EprConfig& config);

// Concatenated entanglement swapping

/// Mode labels "1" ... "4*m_bm+4", numbered left to right.
std::vector<std::string> ces_mode_labels(int m_bm);
/// Labels of the 2*m_bm+2 detected modes: {1, 4m+3} plus {4x-1, 4x+2} per
/// Bell measurement.
std::vector<std::string> ces_detector_mode_labels(int m_bm);

/// Full (4m+4)-mode covariance built through the generic pipeline:
/// tensored Sagnac sources, Bell-measurement beam splitters, end
/// polarizers, uniform loss.
GaussianState ces_state(const CesConfig& config);
/// The same matrix transcribed directly from its closed block structure
/// (A2/A4 diagonal, B/C/D couplings); used to cross-check ces_state.
GaussianState ces_state_direct(const CesConfig& config);

/// Joint click probability of all 2*m_bm+2 detectors.
double ces_joint_click(const CesConfig& config);
double ces_visibility(const CesConfig& config);

/// Joint click probability versus theta_b at fixed theta_a, for verifying
/// that (0,0) and (0,pi/2) are the fringe extrema.
std::vector<double> ces_fringe(const CesConfig& config,
                               std::span<const double> theta_b);

struct CesSweepPoint {
  double mu;
  double visibility;
};

/// Visibility over a mu grid with per-arm transmittance derived from the
/// link budget: eta = eta_d * 10^(-alpha*L_arm/10), L_arm = L_total/(2m+2).
std::vector<CesSweepPoint> ces_distance_sweep(double l_total_km,
                                              double alpha_db_per_km,
                                              double eta_d, double nu,
                                              int m_bm,
                                              std::span<const double> mu_grid);

/// Photon-pair generation rate axis: lambda^2 for a single-pass source,
/// 2*lambda^2 for a Sagnac loop (the crystal is pumped twice).
double pair_generation_rate(double mu, bool sagnac);

}  // namespace spdcsim
