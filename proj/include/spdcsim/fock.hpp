#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "spdcsim/click.hpp"
#include "spdcsim/experiments.hpp"

namespace spdcsim {

/// Pure state in the photon-number basis with a per-mode photon capacity.
/// Sources are truncated at their stated n_max; beam splitters grow the
/// capacities of their output modes (up to cap_limit) so interference never
/// drops amplitude below that ceiling. Whatever is dropped at the ceiling
/// stays accounted in the norm deficit. Mode 0 is the slowest tensor axis.
struct FockVector {
  std::vector<int> caps;  // photons representable per mode
  int cap_limit = 0;      // growth ceiling for beam-splitter outputs
  std::vector<std::string> mode_labels;
  std::vector<std::complex<double>> amp;  // prod_i (caps[i]+1) amplitudes

  int n_modes() const { return static_cast<int>(mode_labels.size()); }
  std::size_t dim() const { return amp.size(); }
  int index_of(std::string_view label) const;
  double norm2() const;

  /// Photons in `mode` for the basis state `idx`.
  int occupation(std::size_t idx, int mode) const;
  /// Flat index of a given occupation tuple.
  std::size_t basis_index(std::span<const int> occupation) const;
};

/// Mixed state over a uniformly truncated basis; needed once a loss channel
/// has been applied with its environment traced out. Kept uniform (and
/// therefore small) because only low-mode-count checks ever materialize it.
struct FockDensity {
  int n_max = 0;
  std::vector<std::string> mode_labels;
  Eigen::MatrixXcd rho;

  int n_modes() const { return static_cast<int>(mode_labels.size()); }
  int index_of(std::string_view label) const;
  double trace() const;
  int occupation(std::size_t idx, int mode) const;
};

FockVector fock_vacuum(int n_modes, int n_max,
                       std::vector<std::string> labels = {});
/// sqrt(1-lambda^2) sum_n lambda^n |n,n>, truncated at n_max.
FockVector fock_tmsv(double lambda, int n_max, std::string label_s = "m0",
                     std::string label_i = "m1");
FockVector fock_coherent(double alpha_re, double alpha_im, int n_max,
                         std::string label = "m0");
FockVector fock_tensor(const FockVector& a, const FockVector& b);
/// Two TMSVs with vertical modes swapped, matching sagnac_source.
FockVector fock_sagnac(double lambda, int n_max,
                       std::array<std::string, 4> labels = {"AH", "AV", "BH",
                                                            "BV"});

/// Number-conserving beam splitter on two modes, sign convention matched to
/// the symplectic S^t: a photon entering mode a exits as
/// sqrt(t)|a> + sqrt(1-t)|b>, one entering b as -sqrt(1-t)|a> + sqrt(t)|b>.
/// Output capacities grow to min(cap_a + cap_b, cap_limit).
void fock_beam_splitter(FockVector& state, double t, int mode_a, int mode_b);
/// Polarizer at angle theta between an H and a V mode, the signed-rotation
/// counterpart of a beam splitter of transmittance cos^2(theta).
void fock_polarizer(FockVector& state, double theta, int mode_h, int mode_v);
void fock_phase_shift(FockVector& state, double phi, int mode);
void fock_swap_modes(FockVector& state, int mode_a, int mode_b);

/// Loss as a beam splitter into a fresh vacuum environment mode appended to
/// the state; the environment is simply never detected. Keeps the state
/// pure, which is what makes large oracle instances tractable.
FockVector fock_loss_env(const FockVector& state, double t, int mode,
                         std::string env_label);

FockDensity fock_density_from(const FockVector& state);
FockDensity fock_thermal(double mu, int n_max, std::string label = "m0");
/// Generalized-amplitude-damping Kraus action on one mode.
FockDensity fock_loss(const FockDensity& state, double t, int mode);
FockDensity fock_loss(const FockVector& state, double t, int mode);

/// Same contract as pattern_probability, evaluated in the truncated basis.
/// Detector efficiency folds in exactly through per-basis-state weights
/// (1-eta)^n; dark counts through the (1-nu) factors. The optional
/// `pre_detection_transmittance` (one entry per mode, default 1) folds in
/// loss channels that sit directly in front of the detectors, so they cost
/// no extra environment modes.
double fock_pattern_probability(
    const FockVector& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern,
    std::span<const double> pre_detection_transmittance = {});
double fock_pattern_probability(
    const FockDensity& state, std::span<const DetectorSpec> detectors,
    const ClickPattern& pattern,
    std::span<const double> pre_detection_transmittance = {});

/// A-priori bound on |Gaussian - Fock| for a comparison involving
/// `n_tmsv` TMSV factors and `n_detectors` detectors:
/// c * lambda^(2(n_max+1)) with c = n_tmsv * n_detectors.
double fock_truncation_bound(int n_tmsv, int n_detectors, double lambda,
                             int n_max);

// Truncated-basis counterparts of the built-in experiments.

double fock_hom_coincidence(const HomConfig& config, bool delayed, int n_max);
double fock_epr_coincidence(const EprConfig& config, int n_max);
/// cap_limit overrides the default per-mode growth ceiling of 2*n_max; a
/// modest ceiling keeps memory in check at negligible cost for small
/// squeezing.
double fock_ces_joint_click(const CesConfig& config, int n_max,
                            int cap_limit = 0);

}  // namespace spdcsim
