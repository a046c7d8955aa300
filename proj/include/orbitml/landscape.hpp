// Landscape diagnostics: Fisher information, graded spectra, approximate
// critical-point certification, critical-point surveys and basins of
// attraction.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orbitml/optim.hpp"
#include "orbitml/reparam.hpp"
#include "orbitml/risk.hpp"

namespace orbitml {

struct FisherResult {
  Mat matrix;
  Vec eigvals;  // ascending
  Mat eigvecs;  // columns match eigvals
  Mat se;       // entrywise standard errors (zero for the series variant)
  std::string method;
};

/// Fisher information as the population risk Hessian at theta_star,
/// estimated by Monte Carlo.
FisherResult fisher_information_mc(const GroupAction& G, const Vec& theta_star,
                                   double sigma, const McConfig& mc);

/// Fisher information from the truncated high-noise series
/// (Hessian of sum_{l<=order} sigma^(-2l) S_l at theta_star).
FisherResult fisher_information_series(const GroupAction& G,
                                       const Vec& theta_star, double sigma,
                                       int order);

/// Dimensions (d_1, ..., d_L) of the invariant degree bands for the
/// built-in families: planar rotations, cyclic shifts, coordinate
/// permutations, and their kernel restrictions. Throws for other groups.
std::vector<int> band_dims(const GroupAction& G);

struct GradedSpectrum {
  Vec eigvals;               // descending
  std::vector<int> band_of;  // invariant degree assigned to each eigenvalue
  Vec scaled;                // eigvals(i) * sigma^(2 band_of[i])
  std::vector<double> band_min;  // per band, min of scaled
  std::vector<double> band_max;  // per band, max of scaled
  std::vector<bool> resolved;    // span band_max/band_min <= 10
};

/// Assigns eigenvalues (largest first) to bands of the given dimensions
/// in increasing degree order, so band l receives the d_l largest
/// remaining eigenvalues and should scale like sigma^(-2l).
GradedSpectrum graded_spectrum(const Mat& fisher, double sigma,
                               const std::vector<int>& dims);

/// Delta-method variance g^T F^{-1} g of a functional with gradient g.
double plugin_variance(const Mat& fisher, const Vec& psi_grad);

struct BandCheck {
  int ell = 0;
  std::vector<int> indices;
  double grad_norm = 0.0;
  double min_eig = 0.0;
  bool pass = false;
};

struct PseudoMinimizerReport {
  bool pass = false;
  std::vector<BandCheck> bands;
};

/// Certifies theta_tilde as an approximate minimizer grade by grade: for
/// each degree l with d_l > 0, the chart-coordinate gradient of S_l
/// restricted to the band-l coordinates must have norm at most grad_tol
/// and the band-l diagonal Hessian block must have smallest eigenvalue
/// at least -eig_tol.
PseudoMinimizerReport pseudo_minimizer_check(
    const GroupAction& G, const Vec& theta_tilde, const Vec& theta_star,
    const Chart& chart, const std::vector<int>& dims, double grad_tol = 1e-7,
    double eig_tol = 1e-9);

/// Refines an approximate critical point by Newton steps on the
/// empirical risk, using an eigenvalue-clipped pseudo-inverse of the
/// Hessian (|lambda| < 1e-10 max|lambda| is treated as zero).
Vec newton_polish(const RiskModel& model, const Vec& theta,
                  int max_iters = 50, double grad_tol = 0.0);

struct CriticalPoint {
  Vec theta;
  double value = 0.0;
  double grad_norm = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  std::string kind;       // minimizer, saddle, maximizer or degenerate
  int multiplicity = 0;   // number of starts that reached this orbit
};

/// Multistart survey: AGD from n_starts standard normal starts, optional
/// Newton polish, then dedup by orbit distance. Points are sorted by
/// risk value.
std::vector<CriticalPoint> find_critical_points(
    const RiskModel& model, int n_starts, std::uint64_t seed,
    const OptimConfig& cfg, bool polish = true, double dedup_tol = 1e-4);

struct BasinRun {
  int start = 0;
  Vec final_theta;
  double final_risk = 0.0;
  double final_grad_norm = 0.0;
  int assigned = -1;  // index into the reference list, -1 if unresolved
  std::vector<double> ref_dists;
  bool diverged = false;
};

struct BasinResult {
  std::vector<double> fractions;  // per reference point
  double unresolved = 0.0;
  std::vector<BasinRun> runs;
};

/// Fraction of AGD runs from standard normal starts whose final iterate
/// lands within radius (orbit distance) of each reference point.
BasinResult basin_fractions(const RiskModel& model,
                            const std::vector<Vec>& references, int n_starts,
                            std::uint64_t seed, const OptimConfig& cfg,
                            double radius = 0.2);

}  // namespace orbitml
