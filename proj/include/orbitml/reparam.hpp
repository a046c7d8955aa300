// Invariant coordinate charts and derivative pullbacks.
#pragma once

#include <vector>

#include "orbitml/groups.hpp"

namespace orbitml {

enum class ChartKind { Polar2, PowerSums, FourierMra };

/// A chart phi : R^d -> R^d of invariant-graded coordinates. theta_ref
/// fixes conventions: the angle origin for Polar2, root-to-coordinate
/// matching for PowerSums. It is not read by FourierMra, whose phases
/// are absolute.
struct Chart {
  ChartKind kind = ChartKind::PowerSums;
  int d = 0;
  Vec theta_ref;
};

/// (||theta||, angle from theta_ref), d = 2.
Chart make_polar2_chart(const Vec& theta_ref);

/// phi_k = (1/d) sum_j theta_j^k for k = 1..d.
Chart make_power_sums_chart(const Vec& theta_ref);

/// Unitary DFT coordinates (v_0, r_1..r_m, v_{d/2} if d even, t_1..t_m)
/// with m = floor((d-1)/2); r_k e^{i t_k} is Fourier coefficient k.
Chart make_fourier_mra_chart(const Vec& theta_ref);

struct ChartEval {
  Vec phi;
  Mat J;               // J(i, j) = d phi_i / d theta_j
  std::vector<Mat> H;  // H[i] = Hessian of phi_i (empty if not requested)
};

/// Evaluates the chart with Jacobian (and coordinate Hessians). Throws
/// std::domain_error outside the chart domain, detected as a Jacobian
/// condition number above 1e8.
ChartEval chart_eval(const Chart& chart, const Vec& theta,
                     bool with_hessians = true);

/// Inverse map. PowerSums recovers coordinates as polynomial roots via
/// Newton's identities and matches them to the ordering of theta_ref;
/// throws std::domain_error if phi lies outside the chart range.
Vec chart_inverse(const Chart& chart, const Vec& phi);

struct Pullback {
  Vec grad;
  Mat hess;
};

/// Gradient and Hessian of f expressed in chart coordinates at phi(theta),
/// from its theta-space derivatives:
///   grad_phi = J^-T grad_theta,
///   hess_phi = J^-T (hess_theta - sum_i (grad_phi)_i H_i) J^-1.
Pullback pullback(const Chart& chart, const Vec& theta, const Vec& grad_theta,
                  const Mat& hess_theta);

/// Indices of the phi coordinates that carry the degree-ell invariants,
/// given the band dimensions of the group (dims[l-1] = dimension of
/// band l).
std::vector<int> chart_band_indices(const Chart& chart,
                                    const std::vector<int>& dims, int ell);

}  // namespace orbitml
