// High-noise series expansion of the population risk.
//
// R(theta) ~ sum_{l>=1} sigma^(-2l) S_l(theta), where S_l is built from
// expectations M_{l,m}(pi) of products of invariant inner products over
// independent uniform group elements, one per block of a set partition.
#pragma once

#include "orbitml/cumulants.hpp"
#include "orbitml/groups.hpp"
#include "orbitml/risk.hpp"
#include "orbitml/tensor.hpp"

namespace orbitml {

/// E_g[(g theta)^tensor(ell)], symmetric, ell <= 4, d^ell <= 1e6.
DenseTensor moment_tensor(const GroupAction& G, const Vec& theta, int ell);

/// Squared Hilbert-Schmidt distance of order-ell moment tensors.
double moment_objective(const GroupAction& G, const Vec& theta,
                        const Vec& theta_star, int ell);

/// M_{l,m}(pi): expectation over one independent uniform group element per
/// block of pi (a partition of {0,...,l+m-1}) of
///   prod_{j<m} <g_{pi(2j)} theta, g_{pi(2j+1)} theta>
///   * prod_{j=2m}^{l+m-1} <theta*, g_{pi(j)} theta>.
/// Evaluated exactly; blocks are independent, so the product factorizes
/// over connected components of the pair-factor graph and each component
/// is enumerated as K^(#blocks in component) (capped at 1e7).
double M_lm(const GroupAction& G, const SetPartition& pi, int m,
            const Vec& theta, const Vec& theta_star);

enum class SeriesMethod { Generic, ClosedForm };

/// Series coefficient S_ell (ell <= 4 generic, ell <= 3 closed form).
/// Generic: partition sum
///   S_l = (1/l!) sum_m 2^(-m) binom(l,m)
///         sum_{pi in P(l,m)} (-1)^|pi| (|pi|-1)! M_{l,m}(pi),
/// with P(l,m) the partitions whose first m position pairs split.
/// Closed form: exact block split into the fixed subspace (contributes
/// only to S_1) and the mean-zero complement, where
///   S_2 = -1/2 E<x*,gx>^2 + 1/4 E<x,gx>^2
///   S_3 = -1/6 E<x*,gx>^3 + 1/12 E<x,gx>^3
///         + 1/2 E<g1 x,g2 x><x*,g1 x><x*,g2 x>
///         - 1/3 E<g1 x,g2 x><x,g1 x><x,g2 x>.
double S_ell(const GroupAction& G, const Vec& theta, const Vec& theta_star,
             int ell, SeriesMethod method = SeriesMethod::Generic);

/// Analytic gradient of the closed forms (ell <= 3); throws otherwise.
Vec S_ell_grad_closed(const GroupAction& G, const Vec& theta,
                      const Vec& theta_star, int ell);

/// Gradient of S_ell: analytic for ell <= 3, else Richardson-extrapolated
/// central differences of the generic value (h = 1e-5 max(1, ||theta||)).
Vec S_ell_grad(const GroupAction& G, const Vec& theta, const Vec& theta_star,
               int ell, SeriesMethod method = SeriesMethod::ClosedForm);

/// Hessian of S_ell by Richardson central differences of S_ell_grad.
Mat S_ell_hess(const GroupAction& G, const Vec& theta, const Vec& theta_star,
               int ell, SeriesMethod method = SeriesMethod::ClosedForm);

/// Truncated risk R^k(theta) = sum_{l=1}^k sigma^(-2l) S_l(theta) with
/// optional gradient and Hessian (k <= 4; closed forms used for l <= 3).
EvalResult truncated_risk(const GroupAction& G, const Vec& theta,
                          const Vec& theta_star, double sigma, int k,
                          const EvalWant& want = {});

/// Single-noise-draw series term whose expectation over eps recovers the
/// population coefficients: E[P_l] = S_{l/2} for even l, 0 for odd l.
///   P_l = 1{l=2} ||theta||^2/2
///       - sum_{k=ceil(l/2)}^{l} (1/k!) binom(k, l-k)
///         kappa_k(<eps,g theta> x(2k-l), <theta*,g theta> x(l-k)),
/// cumulants over g uniform on G.
double empirical_term(const GroupAction& G, const Vec& eps, const Vec& theta,
                      const Vec& theta_star, int ell);

}  // namespace orbitml
