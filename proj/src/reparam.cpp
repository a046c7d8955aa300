#include "orbitml/reparam.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace orbitml {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

void check_dim(const Chart& chart, const Vec& v, const char* where) {
  if (v.size() != chart.d) {
    throw std::invalid_argument(std::string(where) +
                                ": vector length does not match chart");
  }
}

ChartEval eval_polar2(const Chart& chart, const Vec& theta, bool with_h) {
  const double x = theta(0);
  const double y = theta(1);
  const double r2 = x * x + y * y;
  const double r = std::sqrt(r2);
  if (r == 0.0) {
    throw std::domain_error("chart_eval: polar chart undefined at the origin");
  }
  const double ref_angle = std::atan2(chart.theta_ref(1), chart.theta_ref(0));
  ChartEval ev;
  ev.phi.resize(2);
  ev.phi(0) = r;
  ev.phi(1) = wrap_angle(std::atan2(y, x) - ref_angle);
  ev.J.resize(2, 2);
  ev.J.row(0) = theta.transpose() / r;
  ev.J(1, 0) = -y / r2;
  ev.J(1, 1) = x / r2;
  if (with_h) {
    ev.H.resize(2);
    ev.H[0] = (Mat::Identity(2, 2) - theta * theta.transpose() / r2) / r;
    ev.H[1].resize(2, 2);
    const double r4 = r2 * r2;
    ev.H[1](0, 0) = 2.0 * x * y / r4;
    ev.H[1](0, 1) = (y * y - x * x) / r4;
    ev.H[1](1, 0) = ev.H[1](0, 1);
    ev.H[1](1, 1) = -2.0 * x * y / r4;
  }
  return ev;
}

ChartEval eval_power_sums(const Chart& chart, const Vec& theta, bool with_h) {
  const int d = chart.d;
  ChartEval ev;
  ev.phi.resize(d);
  ev.J.resize(d, d);
  if (with_h) ev.H.assign(d, Mat::Zero(d, d));
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += std::pow(theta(j), k);
    ev.phi(k - 1) = s / d;
    for (int j = 0; j < d; ++j) {
      ev.J(k - 1, j) =
          static_cast<double>(k) / d * std::pow(theta(j), k - 1);
    }
    if (with_h && k >= 2) {
      for (int j = 0; j < d; ++j) {
        ev.H[k - 1](j, j) = static_cast<double>(k) * (k - 1) / d *
                            std::pow(theta(j), k - 2);
      }
    }
  }
  return ev;
}

struct FourierLayout {
  int d = 0;
  int m = 0;        // number of conjugate pairs
  bool even = false;
  int t_offset = 0; // phi index of t_1
};

FourierLayout fourier_layout(int d) {
  FourierLayout lay;
  lay.d = d;
  lay.m = (d - 1) / 2;
  lay.even = (d % 2 == 0);
  lay.t_offset = 1 + lay.m + (lay.even ? 1 : 0);
  return lay;
}

ChartEval eval_fourier(const Chart& chart, const Vec& theta, bool with_h) {
  const FourierLayout lay = fourier_layout(chart.d);
  const int d = chart.d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  ChartEval ev;
  ev.phi.resize(d);
  ev.J.resize(d, d);
  if (with_h) ev.H.assign(d, Mat::Zero(d, d));

  Vec ones = Vec::Constant(d, inv_sqrt_d);
  ev.phi(0) = ones.dot(theta);
  ev.J.row(0) = ones.transpose();

  if (lay.even) {
    Vec alt(d);
    for (int j = 0; j < d; ++j) alt(j) = (j % 2 == 0) ? inv_sqrt_d : -inv_sqrt_d;
    const int idx = 1 + lay.m;
    ev.phi(idx) = alt.dot(theta);
    ev.J.row(idx) = alt.transpose();
  }

  for (int k = 1; k <= lay.m; ++k) {
    Vec ca(d);
    Vec cb(d);
    for (int j = 0; j < d; ++j) {
      const double ang = kTwoPi * j * k / d;
      ca(j) = inv_sqrt_d * std::cos(ang);
      cb(j) = inv_sqrt_d * std::sin(ang);
    }
    const double a = ca.dot(theta);
    const double b = cb.dot(theta);
    const double r2 = a * a + b * b;
    const double r = std::sqrt(r2);
    if (r == 0.0) {
      throw std::domain_error(
          "chart_eval: Fourier chart undefined where a coefficient vanishes");
    }
    const double a_ref = ca.dot(chart.theta_ref);
    const double b_ref = cb.dot(chart.theta_ref);
    const double ref_phase =
        (a_ref == 0.0 && b_ref == 0.0) ? 0.0 : std::atan2(b_ref, a_ref);
    const int ri = k;
    const int ti = lay.t_offset + (k - 1);
    ev.phi(ri) = r;
    ev.phi(ti) = wrap_angle(std::atan2(b, a) - ref_phase);
    Vec grad_r = (a * ca + b * cb) / r;
    ev.J.row(ri) = grad_r.transpose();
    ev.J.row(ti) = ((a * cb - b * ca) / r2).transpose();
    if (with_h) {
      ev.H[ri] = (ca * ca.transpose() + cb * cb.transpose() -
                  grad_r * grad_r.transpose()) /
                 r;
      Mat sym_ab = ca * cb.transpose() + cb * ca.transpose();
      Mat diff = ca * ca.transpose() - cb * cb.transpose();
      ev.H[ti] = ((b * b - a * a) * sym_ab + 2.0 * a * b * diff) / (r2 * r2);
    }
  }
  return ev;
}

}  // namespace

Chart make_polar2_chart(const Vec& theta_ref) {
  if (theta_ref.size() != 2) {
    throw std::invalid_argument("make_polar2_chart: theta_ref must be planar");
  }
  if (theta_ref.norm() == 0.0) {
    throw std::invalid_argument(
        "make_polar2_chart: theta_ref must be nonzero to fix the angle origin");
  }
  return Chart{ChartKind::Polar2, 2, theta_ref};
}

Chart make_power_sums_chart(const Vec& theta_ref) {
  if (theta_ref.size() < 1) {
    throw std::invalid_argument("make_power_sums_chart: empty reference");
  }
  return Chart{ChartKind::PowerSums, static_cast<int>(theta_ref.size()),
               theta_ref};
}

Chart make_fourier_mra_chart(const Vec& theta_ref) {
  if (theta_ref.size() < 2) {
    throw std::invalid_argument("make_fourier_mra_chart: need d >= 2");
  }
  return Chart{ChartKind::FourierMra, static_cast<int>(theta_ref.size()),
               theta_ref};
}

ChartEval chart_eval(const Chart& chart, const Vec& theta, bool with_hessians) {
  check_dim(chart, theta, "chart_eval");
  ChartEval ev;
  switch (chart.kind) {
    case ChartKind::Polar2:
      ev = eval_polar2(chart, theta, with_hessians);
      break;
    case ChartKind::PowerSums:
      ev = eval_power_sums(chart, theta, with_hessians);
      break;
    case ChartKind::FourierMra:
      ev = eval_fourier(chart, theta, with_hessians);
      break;
  }
  Eigen::JacobiSVD<Mat> svd(ev.J);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e8) {
    throw std::domain_error(
        "chart_eval: Jacobian condition number exceeds 1e8");
  }
  return ev;
}

Vec chart_inverse(const Chart& chart, const Vec& phi) {
  if (phi.size() != chart.d) {
    throw std::invalid_argument("chart_inverse: phi length does not match chart");
  }
  const int d = chart.d;
  if (chart.kind == ChartKind::Polar2) {
    const double ref_angle =
        std::atan2(chart.theta_ref(1), chart.theta_ref(0));
    const double ang = phi(1) + ref_angle;
    Vec theta(2);
    theta(0) = phi(0) * std::cos(ang);
    theta(1) = phi(0) * std::sin(ang);
    return theta;
  }
  if (chart.kind == ChartKind::FourierMra) {
    const FourierLayout lay = fourier_layout(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Vec theta(d);
    for (int j = 0; j < d; ++j) {
      double s = phi(0);
      if (lay.even) s += ((j % 2 == 0) ? 1.0 : -1.0) * phi(1 + lay.m);
      for (int k = 1; k <= lay.m; ++k) {
        double a_ref = 0.0;
        double b_ref = 0.0;
        for (int jj = 0; jj < d; ++jj) {
          const double ang = kTwoPi * jj * k / d;
          a_ref += std::cos(ang) * chart.theta_ref(jj);
          b_ref += std::sin(ang) * chart.theta_ref(jj);
        }
        const double ref_phase =
            (a_ref == 0.0 && b_ref == 0.0) ? 0.0 : std::atan2(b_ref, a_ref);
        const double t = phi(lay.t_offset + (k - 1)) + ref_phase;
        s += 2.0 * phi(k) * std::cos(t - kTwoPi * j * k / d);
      }
      theta(j) = inv_sqrt_d * s;
    }
    return theta;
  }

  // Power sums: recover the multiset of coordinates as the roots of the
  // monic polynomial with elementary symmetric coefficients obtained
  // from Newton's identities, then order them like theta_ref.
  Vec P = static_cast<double>(d) * phi;
  std::vector<double> e(d + 1, 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= d; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) {
      s += ((i % 2 == 1) ? 1.0 : -1.0) * e[k - i] * P(i - 1);
    }
    e[k] = s / k;
  }
  // Companion of x^d - e1 x^(d-1) + e2 x^(d-2) - ...: coefficient of x^k
  // is (-1)^(d-k) e_{d-k}; the last column holds their negatives.
  Mat companion = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) {
    const int pow_idx = d - i;  // coefficient e_{pow_idx} enters row i
    companion(i, d - 1) = -((pow_idx % 2 == 0) ? 1.0 : -1.0) * e[pow_idx];
  }
  Eigen::EigenSolver<Mat> es(companion);
  const double scale = 1.0 + std::abs(P.cwiseAbs().maxCoeff());
  std::vector<double> roots(d);
  for (int i = 0; i < d; ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-6 * scale) {
      throw std::domain_error(
          "chart_inverse: phi does not correspond to a real point");
    }
    roots[i] = es.eigenvalues()(i).real();
  }
  std::sort(roots.begin(), roots.end());
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return chart.theta_ref(a) < chart.theta_ref(b);
  });
  Vec theta(d);
  for (int rank = 0; rank < d; ++rank) theta(order[rank]) = roots[rank];
  return theta;
}

Pullback pullback(const Chart& chart, const Vec& theta, const Vec& grad_theta,
                  const Mat& hess_theta) {
  check_dim(chart, theta, "pullback");
  check_dim(chart, grad_theta, "pullback");
  ChartEval ev = chart_eval(chart, theta, true);
  Eigen::PartialPivLU<Mat> lu_t(ev.J.transpose());
  Pullback pb;
  pb.grad = lu_t.solve(grad_theta);
  Mat M = hess_theta;
  for (int i = 0; i < chart.d; ++i) M -= pb.grad(i) * ev.H[i];
  Mat Y = lu_t.solve(M);
  Mat Z = lu_t.solve(Y.transpose());
  pb.hess = 0.5 * (Z + Z.transpose());
  return pb;
}

std::vector<int> chart_band_indices(const Chart& chart,
                                    const std::vector<int>& dims, int ell) {
  const int L = static_cast<int>(dims.size());
  if (ell < 1 || ell > L) return {};
  if (std::accumulate(dims.begin(), dims.end(), 0) != chart.d) {
    throw std::invalid_argument(
        "chart_band_indices: band dimensions do not sum to d");
  }
  if (dims[ell - 1] == 0) return {};
  switch (chart.kind) {
    case ChartKind::Polar2: {
      if (ell == 2 && ell == L) return {0, 1};
      if (ell == 2) return {0};
      if (ell == L) return {1};
      return {};
    }
    case ChartKind::PowerSums:
      return {ell - 1};
    case ChartKind::FourierMra: {
      const FourierLayout lay = fourier_layout(chart.d);
      std::vector<int> idx;
      if (ell == 1) {
        idx.push_back(0);
      } else if (ell == 2) {
        for (int k = 1; k <= lay.m; ++k) idx.push_back(k);
        if (lay.even) idx.push_back(1 + lay.m);
      } else if (ell == 3) {
        for (int k = 0; k < lay.m; ++k) idx.push_back(lay.t_offset + k);
      }
      return idx;
    }
  }
  return {};
}

}  // namespace orbitml
