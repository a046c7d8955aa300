#include "orbitml/mra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "orbitml/parallel.hpp"
#include "orbitml/rng.hpp"

namespace orbitml {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double circle_dist(double a, double b) {
  const double diff = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(diff, kTwoPi - diff);
}

std::complex<double> dft_coefficient(const Vec& x, int k) {
  const int d = static_cast<int>(x.size());
  std::complex<double> acc(0.0, 0.0);
  for (int j = 0; j < d; ++j) {
    const double ang = kTwoPi * static_cast<double>((j * k) % d) / d;
    acc += x(j) * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return acc / std::sqrt(static_cast<double>(d));
}

/// Phase argument of one cosine term as a sparse combination of the
/// free phases t_1..t_m; at most three distinct indices appear.
struct SparsePhase {
  int idx[3] = {0, 0, 0};
  double coef[3] = {0.0, 0.0, 0.0};
  int nnz = 0;

  void add(int i, double c) {
    for (int k = 0; k < nnz; ++k) {
      if (idx[k] == i) {
        coef[k] += c;
        return;
      }
    }
    idx[nnz] = i;
    coef[nnz] = c;
    ++nnz;
  }

  double dot(const Vec& t) const {
    double acc = 0.0;
    for (int k = 0; k < nnz; ++k) acc += coef[k] * t(idx[k]);
    return acc;
  }
};

struct SurveyPoint {
  bool verified = false;
  Vec t;
  double value = 0.0;
  double grad_norm = 0.0;
  double min_eig = 0.0;
};

}  // namespace

int phase_count(int d) {
  if (d < 2) throw std::invalid_argument("phase_count: dimension must be at least 2");
  return (d - 1) / 2;
}

FourierCoords fourier(const Vec& theta, const Vec& theta_ref) {
  const int d = static_cast<int>(theta.size());
  if (d < 2) throw std::invalid_argument("fourier: dimension must be at least 2");
  if (static_cast<int>(theta_ref.size()) != d)
    throw std::invalid_argument("fourier: reference dimension mismatch");

  FourierCoords fc;
  fc.d = d;
  fc.even = (d % 2 == 0);
  const int m = (d - 1) / 2;
  fc.v.resize(m);
  fc.r = Vec::Zero(m);
  fc.t = Vec::Zero(m);
  fc.v0 = dft_coefficient(theta, 0).real();
  const double ref_scale = theta_ref.norm() + 1e-300;
  for (int k = 1; k <= m; ++k) {
    const std::complex<double> vk = dft_coefficient(theta, k);
    const std::complex<double> vk_ref = dft_coefficient(theta_ref, k);
    if (std::abs(vk_ref) <= 1e-12 * ref_scale)
      throw std::invalid_argument(
          "fourier: reference coefficient vanishes at frequency " + std::to_string(k));
    fc.v[k - 1] = vk;
    fc.r(k - 1) = std::abs(vk);
    fc.t(k - 1) = (std::abs(vk) == 0.0)
                      ? 0.0
                      : wrap_angle(std::arg(vk) - std::arg(vk_ref));
  }
  if (fc.even) fc.v_half = dft_coefficient(theta, d / 2).real();
  return fc;
}

Vec inv_fourier(const FourierCoords& coords) {
  const int d = coords.d;
  if (d < 2) throw std::invalid_argument("inv_fourier: dimension must be at least 2");
  const int m = (d - 1) / 2;
  if (static_cast<int>(coords.v.size()) != m)
    throw std::invalid_argument("inv_fourier: coefficient count mismatch");

  Vec theta = Vec::Zero(d);
  for (int j = 0; j < d; ++j) {
    double acc = coords.v0;
    for (int k = 1; k <= m; ++k) {
      const double ang = kTwoPi * static_cast<double>((j * k) % d) / d;
      const std::complex<double> w(std::cos(ang), -std::sin(ang));
      acc += 2.0 * (w * coords.v[k - 1]).real();
    }
    if (coords.even) acc += ((j % 2 == 0) ? 1.0 : -1.0) * coords.v_half;
    theta(j) = acc / std::sqrt(static_cast<double>(d));
  }
  return theta;
}

Vec spectrum_weights(const Vec& theta_ref) {
  const int d = static_cast<int>(theta_ref.size());
  if (d < 2) throw std::invalid_argument("spectrum_weights: dimension must be at least 2");
  const int m = (d - 1) / 2;
  const bool even = (d % 2 == 0);
  Vec s(m + (even ? 1 : 0));
  for (int k = 1; k <= m; ++k) {
    const double r = std::abs(dft_coefficient(theta_ref, k));
    s(k - 1) = r * r;
  }
  if (even) {
    const double h = dft_coefficient(theta_ref, d / 2).real();
    s(m) = h * h;
  }
  return s;
}

EvalResult F_pm(int d, const Vec& s, const Vec& t, int branch, const EvalWant& want) {
  if (d < 2) throw std::invalid_argument("F_pm: dimension must be at least 2");
  const int m = (d - 1) / 2;
  const bool even = (d % 2 == 0);
  if (branch != 1 && branch != -1)
    throw std::invalid_argument("F_pm: branch must be +1 or -1");
  if (branch == -1 && !even)
    throw std::invalid_argument("F_pm: branch -1 requires even dimension");
  if (static_cast<int>(s.size()) != m + (even ? 1 : 0))
    throw std::invalid_argument("F_pm: weight count mismatch");
  if ((s.size() > 0) && s.minCoeff() < 0.0)
    throw std::invalid_argument("F_pm: weights must be nonnegative");
  if (static_cast<int>(t.size()) != m)
    throw std::invalid_argument("F_pm: phase count mismatch");
  if (want.tensor3 || want.tensor4)
    throw std::invalid_argument("F_pm: only value, gradient and Hessian are available");

  EvalResult res;
  Vec grad = Vec::Zero(m);
  Mat hess = Mat::Zero(m, m);

  const int nf = 2 * m;
  auto freq = [m](int u) { return u < m ? (u + 1) : -(u - m + 1); };
  auto accumulate = [&](const SparsePhase& sp, double w) {
    const double phi = sp.dot(t);
    res.value += w * std::cos(phi);
    if (want.grad || want.hess) {
      const double dsin = -w * std::sin(phi);
      const double dcos = -w * std::cos(phi);
      for (int a = 0; a < sp.nnz; ++a) {
        if (want.grad) grad(sp.idx[a]) += dsin * sp.coef[a];
        if (want.hess) {
          for (int b = 0; b < sp.nnz; ++b)
            hess(sp.idx[a], sp.idx[b]) += dcos * sp.coef[a] * sp.coef[b];
        }
      }
    }
  };

  for (int ua = 0; ua < nf; ++ua) {
    const int fa = freq(ua);
    for (int ub = 0; ub < nf; ++ub) {
      const int fb = freq(ub);
      for (int uc = 0; uc < nf; ++uc) {
        const int fc = freq(uc);
        int rem = (fa + fb + fc) % d;
        if (rem < 0) rem += d;
        if (rem != 0) continue;
        SparsePhase sp;
        sp.add(std::abs(fa) - 1, fa > 0 ? 1.0 : -1.0);
        sp.add(std::abs(fb) - 1, fb > 0 ? 1.0 : -1.0);
        sp.add(std::abs(fc) - 1, fc > 0 ? 1.0 : -1.0);
        const double w = -(1.0 / 6.0) * s(std::abs(fa) - 1) * s(std::abs(fb) - 1) *
                         s(std::abs(fc) - 1);
        accumulate(sp, w);
      }
    }
  }

  if (even) {
    const int half = d / 2;
    for (int ua = 0; ua < nf; ++ua) {
      const int fa = freq(ua);
      for (int ub = 0; ub < nf; ++ub) {
        const int fb = freq(ub);
        int rem = (fa + fb) % d;
        if (rem < 0) rem += d;
        if (rem != half) continue;
        SparsePhase sp;
        sp.add(std::abs(fa) - 1, fa > 0 ? 1.0 : -1.0);
        sp.add(std::abs(fb) - 1, fb > 0 ? 1.0 : -1.0);
        const double w =
            -0.5 * branch * s(std::abs(fa) - 1) * s(std::abs(fb) - 1) * s(m);
        accumulate(sp, w);
      }
    }
  }

  if (want.grad) res.grad = grad;
  if (want.hess) res.hess = hess;
  return res;
}

Vec critical_family(int d, int a, bool minus_variant) {
  if (d < 2) throw std::invalid_argument("critical_family: dimension must be at least 2");
  if (a < 0 || a >= d)
    throw std::invalid_argument("critical_family: shift index out of range");
  if (minus_variant && d % 2 == 0)
    throw std::invalid_argument("critical_family: minus variant requires odd dimension");
  const int m = (d - 1) / 2;
  Vec t(m);
  for (int i = 1; i <= m; ++i) {
    const long long rem = (static_cast<long long>(a) * i) % d;
    t(i - 1) = kTwoPi * static_cast<double>(rem) / d;
  }
  if (minus_variant && m >= 1) t(0) = wrap_angle(t(0) + kPi);
  return t;
}

Vec theta_from_phase(const Vec& r_star, const Vec& theta_ref, const Vec& t,
                     int half_sign) {
  const int d = static_cast<int>(theta_ref.size());
  if (d < 2)
    throw std::invalid_argument("theta_from_phase: dimension must be at least 2");
  const int m = (d - 1) / 2;
  if (static_cast<int>(r_star.size()) != m)
    throw std::invalid_argument("theta_from_phase: moduli count mismatch");
  if (static_cast<int>(t.size()) != m)
    throw std::invalid_argument("theta_from_phase: phase count mismatch");
  if (half_sign != 1 && half_sign != -1)
    throw std::invalid_argument("theta_from_phase: half_sign must be +1 or -1");

  FourierCoords coords = fourier(theta_ref, theta_ref);
  for (int k = 1; k <= m; ++k) {
    const double arg = std::arg(coords.v[k - 1]) + t(k - 1);
    coords.v[k - 1] = std::polar(r_star(k - 1), arg);
    coords.r(k - 1) = r_star(k - 1);
    coords.t(k - 1) = wrap_angle(t(k - 1));
  }
  if (coords.even && half_sign == -1) coords.v_half = -coords.v_half;
  return inv_fourier(coords);
}

FamilyCertificate certify_family(int d, const Vec& s, int branch,
                                 bool minus_variant) {
  FamilyCertificate cert;
  cert.pass = true;
  cert.worst_min_eig = std::numeric_limits<double>::infinity();
  EvalWant want;
  want.grad = true;
  want.hess = true;
  for (int a = 0; a < d; ++a) {
    const Vec t = critical_family(d, a, minus_variant);
    const EvalResult res = F_pm(d, s, t, branch, want);
    const double gnorm = res.grad->norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(*res.hess);
    const double min_eig = es.eigenvalues().minCoeff();
    cert.worst_grad_norm = std::max(cert.worst_grad_norm, gnorm);
    cert.worst_min_eig = std::min(cert.worst_min_eig, min_eig);
    if (!(gnorm <= 1e-9) || !(min_eig > 1e-10 * res.hess->trace()))
      cert.pass = false;
  }
  return cert;
}

SpuriousCertificate spurious_even(int d, double s_last) {
  if (d < 6 || d % 2 != 0)
    throw std::invalid_argument("spurious_even: dimension must be even and at least 6");
  if (!(s_last > 0.0))
    throw std::invalid_argument("spurious_even: s_last must be positive");
  const int m = (d - 1) / 2;
  SpuriousCertificate cert;
  for (int attempt = 0; attempt <= 20; ++attempt) {
    Vec s = Vec::Ones(m + 1);
    s(m) = s_last;
    const FamilyCertificate plus = certify_family(d, s, +1, false);
    const FamilyCertificate minus = certify_family(d, s, -1, false);
    cert.s = s;
    cert.retries = attempt;
    cert.worst_grad_norm = std::max(plus.worst_grad_norm, minus.worst_grad_norm);
    cert.worst_min_eig = std::min(plus.worst_min_eig, minus.worst_min_eig);
    cert.pass = plus.pass && minus.pass;
    cert.plus_family_minimal = plus.pass;
    if (cert.pass) return cert;
    s_last *= 0.5;
  }
  throw std::runtime_error("spurious_even: certification failed after retries");
}

SpuriousCertificate spurious_odd(int m, double eps, double delta) {
  if (m < 26) throw std::invalid_argument("spurious_odd: m must be at least 26");
  if (!(eps > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("spurious_odd: eps and delta must be positive");
  const int d = 2 * m + 1;
  const double s1 = 0.5 * std::sqrt(static_cast<double>(m));
  const double s2 = (2.0 * m - 5.0) / (2.0 * s1) + eps;
  SpuriousCertificate cert;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    Vec s = Vec::Ones(m);
    s(0) = s1;
    s(1) = s2;
    s(2) = delta;
    const FamilyCertificate minus = certify_family(d, s, +1, true);
    const FamilyCertificate plus = certify_family(d, s, +1, false);
    cert.s = s;
    cert.retries = attempt;
    cert.worst_grad_norm = minus.worst_grad_norm;
    cert.worst_min_eig = minus.worst_min_eig;
    cert.pass = minus.pass;
    cert.plus_family_minimal = plus.pass;
    if (cert.pass) return cert;
    delta *= 0.5;
  }
  throw std::runtime_error("spurious_odd: certification failed after retries");
}

std::vector<PhaseMinimum> phase_minimize(int d, const Vec& s, int branch,
                                         int grid_per_axis, std::uint64_t seed) {
  const int m = phase_count(d);
  if (grid_per_axis < 1)
    throw std::invalid_argument("phase_minimize: grid_per_axis must be positive");
  F_pm(d, s, Vec::Zero(m), branch);
  if (m == 0) return {};

  std::vector<Vec> starts;
  double cells = 1.0;
  for (int i = 0; i < m; ++i) cells *= grid_per_axis;
  if (m <= 8 && cells <= 1e6 + 0.5) {
    const double step = kTwoPi / grid_per_axis;
    std::vector<int> idx(m, 0);
    while (true) {
      Vec t(m);
      for (int i = 0; i < m; ++i) t(i) = (idx[i] + 0.5) * step;
      starts.push_back(t);
      int pos = m - 1;
      while (pos >= 0 && idx[pos] + 1 >= grid_per_axis) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int j = pos + 1; j < m; ++j) idx[j] = 0;
    }
  } else {
    const int n_random = 4096;
    starts.reserve(n_random);
    for (int k = 0; k < n_random; ++k) {
      Vec t(m);
      for (int i = 0; i < m; ++i)
        t(i) = kTwoPi * rng_unit_at(seed, static_cast<std::uint64_t>(k) * m + i);
      starts.push_back(t);
    }
  }

  EvalWant val_grad;
  val_grad.grad = true;
  EvalWant all;
  all.grad = true;
  all.hess = true;

  std::vector<SurveyPoint> slots(starts.size());
  parallel_for(starts.size(), [&](std::size_t si) {
    {
      Vec t = starts[si];
      EvalResult cur = F_pm(d, s, t, branch, val_grad);
      for (int iter = 0; iter < 500; ++iter) {
        const double gnorm = cur.grad->norm();
        if (gnorm <= 1e-10) break;
        double step = 1.0;
        bool moved = false;
        while (step >= 1e-12) {
          Vec trial = t - step * (*cur.grad);
          for (int i = 0; i < m; ++i) trial(i) = wrap_angle(trial(i));
          EvalResult next = F_pm(d, s, trial, branch, val_grad);
          if (next.value <= cur.value - 1e-4 * step * gnorm * gnorm) {
            t = trial;
            cur = next;
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;
      }

      for (int iter = 0; iter < 40; ++iter) {
        EvalResult full = F_pm(d, s, t, branch, all);
        const double gnorm = full.grad->norm();
        if (gnorm <= 1e-13) break;
        Eigen::SelfAdjointEigenSolver<Mat> es(*full.hess);
        const Vec evals = es.eigenvalues();
        const double clip = 1e-10 * std::max(1.0, evals.cwiseAbs().maxCoeff());
        Vec inv(m);
        for (int i = 0; i < m; ++i)
          inv(i) = 1.0 / std::max(std::fabs(evals(i)), clip);
        const Vec delta =
            es.eigenvectors() * (inv.asDiagonal() * (es.eigenvectors().transpose() * (*full.grad)));
        Vec trial = t - delta;
        for (int i = 0; i < m; ++i) trial(i) = wrap_angle(trial(i));
        const EvalResult next = F_pm(d, s, trial, branch, val_grad);
        if (next.grad->norm() >= gnorm) break;
        t = trial;
      }

      const EvalResult final_eval = F_pm(d, s, t, branch, all);
      Eigen::SelfAdjointEigenSolver<Mat> es(*final_eval.hess);
      SurveyPoint& sp = slots[si];
      sp.t = t;
      sp.value = final_eval.value;
      sp.grad_norm = final_eval.grad->norm();
      sp.min_eig = es.eigenvalues().minCoeff();
      sp.verified = (sp.grad_norm <= 1e-9) &&
                    (sp.min_eig > 1e-10 * std::fabs(final_eval.hess->trace()));
    }
  });

  std::vector<PhaseMinimum> minima;
  for (const SurveyPoint& sp : slots) {
    if (!sp.verified) continue;
    bool merged = false;
    for (PhaseMinimum& pm : minima) {
      double maxdist = 0.0;
      for (int i = 0; i < m; ++i)
        maxdist = std::max(maxdist, circle_dist(sp.t(i), pm.t(i)));
      if (maxdist <= 1e-4) {
        ++pm.multiplicity;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    PhaseMinimum pm;
    pm.t = sp.t;
    for (int i = 0; i < m; ++i) pm.t(i) = wrap_angle(pm.t(i));
    pm.value = sp.value;
    pm.grad_norm = sp.grad_norm;
    pm.min_eig = sp.min_eig;
    pm.multiplicity = 1;
    minima.push_back(pm);
  }
  std::sort(minima.begin(), minima.end(),
            [](const PhaseMinimum& a, const PhaseMinimum& b) {
              if (a.value != b.value) return a.value < b.value;
              for (int i = 0; i < a.t.size(); ++i)
                if (a.t(i) != b.t(i)) return a.t(i) < b.t(i);
              return false;
            });
  return minima;
}

}  // namespace orbitml
