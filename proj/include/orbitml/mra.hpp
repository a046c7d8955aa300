// Multi-reference alignment under cyclic coordinate shifts: Fourier
// coordinates, the phase surrogate functions F+ and F-, their critical
// families, and constructions with certified spurious local minima.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "orbitml/groups.hpp"
#include "orbitml/risk.hpp"

namespace orbitml {

/// Unitary discrete Fourier data of a real signal: v0 real, one complex
/// coefficient per frequency in I = {1..floor((d-1)/2)}, and the real
/// half-frequency coefficient for even d. Phases t are relative to the
/// reference signal.
struct FourierCoords {
  int d = 0;
  bool even = false;
  double v0 = 0.0;
  double v_half = 0.0;                  // meaningful only when even
  std::vector<std::complex<double>> v;  // absolute coefficients, k in I
  Vec r;                                // moduli |v_k|
  Vec t;                                // Arg v_k - Arg v_k(reference), [0,2pi)
};

/// v_k(theta) = (1/sqrt(d)) sum_j omega^{jk} theta_j with
/// omega = e^{2 pi i / d}; phases taken relative to theta_ref. Throws if
/// a reference coefficient on I (or d/2) vanishes.
FourierCoords fourier(const Vec& theta, const Vec& theta_ref);

/// Reconstructs the real signal by conjugate symmetry v_{-k} = conj(v_k).
Vec inv_fourier(const FourierCoords& coords);

/// Number of free phases, m = floor((d-1)/2).
int phase_count(int d);

/// Power spectrum weights (s_1..s_m, then s_{d/2} for even d) of a
/// reference signal.
Vec spectrum_weights(const Vec& theta_ref);

/// Phase surrogate
///   F_pm(t) = -( (1/6) sum_{i,j,k in I u -I, i+j+k = 0 mod d}
///                    s_|i| s_|j| s_|k| cos(t_i + t_j + t_k)
///              +- 1{d even} (1/2) sum_{i,j in I u -I, i+j = d/2 mod d}
///                    s_|i| s_|j| s_{d/2} cos(t_i + t_j) ),
/// with t_{-i} = -t_i. s has length m for odd d and m+1 for even d
/// (half-frequency weight last). branch must be +1, or -1 for even d.
EvalResult F_pm(int d, const Vec& s, const Vec& t, int branch,
                const EvalWant& want = {});

/// The phase family t^a with t^a_i = 2 pi a i / d (mod 2 pi); the minus
/// variant (odd d only) adds pi to the first coordinate.
Vec critical_family(int d, int a, bool minus_variant = false);

/// The signal with moduli r_star on I, phases offset from the reference
/// by t, the reference mean coefficient, and (for even d) the half
/// coefficient flipped when half_sign is -1.
Vec theta_from_phase(const Vec& r_star, const Vec& theta_ref, const Vec& t,
                     int half_sign = +1);

/// Stationarity and strict-minimality check of F_pm over the whole
/// family {t^a : 0 <= a < d} at the thresholds gradient norm <= 1e-9
/// and min eigenvalue > 1e-10 * trace.
struct FamilyCertificate {
  bool pass = false;
  double worst_grad_norm = 0.0;
  double worst_min_eig = 0.0;
};

FamilyCertificate certify_family(int d, const Vec& s, int branch,
                                 bool minus_variant = false);

struct SpuriousCertificate {
  Vec s;
  bool pass = false;
  double worst_grad_norm = 0.0;  // max over the certified family
  double worst_min_eig = 0.0;    // min over the certified family
  int retries = 0;
  bool plus_family_minimal = false;  // odd construction: t^{a,+} also minimal
};

/// Even d >= 6: s = (1,...,1,s_last). Certifies that every t^a is a
/// strict local minimum of both F+ and F-, halving s_last (up to 20
/// times) until certification passes.
SpuriousCertificate spurious_even(int d, double s_last = 0.1);

/// Odd d = 2m+1, m >= 26: s_1 = sqrt(m)/2, s_2 = (2m-5)/(2 s_1) + eps,
/// s_3 = delta, s_4..s_m = 1. Certifies that every t^{a,-} is a strict
/// local minimum of F+, halving delta (up to 10 times) until
/// certification passes; also checks the t^{a,+} family.
SpuriousCertificate spurious_odd(int m, double eps = 0.01,
                                 double delta = 0.01);

struct PhaseMinimum {
  Vec t;
  double value = 0.0;
  double grad_norm = 0.0;
  double min_eig = 0.0;
  int multiplicity = 0;
};

/// Survey of the local minima of F_pm by descent from a phase grid
/// (grid mode when m <= 8 and grid_per_axis^m <= 1e6; 4096 seeded
/// uniform starts otherwise), Newton-polished, Hessian-verified,
/// deduplicated on the torus at tolerance 1e-4 per coordinate.
std::vector<PhaseMinimum> phase_minimize(int d, const Vec& s, int branch,
                                         int grid_per_axis,
                                         std::uint64_t seed = 0);

}  // namespace orbitml
