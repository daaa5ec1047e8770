#pragma once

#include "ipi/mdp.hpp"

#include <cstdint>
#include <string>

namespace ipi {

struct MatrixClassification {
  bool irreducible = false;
  /// Index of cyclicity; 0 when the matrix is reducible.
  int period = 0;
  bool primitive = false;
};

enum class MdpVerdict { General, Ergodic, Regular, Unknown };
[[nodiscard]] std::string to_string(MdpVerdict verdict);

struct MdpClass {
  MdpVerdict verdict = MdpVerdict::Unknown;
  std::uint64_t policies_checked = 0;
};

inline constexpr std::uint64_t kDefaultPolicyEnumerationCap = 100000;

/// True iff the digraph on the nonzero pattern of p is strongly connected.
/// Throws NegativeEntry on negative entries.
[[nodiscard]] bool is_irreducible(const SparseMatrix& p);
[[nodiscard]] bool is_irreducible(const DenseMatrix& p);

/// Graph period (gcd of cycle lengths, from BFS levels). Throws NotIrreducible.
[[nodiscard]] MatrixClassification period_and_primitivity(const SparseMatrix& p);
[[nodiscard]] MatrixClassification period_and_primitivity(const DenseMatrix& p);

/// Irreducibility and period together; never throws on reducible input.
[[nodiscard]] MatrixClassification classify_matrix(const SparseMatrix& p);

/// Enumerates deterministic policies (at most `policy_enumeration_cap`).
/// A single reducible P_pi proves General; Ergodic/Regular need the full
/// enumeration, otherwise the verdict is Unknown.
[[nodiscard]] MdpClass classify_mdp(const MdpModel& model,
                                    std::uint64_t policy_enumeration_cap = kDefaultPolicyEnumerationCap);

/// Lower end of the nu-interval on which Richardson beats VI asymptotically:
///   max over eigenvalues lambda of P of
///   ((1 - g Re) - g sqrt((g^2 - 1) Im^2 + (1 - g Re)^2)) / (1 - g^2).
/// Throws EigensolveFailure.
[[nodiscard]] double richardson_nu_interval(const DenseMatrix& p, double gamma);

struct SymmetricPartAnalysis {
  double lambda_min_h = 0.0;     ///< smallest eigenvalue of I - gamma (P + P^T) / 2
  bool positive_definite = false;
  double gamma_threshold = 0.0;  ///< 1 / lambda_max((P + P^T) / 2), in (0, 1]
};

[[nodiscard]] SymmetricPartAnalysis symmetric_part_analysis(const DenseMatrix& p, double gamma);

/// Largest matrix minimal_polynomial_degree accepts.
inline constexpr Eigen::Index kMinimalPolynomialMaxSize = 64;

/// Numerical degree of the minimal polynomial: the smallest k at which the
/// normalized Krylov matrix [v, Av, ..., A^k v] loses rank, maximized over
/// several random v. Intended as a test oracle; throws TooLarge above 64.
[[nodiscard]] int minimal_polynomial_degree(const DenseMatrix& a, int trials = 4, std::uint64_t seed = 1);

/// Spectral radius of the Richardson iteration matrix I - (I - gamma P) / nu.
[[nodiscard]] double richardson_spectral_radius(const DenseMatrix& p, double gamma, double nu);

}  // namespace ipi
