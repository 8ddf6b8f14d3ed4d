#ifndef VOLT_PENALTIES_HPP
#define VOLT_PENALTIES_HPP

#include <iosfwd>

#include "volt/kernels.hpp"
#include "volt/monomials.hpp"

namespace volt {

// Expansion coefficients lambda of a polynomial kernel over the monomial
// basis: k(u,v) = sum_q lambda_q phi_q(u) phi_q(v). Small lambda means heavy
// penalization of that monomial in the induced ridge problem; lambda = 0
// removes it from the hypothesis space.
struct PenaltyTable {
  int degree = 1;     // r
  int input_dim = 1;  // d
  std::vector<MonomialIndex> index_order;  // enumerate_monomials(d-1, r)
  Eigen::VectorXd lambda;                  // aligned with index_order, all >= 0

  double lambda_at(const MonomialIndex& idx) const;
};

// Largest monomial dictionary the expansion will attempt.
inline constexpr long long kExpansionGuard = 1'000'000;

// PK: closed-form multinomial coefficients. MPK: exact iterated
// multiplication of the r linear factors over the monomial dictionary in the
// formal variables x_j = u_j v_j. Throws GuardExceededError when the
// dictionary would exceed kExpansionGuard entries.
PenaltyTable expand_penalties(const KernelConfig& kernel, int input_dim);

// CSV with columns d_0,...,d_{m},lambda.
void write_penalty_csv(const PenaltyTable& table, std::ostream& out);

}  // namespace volt

#endif  // VOLT_PENALTIES_HPP
