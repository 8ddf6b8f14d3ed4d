#include "volt/penalties.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "volt/errors.hpp"

namespace volt {

double PenaltyTable::lambda_at(const MonomialIndex& idx) const {
  for (std::size_t q = 0; q < index_order.size(); ++q) {
    if (index_order[q] == idx) return lambda[static_cast<Eigen::Index>(q)];
  }
  throw std::invalid_argument("PenaltyTable: index not in table");
}

namespace {

PenaltyTable expand_pk(const PkParams& params, int input_dim) {
  PenaltyTable table;
  table.degree = params.degree;
  table.input_dim = input_dim;
  table.index_order = enumerate_monomials(input_dim - 1, params.degree);
  table.lambda.resize(static_cast<Eigen::Index>(table.index_order.size()));
  // (1 + sum_j x_j)^r: the slack degree r - |idx| goes to the constant slot
  // of the multinomial.
  for (std::size_t q = 0; q < table.index_order.size(); ++q) {
    MonomialIndex padded = table.index_order[q];
    padded.degrees.push_back(params.degree - padded.total_degree());
    table.lambda[static_cast<Eigen::Index>(q)] =
        static_cast<double>(multinomial_coeff(padded, params.degree));
  }
  return table;
}

PenaltyTable expand_mpk(const MpkParams& params, int input_dim) {
  if (input_dim != params.input_dim) {
    throw std::invalid_argument("expand_penalties: input_dim disagrees with MpkParams");
  }
  const DerivedSigmas derived = derive_sigmas(params);
  const MonomialTable dict(input_dim, params.degree);
  const std::size_t n = dict.indices().size();

  // Multiply the r linear factors (offset_i + sum_j sigma_i[j] x_j) one at a
  // time over the dense coefficient vector. After factor i the polynomial has
  // degree <= i+1, so every product stays inside the dictionary.
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  coeff[0] = 1.0;  // empty product
  std::vector<double> next(n, 0.0);
  for (int i = 0; i < params.degree; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t q = 0; q < n; ++q) {
      const double c = coeff[static_cast<Eigen::Index>(q)];
      if (c == 0.0) continue;
      next[q] += derived.offsets[i] * c;
      MonomialIndex bumped = dict.indices()[q];
      for (int j = 0; j < input_dim; ++j) {
        const double a = derived.sigma(i, j);
        if (a == 0.0) continue;
        bumped.degrees[static_cast<std::size_t>(j)] += 1;
        const int target = dict.rank(bumped);
        bumped.degrees[static_cast<std::size_t>(j)] -= 1;
        if (target >= 0) next[static_cast<std::size_t>(target)] += a * c;
      }
    }
    for (std::size_t q = 0; q < n; ++q) coeff[static_cast<Eigen::Index>(q)] = next[q];
  }

  PenaltyTable table;
  table.degree = params.degree;
  table.input_dim = input_dim;
  table.index_order = dict.indices();
  table.lambda = coeff;
  return table;
}

}  // namespace

PenaltyTable expand_penalties(const KernelConfig& kernel, int input_dim) {
  if (input_dim < 1) throw std::invalid_argument("expand_penalties: input_dim must be >= 1");
  const int degree = kernel_degree(kernel);
  const long long n_monomials = count_monomials(input_dim - 1, degree);
  if (n_monomials > kExpansionGuard) {
    throw GuardExceededError("expand_penalties: " + std::to_string(n_monomials) +
                             " monomials exceed the guard of " +
                             std::to_string(kExpansionGuard));
  }
  if (const PkParams* pk = std::get_if<PkParams>(&kernel)) return expand_pk(*pk, input_dim);
  return expand_mpk(std::get<MpkParams>(kernel), input_dim);
}

void write_penalty_csv(const PenaltyTable& table, std::ostream& out) {
  for (int j = 0; j < table.input_dim; ++j) out << "d_" << j << ",";
  out << "lambda\n";
  char buf[40];
  for (std::size_t q = 0; q < table.index_order.size(); ++q) {
    for (int d : table.index_order[q].degrees) out << d << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", table.lambda[static_cast<Eigen::Index>(q)]);
    out << buf << "\n";
  }
}

}  // namespace volt
