#include "volt/monomials.hpp"

#include <stdexcept>

namespace volt {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;  // exact: numerator divisible at each step
  }
  return result;
}

long long count_monomials(int m, int r) {
  long long total = 1;
  for (int i = 1; i <= r; ++i) total += binomial(m + i, i);
  return total;
}

namespace {

void fill_degree(std::vector<MonomialIndex>& out, std::vector<int>& current, int pos,
                 int remaining) {
  const int last = static_cast<int>(current.size()) - 1;
  if (pos == last) {
    current[pos] = remaining;
    out.push_back(MonomialIndex{current});
    return;
  }
  for (int d = remaining; d >= 0; --d) {
    current[pos] = d;
    fill_degree(out, current, pos + 1, remaining - d);
  }
}

}  // namespace

std::vector<MonomialIndex> enumerate_monomials(int m, int r) {
  if (m < 0) throw std::invalid_argument("enumerate_monomials: memory m must be >= 0");
  if (r < 1) throw std::invalid_argument("enumerate_monomials: order r must be >= 1");
  std::vector<MonomialIndex> out;
  out.reserve(static_cast<std::size_t>(count_monomials(m, r)));
  std::vector<int> current(static_cast<std::size_t>(m) + 1, 0);
  for (int degree = 0; degree <= r; ++degree) {
    fill_degree(out, current, 0, degree);
  }
  return out;
}

long long multinomial_coeff(const MonomialIndex& idx, int i) {
  if (idx.total_degree() != i) {
    throw std::invalid_argument("multinomial_coeff: total degree does not match i");
  }
  // i! / (d_0!...d_m!) as a product of binomials over partial sums; exact in
  // integer arithmetic.
  long long result = 1;
  int partial = 0;
  for (int d : idx.degrees) {
    partial += d;
    result *= binomial(partial, d);
  }
  return result;
}

double monomial_value(const MonomialIndex& idx, const Eigen::VectorXd& u) {
  if (static_cast<Eigen::Index>(idx.degrees.size()) != u.size()) {
    throw std::invalid_argument("monomial_value: dimension mismatch");
  }
  double value = 1.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    for (int p = 0; p < idx.degrees[static_cast<std::size_t>(j)]; ++p) value *= u[j];
  }
  return value;
}

Eigen::VectorXd feature_map(const Eigen::VectorXd& window, int m, int r) {
  if (window.size() != m + 1) {
    throw std::invalid_argument("feature_map: window length must equal m+1");
  }
  const std::vector<MonomialIndex> indices = enumerate_monomials(m, r);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t q = 0; q < indices.size(); ++q) {
    phi[static_cast<Eigen::Index>(q)] = monomial_value(indices[q], window);
  }
  return phi;
}

MonomialTable::MonomialTable(int num_vars, int max_degree)
    : num_vars_(num_vars), max_degree_(max_degree),
      indices_(enumerate_monomials(num_vars - 1, max_degree)) {
  ranks_.reserve(indices_.size());
  for (std::size_t q = 0; q < indices_.size(); ++q) {
    ranks_.emplace(indices_[q], static_cast<int>(q));
  }
}

int MonomialTable::rank(const MonomialIndex& idx) const {
  auto it = ranks_.find(idx);
  return it == ranks_.end() ? -1 : it->second;
}

}  // namespace volt
