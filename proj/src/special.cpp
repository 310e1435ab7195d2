#include "linrec/special.hpp"

#include <stdexcept>
#include <string>

namespace linrec {

std::vector<ProfileTerm> laplacian_expansion(int nu, int dim, int laplacians) {
  std::map<std::pair<int, int>, double> terms{{{0, nu}, 1.0}};
  for (int step = 0; step < laplacians; ++step) {
    std::map<std::pair<int, int>, double> next;
    for (const auto& [key, coef] : terms) {
      const auto [k, mu] = key;
      if (k > 0) next[{k - 1, mu}] += coef * 2.0 * k * (2.0 * k + dim - 2.0);
      next[{k, mu - 1}] -= coef * (dim + 4.0 * k);
      next[{k + 1, mu - 2}] += coef;
    }
    terms = std::move(next);
  }
  std::vector<ProfileTerm> out;
  for (const auto& [key, coef] : terms)
    if (coef != 0.0) out.push_back({key.first, key.second, coef});
  return out;
}

Precision parse_precision(std::string_view name) {
  if (name == "double") return Precision::Double;
  if (name == "quad") return Precision::Quad;
  throw std::invalid_argument("unknown precision '" + std::string(name) + "' (expected double or quad)");
}

std::string_view precision_name(Precision p) { return p == Precision::Double ? "double" : "quad"; }

}  // namespace linrec
