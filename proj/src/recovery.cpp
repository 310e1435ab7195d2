#include "linrec/recovery.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

namespace linrec {

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

void write_reports_csv(std::ostream& out, std::span<const ErrorReport> reports) {
  out << "method,case,eval_order,norm,condition,jitter,raw_square,reason\n";
  for (const auto& r : reports) {
    // reason: one line, quoted when it holds a comma or quote
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    if (reason.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char ch : reason) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      reason = quoted + '"';
    }
    out << r.method << ',' << r.case_name << ',' << r.eval_order << ',' << format_sci(r.norm) << ','
        << format_sci(r.condition) << ',' << format_sci(r.jitter) << ',' << format_sci(r.raw_square) << ','
        << reason << '\n';
  }
}

std::vector<ErrorReport> read_reports_csv(std::istream& in) {
  std::vector<ErrorReport> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line.rfind("method,", 0) != 0) throw std::runtime_error("reports csv: missing header");
  auto parse = [](const std::string& s) { return s == "nan" ? std::nan("") : std::stod(s); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // seven plain columns, then the reason as the remainder
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (int c = 0; c < 7; ++c) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) throw std::runtime_error("reports csv: short row '" + line + "'");
      cols.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    std::string reason = line.substr(pos);
    if (reason.size() >= 2 && reason.front() == '"' && reason.back() == '"') {
      std::string plain;
      for (std::size_t i = 1; i + 1 < reason.size(); ++i) {
        plain += reason[i];
        if (reason[i] == '"' && reason[i + 1] == '"') ++i;
      }
      reason = plain;
    }
    cols.push_back(reason);
    ErrorReport r;
    r.method = cols[0];
    r.case_name = cols[1];
    r.eval_order = std::stoi(cols[2]);
    r.norm = parse(cols[3]);
    r.condition = parse(cols[4]);
    r.jitter = parse(cols[5]);
    r.raw_square = parse(cols[6]);
    r.reason = cols[7];
    out.push_back(std::move(r));
  }
  return out;
}

template <class T>
QuadraticForm<T> error_quadratic_form(const KernelSpec& spec, const RecoveryRow<T>& row, const Matrix<T>& gram) {
  row.validate();
  const std::size_t n = row.weights.size();
  if (gram.rows() != n || gram.cols() != n) throw std::invalid_argument("error_quadratic_form: Gram size mismatch");
  const auto b = cross_vector<T>(spec, row.eval_point, row.functionals);
  std::vector<T> partial(n);
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (nn > 256)
  for (std::ptrdiff_t i = 0; i < nn; ++i) partial[i] = row.weights[i] * dot<T>(gram.row(i), row.weights);
  T quad(0);
  for (const auto& p : partial) quad += p;
  return {kernel_diagonal<T>(spec), dot<T>(row.weights, b), quad};
}

template <class T>
OptimalRecoverer<T>::OptimalRecoverer(const KernelSpec& spec, std::vector<Functional> fs, const Matrix<T>& gram)
    : spec_(spec), fs_(std::move(fs)), factor_(gram) {}

template <class T>
OptimalRecoverer<T>::OptimalRecoverer(const KernelSpec& spec, std::vector<Functional> fs)
    : OptimalRecoverer(spec, fs, gram_matrix<T>(spec, fs)) {}

template <class T>
RecoveryRow<T> OptimalRecoverer<T>::row_at(Point x) const {
  const auto b = cross_vector<T>(spec_, x, fs_);
  return {x, fs_, factor_.solve(b)};
}

template <class T>
double lagrange_check(const KernelSpec&, std::span<const Functional> fs, std::span<const RecoveryRow<T>> rows) {
  for (const auto& f : fs)
    if (f.kind != FunctionalKind::PointEvaluation)
      throw std::invalid_argument("lagrange_check: only point-evaluation functionals are supported");
  if (rows.size() != fs.size()) throw std::invalid_argument("lagrange_check: need one row per functional");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].weights.size() != fs.size()) throw std::invalid_argument("lagrange_check: row length mismatch");
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const double target = (i == k) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(to_double(rows[i].weights[k]) - target));
    }
  }
  return worst;
}

template <class T>
std::vector<RecoveryRow<T>> lagrange_rows(const KernelSpec& spec, std::span<const Functional> fs) {
  OptimalRecoverer<T> rec(spec, std::vector<Functional>(fs.begin(), fs.end()));
  std::vector<RecoveryRow<T>> rows;
  rows.reserve(fs.size());
  for (const auto& f : fs) rows.push_back(rec.row_at(f.point));
  return rows;
}

template <class T>
std::shared_ptr<const Matrix<T>> GramCache<T>::get(const KernelSpec& spec, const std::vector<Functional>& fs) {
  Key key{spec.sobolev_order, spec.dimension, spec.scale, spec.effective_floor(), fs};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto gram = std::make_shared<const Matrix<T>>(gram_matrix<T>(spec, fs));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(std::move(key), std::move(gram));
  return it->second;
}

template <class T>
std::size_t GramCache<T>::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

template <class T>
void GramCache<T>::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

#define LINREC_RECOVERY_INSTANTIATE(T)                                                                        \
  template QuadraticForm<T> error_quadratic_form<T>(const KernelSpec&, const RecoveryRow<T>&, const Matrix<T>&); \
  template class OptimalRecoverer<T>;                                                                         \
  template double lagrange_check<T>(const KernelSpec&, std::span<const Functional>,                           \
                                    std::span<const RecoveryRow<T>>);                                         \
  template std::vector<RecoveryRow<T>> lagrange_rows<T>(const KernelSpec&, std::span<const Functional>);      \
  template class GramCache<T>;

LINREC_RECOVERY_INSTANTIATE(double)
LINREC_RECOVERY_INSTANTIATE(Quad)

}  // namespace linrec
