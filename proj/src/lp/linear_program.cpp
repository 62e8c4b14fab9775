#include "shmpc/lp/linear_program.hpp"

#include "shmpc/error.hpp"

#include <cmath>

namespace shmpc::lp {

int LinearProgram::add_variable(double lower, double upper, double cost) {
  if (lower > upper) throw Error(ErrorKind::InvalidArgument, "variable lower bound exceeds upper");
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return num_variables() - 1;
}

int LinearProgram::add_variables(int count, double lower, double upper, double cost) {
  const int first = num_variables();
  for (int i = 0; i < count; ++i) add_variable(lower, upper, cost);
  return first;
}

void LinearProgram::set_cost(int var, double cost) { cost_.at(var) = cost; }

void LinearProgram::add_row(std::vector<Term> terms, Sense sense, double rhs) {
  for (const auto& t : terms)
    if (t.var < 0 || t.var >= num_variables())
      throw Error(ErrorKind::InvalidArgument, "row references unknown variable");
  rows_.push_back({std::move(terms), sense, rhs});
}

LinearProgram::Result LinearProgram::solve(const SimplexOptions& opts) const {
  // Each original variable maps to  offset + sum_k coef_k * y_k  with y >= 0.
  struct Map {
    double offset = 0.0;
    int pos = -1;
    int neg = -1;
  };
  const int nv = num_variables();
  std::vector<Map> map(nv);
  int ny = 0;
  std::vector<std::pair<int, double>> bound_rows;  // (column, width) for y <= width
  for (int i = 0; i < nv; ++i) {
    const double lo = lower_[i], up = upper_[i];
    if (std::isfinite(lo)) {
      map[i].offset = lo;
      map[i].pos = ny++;
      if (std::isfinite(up)) bound_rows.emplace_back(map[i].pos, up - lo);
    } else if (std::isfinite(up)) {
      map[i].offset = up;
      map[i].neg = ny++;
    } else {
      map[i].pos = ny++;
      map[i].neg = ny++;
    }
  }
  int nslack = static_cast<int>(bound_rows.size());
  for (const auto& r : rows_)
    if (r.sense != Sense::Equal) ++nslack;

  const int m = num_rows() + static_cast<int>(bound_rows.size());
  const int n = ny + nslack;
  Mat A = Mat::Zero(m, n);
  Vec b = Vec::Zero(m);
  Vec c = Vec::Zero(n);
  const double dir = maximize_ ? -1.0 : 1.0;
  for (int i = 0; i < nv; ++i) {
    const double ci = dir * cost_[i];
    if (map[i].pos >= 0) c(map[i].pos) += ci;
    if (map[i].neg >= 0) c(map[i].neg) -= ci;
  }
  int slack = ny;
  int row = 0;
  for (const auto& r : rows_) {
    double rhs = r.rhs;
    for (const auto& t : r.terms) {
      rhs -= t.coef * map[t.var].offset;
      if (map[t.var].pos >= 0) A(row, map[t.var].pos) += t.coef;
      if (map[t.var].neg >= 0) A(row, map[t.var].neg) -= t.coef;
    }
    if (r.sense == Sense::LessEqual) A(row, slack++) = 1.0;
    if (r.sense == Sense::GreaterEqual) A(row, slack++) = -1.0;
    b(row) = rhs;
    ++row;
  }
  for (const auto& [col, width] : bound_rows) {
    A(row, col) = 1.0;
    A(row, slack++) = 1.0;
    b(row) = width;
    ++row;
  }

  const StandardResult sr = solve_standard(A, b, c, opts);
  Result res;
  res.status = sr.status;
  if (sr.status != Status::Optimal) return res;
  res.x.resize(nv);
  for (int i = 0; i < nv; ++i) {
    double v = map[i].offset;
    if (map[i].pos >= 0) v += sr.x(map[i].pos);
    if (map[i].neg >= 0) v -= sr.x(map[i].neg);
    res.x(i) = v;
  }
  double obj = 0.0;
  for (int i = 0; i < nv; ++i) obj += cost_[i] * res.x(i);
  res.objective = obj;
  return res;
}

}  // namespace shmpc::lp
