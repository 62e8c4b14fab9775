#pragma once

#include "shmpc/lp/simplex.hpp"

#include <limits>
#include <vector>

namespace shmpc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

/// Sparse-row LP builder with bounded/free variables, lowered to standard
/// form for `solve_standard`. Intended for the modest certificate LPs.
class LinearProgram {
 public:
  struct Term {
    int var;
    double coef;
  };

  int add_variable(double lower = 0.0, double upper = kInf, double cost = 0.0);
  int add_variables(int count, double lower = 0.0, double upper = kInf, double cost = 0.0);
  void set_cost(int var, double cost);
  void add_row(std::vector<Term> terms, Sense sense, double rhs);
  void maximize() { maximize_ = true; }

  int num_variables() const { return static_cast<int>(lower_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  struct Result {
    Status status = Status::IterationLimit;
    Vec x;
    double objective = 0.0;
  };

  Result solve(const SimplexOptions& opts = {}) const;

 private:
  struct Row {
    std::vector<Term> terms;
    Sense sense;
    double rhs;
  };
  std::vector<double> lower_, upper_, cost_;
  std::vector<Row> rows_;
  bool maximize_ = false;
};

}  // namespace shmpc::lp
