#pragma once

#include <stdexcept>
#include <string>

namespace calu {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A pivot column collapsed below the singularity tolerance during panel
/// factorization. `column` is the 0-based column within the panel.
struct SingularPanelError : Error {
  int column;
  explicit SingularPanelError(int col)
      : Error("singular panel: no admissible pivot in column " + std::to_string(col)),
        column(col) {}
};

/// A triangular solve hit a zero diagonal. `index` is the 0-based pivot.
struct SingularFactorError : Error {
  int index;
  explicit SingularFactorError(int idx)
      : Error("singular factor: zero pivot at index " + std::to_string(idx)), index(idx) {}
};

/// Factorization-level wrapper carrying the panel step that failed.
struct SingularMatrixError : Error {
  int step;
  SingularMatrixError(int k, const std::string& inner)
      : Error("matrix singular at panel " + std::to_string(k) + ": " + inner), step(k) {}
};

/// A task finished twice or ran before its predecessors.
struct DependencyViolation : Error {
  int task_id;
  DependencyViolation(int id, const std::string& what)
      : Error("dependency violation on task " + std::to_string(id) + ": " + what),
        task_id(id) {}
};

}  // namespace calu
