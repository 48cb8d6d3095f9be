#pragma once

// Built-in cross-checks between closed-form results and the numerical
// engines, run by the `validate` subcommand.

#include <iosfwd>
#include <string>
#include <vector>

namespace cpdd {

struct ValidationCheck {
  std::string name;
  double value = 0.0;     ///< measured discrepancy or quantity
  double expected = 0.0;  ///< target value
  double tolerance = 0.0; ///< |value − expected| allowed
  bool passed = false;
};

std::vector<ValidationCheck> run_validation();
void print_validation_table(const std::vector<ValidationCheck>& checks, std::ostream& os);

}  // namespace cpdd
