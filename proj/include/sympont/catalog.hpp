#pragma once

#include "sympont/problem.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sympont::catalog {

struct CatalogEntry {
  std::string id;
  std::string description;
  ControlProblem problem;
  std::string closed_form_notes;

  [[nodiscard]] bool has_smooth_family() const { return static_cast<bool>(problem.smooth_family); }
  [[nodiscard]] bool has_closed_form() const { return static_cast<bool>(problem.exact_value); }
};

/// Throws NotFoundError for unknown ids.
const CatalogEntry& get(std::string_view id);

std::vector<std::string> list();

}  // namespace sympont::catalog
