#pragma once

#include "flagforge/algebra.hpp"
#include "flagforge/flags.hpp"

#include <regex>
#include <string>

namespace flagforge::testing {

inline std::string data_path(const std::string& rel) { return std::string(FLAGFORGE_DATA_DIR) + "/" + rel; }

inline FixtureSet fixture(const std::string& file) { return FixtureSet::load(data_path("fixtures/" + file)); }

/// Parses "2G2+3G3-G5" into a density vector over order-5 graphs named in `graphs`, scaled by 1/scale.
inline DensityVector named_combination(const FixtureSet& graphs, const std::string& text, long scale = 1) {
  const int n = graphs.entries().front().graph.order();
  DensityVector v(admissible_family(n, graphs.forbidden()));
  static const std::regex term(R"(([+-]?)(\d*)(G\d+))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), term); it != std::sregex_iterator(); ++it) {
    long c = (*it)[2].length() ? std::stol((*it)[2]) : 1;
    if ((*it)[1] == "-") c = -c;
    v[v.basis().index_of(canonical_form(graphs.graph((*it)[3])).code)] += Rational(c, scale);
  }
  return v;
}

}  // namespace flagforge::testing
