#pragma once

#include <filesystem>
#include <iosfwd>

#include "zslcraft/extractor.hpp"
#include "zslcraft/rule_set.hpp"

namespace zslcraft::backbone {

/// Trained extractor together with the frozen seen rules it was trained against.
struct CraftedModel {
  FeatureExtractor extractor;
  crafting::RuleSet seen_rules;
  double tau = 1.0;

  void validate() const;
  friend bool operator==(const CraftedModel&, const CraftedModel&) = default;
};

/// Model file:
///   ZSLC-MODEL v1
///   <layer dims, space separated>
///   layer <i> <fan_in> <fan_out>, fan_in weight rows, `bias <fan_out values>`  (per layer)
///   <embedded ZSLC-RULES block>
///   tau <hex>
void write_model(std::ostream& out, const CraftedModel& model);
CraftedModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const CraftedModel& model);
CraftedModel load_model(const std::filesystem::path& path);

}  // namespace zslcraft::backbone
