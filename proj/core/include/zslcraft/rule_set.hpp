#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zslcraft/dataset.hpp"
#include "zslcraft/formats.hpp"
#include "zslcraft/matrix.hpp"

namespace zslcraft::crafting {

enum class RuleKind { kSemantic, kVisual };

std::string_view to_string(RuleKind kind) noexcept;
RuleKind parse_rule_kind(std::string_view text);

/// Fixed classification rules: one vector per class, compared with features by inner product.
///
/// Invariants checked on construction: rows align with unique class ids, no row
/// is all zeros, and normalized sets have unit-norm rows (within 1e-9).
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(linalg::Matrix rules, std::vector<data::ClassId> class_ids, RuleKind kind, bool normalized);

  const linalg::Matrix& rules() const noexcept { return rules_; }
  const std::vector<data::ClassId>& class_ids() const noexcept { return class_ids_; }
  RuleKind kind() const noexcept { return kind_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t size() const noexcept { return class_ids_.size(); }
  std::size_t dim() const noexcept { return rules_.cols(); }

  /// Position of a class in the pool; throws IndexError when absent.
  std::size_t index_of(data::ClassId c) const;
  bool contains(data::ClassId c) const;

  /// The first n rules (e.g. the seen block of an augmented pool).
  RuleSet prefix(std::size_t n) const;
  /// True when `other` equals the first other.size() rules of this set, bit for bit.
  bool has_prefix(const RuleSet& other) const;

  std::uint64_t fingerprint() const;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;

 private:
  linalg::Matrix rules_;
  std::vector<data::ClassId> class_ids_;
  RuleKind kind_ = RuleKind::kSemantic;
  bool normalized_ = false;
};

/// Writes `ZSLC-RULES v1 <kind> <C> <p>` followed by `<class_id> <p hex floats>` per class.
void write_rules(std::ostream& out, const RuleSet& rules);
/// Reads a rules block from a LineReader-managed stream; `normalized` is inferred from row norms.
RuleSet read_rules(std::istream& in);
/// Reads one rules block in place, e.g. embedded inside a model file.
RuleSet read_rules(io::LineReader& reader);
void save_rules(const std::filesystem::path& path, const RuleSet& rules);
RuleSet load_rules(const std::filesystem::path& path);

}  // namespace zslcraft::crafting
