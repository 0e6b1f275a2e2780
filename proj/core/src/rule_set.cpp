#include "zslcraft/rule_set.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/rng.hpp"

namespace zslcraft::crafting {

std::string_view to_string(RuleKind kind) noexcept {
  return kind == RuleKind::kSemantic ? "semantic" : "visual";
}

RuleKind parse_rule_kind(std::string_view text) {
  if (text == "semantic") return RuleKind::kSemantic;
  if (text == "visual") return RuleKind::kVisual;
  throw ValidationError("unknown rule kind '" + std::string(text) + "'");
}

RuleSet::RuleSet(linalg::Matrix rules, std::vector<data::ClassId> class_ids, RuleKind kind, bool normalized)
    : rules_(std::move(rules)), class_ids_(std::move(class_ids)), kind_(kind), normalized_(normalized) {
  if (rules_.rows() != class_ids_.size()) {
    throw ValidationError("rule set: " + std::to_string(rules_.rows()) + " rules for " +
                          std::to_string(class_ids_.size()) + " class ids");
  }
  if (!rules_.all_finite()) throw ValidationError("rule set: non-finite rule entries");
  std::set<data::ClassId> ids;
  for (std::size_t r = 0; r < class_ids_.size(); ++r) {
    if (!ids.insert(class_ids_[r]).second) {
      throw ValidationError("rule set: duplicate class id " + std::to_string(class_ids_[r]));
    }
    const auto row = rules_.row(r);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      throw ValidationError("rule set: all-zero rule for class " + std::to_string(class_ids_[r]));
    }
    if (normalized_ && std::abs(linalg::norm2(row) - 1.0) > 1e-9) {
      throw ValidationError("rule set: rule for class " + std::to_string(class_ids_[r]) +
                            " is not unit norm");
    }
  }
}

std::size_t RuleSet::index_of(data::ClassId c) const {
  const auto it = std::find(class_ids_.begin(), class_ids_.end(), c);
  if (it == class_ids_.end()) throw IndexError("class " + std::to_string(c) + " is not in the rule set");
  return static_cast<std::size_t>(it - class_ids_.begin());
}

bool RuleSet::contains(data::ClassId c) const {
  return std::find(class_ids_.begin(), class_ids_.end(), c) != class_ids_.end();
}

RuleSet RuleSet::prefix(std::size_t n) const {
  if (n > size()) throw ShapeError("rule prefix of " + std::to_string(n) + " from " + std::to_string(size()));
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return RuleSet(linalg::gather_rows(rules_, rows), {class_ids_.begin(), class_ids_.begin() + static_cast<std::ptrdiff_t>(n)},
                 kind_, normalized_);
}

bool RuleSet::has_prefix(const RuleSet& other) const {
  if (other.size() > size() || other.dim() != dim()) return false;
  for (std::size_t r = 0; r < other.size(); ++r) {
    if (class_ids_[r] != other.class_ids_[r]) return false;
    const auto a = rules_.row(r);
    const auto b = other.rules_.row(r);
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (std::bit_cast<std::uint64_t>(a[j]) != std::bit_cast<std::uint64_t>(b[j])) return false;
    }
  }
  return true;
}

std::uint64_t RuleSet::fingerprint() const {
  std::uint64_t h = linalg::fingerprint(rules_);
  for (data::ClassId c : class_ids_) h = linalg::splitmix64(h ^ static_cast<std::uint32_t>(c));
  h = linalg::splitmix64(h ^ (kind_ == RuleKind::kSemantic ? 1U : 2U));
  return linalg::splitmix64(h ^ (normalized_ ? 3U : 5U));
}

void write_rules(std::ostream& out, const RuleSet& rules) {
  out << "ZSLC-RULES v1 " << to_string(rules.kind()) << ' ' << rules.size() << ' ' << rules.dim() << '\n';
  for (std::size_t r = 0; r < rules.size(); ++r) {
    out << rules.class_ids()[r] << ' ';
    io::write_hex_row(out, rules.rules().row(r));
    out << '\n';
  }
}

RuleSet read_rules(io::LineReader& reader) {
  const auto header = reader.tokens("rules header");
  if (header.size() != 5 || header[0] != "ZSLC-RULES" || header[1] != "v1") {
    throw ParseError(reader.line(), "expected header 'ZSLC-RULES v1 <kind> <C> <p>'");
  }
  const std::size_t line = reader.line();
  RuleKind kind{};
  try {
    kind = parse_rule_kind(header[2]);
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
  const std::size_t c = io::parse_count(header[3], line);
  const std::size_t p = io::parse_count(header[4], line);
  std::vector<double> values;
  std::vector<data::ClassId> ids;
  std::set<data::ClassId> unique;
  bool unit = c > 0;
  for (std::size_t r = 0; r < c; ++r) {
    const auto tokens = reader.tokens("rule row");
    if (tokens.empty()) throw ParseError(reader.line(), "empty rule row");
    const auto id = static_cast<data::ClassId>(io::parse_integer(tokens[0], reader.line()));
    if (!unique.insert(id).second) throw ParseError(reader.line(), "duplicate class id " + std::to_string(id));
    const auto row = io::parse_hex_row(tokens, 1, p, reader.line());
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      throw ParseError(reader.line(), "all-zero rule for class " + std::to_string(id));
    }
    unit = unit && std::abs(linalg::norm2(row) - 1.0) <= 1e-9;
    ids.push_back(id);
    values.insert(values.end(), row.begin(), row.end());
  }
  return RuleSet(linalg::Matrix(c, p, std::move(values)), std::move(ids), kind, unit);
}

RuleSet read_rules(std::istream& in) {
  io::LineReader reader(in);
  RuleSet rules = read_rules(reader);
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after rules");
  return rules;
}

void save_rules(const std::filesystem::path& path, const RuleSet& rules) {
  auto out = io::open_output(path);
  write_rules(out, rules);
}

RuleSet load_rules(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_rules(in);
}

}  // namespace zslcraft::crafting
