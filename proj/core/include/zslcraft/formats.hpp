#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zslcraft/dataset.hpp"
#include "zslcraft/matrix.hpp"

namespace zslcraft::io {

/// Exact text form of a finite double, e.g. "0x1.8p+1" or "-0x1p-3".
std::string format_hex(double v);
/// Parses format_hex output; throws ParseError on malformed or non-finite input.
double parse_hex(std::string_view token, std::size_t line);

/// Line-numbered reader used by every ZSLC-* parser.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(&in) {}

  /// Next line split on whitespace; throws ParseError at end of input.
  std::vector<std::string> tokens(std::string_view expecting);
  bool at_end();
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream* in_;
  std::size_t line_ = 0;
};

/// Parses `<count> hex values` from tokens[offset..].
std::vector<double> parse_hex_row(const std::vector<std::string>& tokens, std::size_t offset,
                                  std::size_t expected, std::size_t line);
std::size_t parse_count(std::string_view token, std::size_t line);
long long parse_integer(std::string_view token, std::size_t line);
void write_hex_row(std::ostream& out, std::span<const double> values);

/// Label used for unlabeled rows (task-irrelevant features).
inline constexpr data::ClassId kUnlabeled = -1;

struct FeatureFile {
  linalg::Matrix features;
  std::vector<data::ClassId> labels;
};

void write_features(std::ostream& out, const linalg::Matrix& features, std::span<const data::ClassId> labels);
FeatureFile read_features(std::istream& in);
void save_features(const std::filesystem::path& path, const linalg::Matrix& features,
                   std::span<const data::ClassId> labels);
FeatureFile load_features(const std::filesystem::path& path);

void write_embeddings(std::ostream& out, const data::ClassEmbeddingTable& table);
data::ClassEmbeddingTable read_embeddings(std::istream& in);
void save_embeddings(const std::filesystem::path& path, const data::ClassEmbeddingTable& table);
data::ClassEmbeddingTable load_embeddings(const std::filesystem::path& path);

void write_split(std::ostream& out, const data::SplitSets& split);
data::SplitSets read_split(std::istream& in);
void save_split(const std::filesystem::path& path, const data::SplitSets& split);
data::SplitSets load_split(const std::filesystem::path& path);

/// Feature file + split file -> validated dataset.
data::ZslDataset load_dataset(const std::filesystem::path& features, const std::filesystem::path& split);

/// Opens for writing/reading; throws Error(kData) naming the path on failure.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace zslcraft::io
