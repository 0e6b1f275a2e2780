#include "zslcraft/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "zslcraft/errors.hpp"

namespace zslcraft::io {
namespace {

void expect_header(const std::vector<std::string>& tokens, std::string_view magic, std::size_t count,
                   std::size_t line) {
  if (tokens.size() != count || tokens[0] != magic || tokens[1] != "v1") {
    throw ParseError(line, "expected header '" + std::string(magic) + " v1' with " + std::to_string(count - 2) +
                               " fields");
  }
}

std::vector<std::size_t> parse_index_list(const std::vector<std::string>& tokens, std::string_view key,
                                          std::size_t line) {
  if (tokens.empty() || tokens[0] != std::string(key) + ":") {
    throw ParseError(line, "expected '" + std::string(key) + ":'");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) out.push_back(parse_count(tokens[i], line));
  return out;
}

std::vector<data::ClassId> parse_id_list(const std::vector<std::string>& tokens, std::string_view key,
                                         std::size_t line) {
  if (tokens.empty() || tokens[0] != std::string(key) + ":") {
    throw ParseError(line, "expected '" + std::string(key) + ":'");
  }
  std::vector<data::ClassId> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) out.push_back(static_cast<data::ClassId>(parse_integer(tokens[i], line)));
  return out;
}

template <typename T>
void write_list(std::ostream& out, std::string_view key, const std::vector<T>& values) {
  out << key << ':';
  for (const auto& v : values) out << ' ' << v;
  out << '\n';
}

}  // namespace

std::string format_hex(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::kNumeric, "cannot serialize non-finite value");
  char buf[64];
  std::string out = std::signbit(v) ? "-0x" : "0x";
  const auto res = std::to_chars(buf, buf + sizeof(buf), std::abs(v), std::chars_format::hex);
  out.append(buf, res.ptr);
  return out;
}

double parse_hex(std::string_view token, std::size_t line) {
  std::string_view body = token;
  bool negative = false;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.remove_prefix(1);
  }
  if (body.size() < 3 || body[0] != '0' || (body[1] != 'x' && body[1] != 'X')) {
    throw ParseError(line, "expected hex-float literal, got '" + std::string(token) + "'");
  }
  body.remove_prefix(2);
  double v = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), v, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) {
    throw ParseError(line, "malformed hex-float literal '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite literal '" + std::string(token) + "'");
  return negative ? -v : v;
}

std::vector<std::string> LineReader::tokens(std::string_view expecting) {
  std::string text;
  if (!std::getline(*in_, text)) {
    throw ParseError(line_ + 1, "unexpected end of input, expected " + std::string(expecting));
  }
  ++line_;
  if (!text.empty() && text.back() == '\r') throw ParseError(line_, "CRLF line endings are not allowed");
  std::istringstream ss(text);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(std::move(tok));
  return out;
}

bool LineReader::at_end() { return in_->peek() == std::char_traits<char>::eof(); }

std::size_t parse_count(std::string_view token, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "expected non-negative integer, got '" + std::string(token) + "'");
  }
  return v;
}

long long parse_integer(std::string_view token, std::size_t line) {
  long long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "expected integer, got '" + std::string(token) + "'");
  }
  return v;
}

std::vector<double> parse_hex_row(const std::vector<std::string>& tokens, std::size_t offset,
                                  std::size_t expected, std::size_t line) {
  if (tokens.size() != offset + expected) {
    throw ParseError(line, "expected " + std::to_string(expected) + " values, found " +
                               std::to_string(tokens.size() >= offset ? tokens.size() - offset : 0));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = offset; i < tokens.size(); ++i) out.push_back(parse_hex(tokens[i], line));
  return out;
}

void write_hex_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << format_hex(values[i]);
  }
}

void write_features(std::ostream& out, const linalg::Matrix& features, std::span<const data::ClassId> labels) {
  if (labels.size() != features.rows()) throw ShapeError("feature rows and labels differ in length");
  out << "ZSLC-FEAT v1 " << features.rows() << ' ' << features.cols() << '\n';
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out << labels[r];
    if (features.cols()) out << ' ';
    write_hex_row(out, features.row(r));
    out << '\n';
  }
}

FeatureFile read_features(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.tokens("feature header");
  expect_header(header, "ZSLC-FEAT", 4, reader.line());
  const std::size_t n = parse_count(header[2], reader.line());
  const std::size_t d = parse_count(header[3], reader.line());
  std::vector<double> data;
  data.reserve(n * d);
  std::vector<data::ClassId> labels;
  labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto tokens = reader.tokens("feature row");
    if (tokens.empty()) throw ParseError(reader.line(), "empty feature row");
    labels.push_back(static_cast<data::ClassId>(parse_integer(tokens[0], reader.line())));
    const auto row = parse_hex_row(tokens, 1, d, reader.line());
    data.insert(data.end(), row.begin(), row.end());
  }
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after " + std::to_string(n) + " rows");
  return FeatureFile{linalg::Matrix(n, d, std::move(data)), std::move(labels)};
}

void write_embeddings(std::ostream& out, const data::ClassEmbeddingTable& table) {
  table.validate();
  out << "ZSLC-EMB v1 " << table.embeddings.rows() << ' ' << table.embeddings.cols() << '\n';
  for (std::size_t r = 0; r < table.embeddings.rows(); ++r) {
    out << table.class_ids[r] << ' ';
    write_hex_row(out, table.embeddings.row(r));
    out << '\n';
  }
}

data::ClassEmbeddingTable read_embeddings(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.tokens("embedding header");
  expect_header(header, "ZSLC-EMB", 4, reader.line());
  const std::size_t c = parse_count(header[2], reader.line());
  const std::size_t q = parse_count(header[3], reader.line());
  data::ClassEmbeddingTable table;
  std::vector<double> values;
  std::set<data::ClassId> ids;
  for (std::size_t r = 0; r < c; ++r) {
    const auto tokens = reader.tokens("embedding row");
    if (tokens.empty()) throw ParseError(reader.line(), "empty embedding row");
    const auto id = static_cast<data::ClassId>(parse_integer(tokens[0], reader.line()));
    if (!ids.insert(id).second) throw ParseError(reader.line(), "duplicate class id " + std::to_string(id));
    const auto row = parse_hex_row(tokens, 1, q, reader.line());
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      throw ParseError(reader.line(), "all-zero embedding for class " + std::to_string(id));
    }
    table.class_ids.push_back(id);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after embeddings");
  table.embeddings = linalg::Matrix(c, q, std::move(values));
  return table;
}

void write_split(std::ostream& out, const data::SplitSets& split) {
  out << "ZSLC-SPLIT v1\n";
  write_list(out, "seen", split.seen);
  write_list(out, "unseen", split.unseen);
  write_list(out, "train", split.train);
  write_list(out, "test", split.test);
}

data::SplitSets read_split(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.tokens("split header");
  if (header.size() != 2 || header[0] != "ZSLC-SPLIT" || header[1] != "v1") {
    throw ParseError(reader.line(), "expected header 'ZSLC-SPLIT v1'");
  }
  data::SplitSets split;
  split.seen = parse_id_list(reader.tokens("seen list"), "seen", reader.line());
  split.unseen = parse_id_list(reader.tokens("unseen list"), "unseen", reader.line());
  split.train = parse_index_list(reader.tokens("train list"), "train", reader.line());
  split.test = parse_index_list(reader.tokens("test list"), "test", reader.line());
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after split");
  return split;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for reading");
  return in;
}

void save_features(const std::filesystem::path& path, const linalg::Matrix& features,
                   std::span<const data::ClassId> labels) {
  auto out = open_output(path);
  write_features(out, features, labels);
}

FeatureFile load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_features(in);
}

void save_embeddings(const std::filesystem::path& path, const data::ClassEmbeddingTable& table) {
  auto out = open_output(path);
  write_embeddings(out, table);
}

data::ClassEmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in);
}

void save_split(const std::filesystem::path& path, const data::SplitSets& split) {
  auto out = open_output(path);
  write_split(out, split);
}

data::SplitSets load_split(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_split(in);
}

data::ZslDataset load_dataset(const std::filesystem::path& features, const std::filesystem::path& split) {
  auto file = load_features(features);
  return data::make_dataset(std::move(file.features), std::move(file.labels), load_split(split));
}

}  // namespace zslcraft::io
