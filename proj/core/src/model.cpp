#include "zslcraft/model.hpp"

#include <cmath>
#include <string>

#include "zslcraft/errors.hpp"
#include "zslcraft/formats.hpp"

namespace zslcraft::backbone {

void CraftedModel::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("model: temperature must be > 0");
  if (seen_rules.dim() != extractor.output_dim()) {
    throw ShapeError("model: rule dimension " + std::to_string(seen_rules.dim()) + " != feature dimension " +
                     std::to_string(extractor.output_dim()));
  }
}

void write_model(std::ostream& out, const CraftedModel& model) {
  model.validate();
  out << "ZSLC-MODEL v1\n";
  const auto dims = model.extractor.layer_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? " " : "") << dims[i];
  out << '\n';
  const auto& layers = model.extractor.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    out << "layer " << i << ' ' << l.weights.rows() << ' ' << l.weights.cols() << '\n';
    for (std::size_t r = 0; r < l.weights.rows(); ++r) {
      io::write_hex_row(out, l.weights.row(r));
      out << '\n';
    }
    out << "bias ";
    io::write_hex_row(out, l.bias.row(0));
    out << '\n';
  }
  crafting::write_rules(out, model.seen_rules);
  out << "tau " << io::format_hex(model.tau) << '\n';
}

CraftedModel read_model(std::istream& in) {
  io::LineReader reader(in);
  const auto magic = reader.tokens("model header");
  if (magic.size() != 2 || magic[0] != "ZSLC-MODEL" || magic[1] != "v1") {
    throw ParseError(reader.line(), "expected header 'ZSLC-MODEL v1'");
  }
  const auto dim_tokens = reader.tokens("layer dimensions");
  if (dim_tokens.size() < 2) throw ParseError(reader.line(), "need at least two layer dimensions");
  std::vector<std::size_t> dims;
  for (const auto& t : dim_tokens) dims.push_back(io::parse_count(t, reader.line()));

  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto head = reader.tokens("layer header");
    if (head.size() != 4 || head[0] != "layer" || io::parse_count(head[1], reader.line()) != i ||
        io::parse_count(head[2], reader.line()) != dims[i] || io::parse_count(head[3], reader.line()) != dims[i + 1]) {
      throw ParseError(reader.line(), "expected 'layer " + std::to_string(i) + " " + std::to_string(dims[i]) + " " +
                                          std::to_string(dims[i + 1]) + "'");
    }
    std::vector<double> w;
    w.reserve(dims[i] * dims[i + 1]);
    for (std::size_t r = 0; r < dims[i]; ++r) {
      const auto row = io::parse_hex_row(reader.tokens("weight row"), 0, dims[i + 1], reader.line());
      w.insert(w.end(), row.begin(), row.end());
    }
    const auto bias_tokens = reader.tokens("bias row");
    if (bias_tokens.empty() || bias_tokens[0] != "bias") throw ParseError(reader.line(), "expected 'bias'");
    auto b = io::parse_hex_row(bias_tokens, 1, dims[i + 1], reader.line());
    layers.push_back(Layer{linalg::Matrix(dims[i], dims[i + 1], std::move(w)),
                           linalg::Matrix(1, dims[i + 1], std::move(b))});
  }

  CraftedModel model;
  model.extractor = FeatureExtractor(std::move(layers));
  model.seen_rules = crafting::read_rules(reader);
  const auto tau_tokens = reader.tokens("tau");
  if (tau_tokens.size() != 2 || tau_tokens[0] != "tau") throw ParseError(reader.line(), "expected 'tau <value>'");
  model.tau = io::parse_hex(tau_tokens[1], reader.line());
  if (!reader.at_end()) throw ParseError(reader.line() + 1, "trailing content after model");
  try {
    model.validate();
  } catch (const Error& e) {
    throw ParseError(reader.line(), e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const CraftedModel& model) {
  auto out = io::open_output(path);
  write_model(out, model);
}

CraftedModel load_model(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_model(in);
}

}  // namespace zslcraft::backbone
