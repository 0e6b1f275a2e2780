#include "zslcraft/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "zslcraft/errors.hpp"
#include "zslcraft/formats.hpp"

namespace zslcraft::pipeline {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view key, std::string_view text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

template <typename Enum>
Enum parse_enum(std::string_view key, std::string_view text, std::initializer_list<Enum> options) {
  for (Enum e : options)
    if (to_string(e) == text) return e;
  throw ConfigError(std::string(key) + ": unsupported value '" + std::string(text) + "'");
}

struct KeySpec {
  std::string_view key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
};

#define ZSLC_SIZE_KEY(name, field)                                                        \
  KeySpec {                                                                               \
    name, [](const RunConfig& c) { return std::to_string(c.field); },                     \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.field = parse_size(k, v); } \
  }
#define ZSLC_DOUBLE_KEY(name, field)                                                          \
  KeySpec {                                                                                   \
    name, [](const RunConfig& c) { return format_double(c.field); },                          \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.field = parse_double(k, v); } \
  }
#define ZSLC_BOOL_KEY(name, field)                                                          \
  KeySpec {                                                                                 \
    name, [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); },       \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.field = parse_bool(k, v); } \
  }
#define ZSLC_PATH_KEY(name, field)                                                                  \
  KeySpec {                                                                                         \
    name, [](const RunConfig& c) { return c.paths.field.generic_string(); },                        \
        [](RunConfig& c, std::string_view k, std::string_view v) {                                  \
          if (v.empty()) throw ConfigError(std::string(k) + ": empty path");                        \
          c.paths.field = std::filesystem::path(std::string(v));                                    \
        }                                                                                           \
  }

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      KeySpec{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, std::string_view k, std::string_view v) { c.seed = parse_u64(k, v); }},
      ZSLC_SIZE_KEY("synth.n_seen", synth.n_seen),
      ZSLC_SIZE_KEY("synth.n_unseen", synth.n_unseen),
      ZSLC_SIZE_KEY("synth.q", synth.q),
      ZSLC_SIZE_KEY("synth.d", synth.d),
      ZSLC_SIZE_KEY("synth.samples_per_class", synth.samples_per_class),
      ZSLC_DOUBLE_KEY("synth.noise_stddev", synth.noise_stddev),
      ZSLC_SIZE_KEY("synth.n_irrelevant", n_irrelevant),
      KeySpec{"model.hidden",
              [](const RunConfig& c) { return join(c.hidden, [](std::size_t v) { return std::to_string(v); }); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.hidden.clear();
                for (auto item : split_list(v)) c.hidden.push_back(parse_size(k, item));
              }},
      ZSLC_SIZE_KEY("model.feature_dim", feature_dim),
      KeySpec{"craft.mode", [](const RunConfig& c) { return std::string(crafting::to_string(c.craft_mode)); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.craft_mode = parse_enum(k, v, {crafting::RuleKind::kSemantic, crafting::RuleKind::kVisual});
              }},
      ZSLC_DOUBLE_KEY("craft.lambda", lambda),
      ZSLC_BOOL_KEY("craft.lambda_cv", lambda_cv),
      KeySpec{"craft.lambda_grid", [](const RunConfig& c) { return join(c.lambda_grid, format_double); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.lambda_grid.clear();
                for (auto item : split_list(v)) c.lambda_grid.push_back(parse_double(k, item));
              }},
      ZSLC_BOOL_KEY("craft.normalize", normalize),
      ZSLC_SIZE_KEY("train.epochs", train.epochs),
      ZSLC_SIZE_KEY("train.batch_size", train.batch_size),
      ZSLC_DOUBLE_KEY("train.learning_rate", train.learning_rate),
      KeySpec{"train.optimizer", [](const RunConfig& c) { return std::string(backbone::to_string(c.train.optimizer)); },
              [](RunConfig& c, std::string_view, std::string_view v) { c.train.optimizer = backbone::parse_optimizer(v); }},
      ZSLC_DOUBLE_KEY("train.beta1", train.adam.beta1),
      ZSLC_DOUBLE_KEY("train.beta2", train.adam.beta2),
      ZSLC_DOUBLE_KEY("train.epsilon", train.adam.epsilon),
      ZSLC_DOUBLE_KEY("train.tau", train.tau),
      ZSLC_BOOL_KEY("train.finetune", finetune),
      ZSLC_DOUBLE_KEY("mixup.alpha", mixup_alpha),
      ZSLC_SIZE_KEY("mixup.n_negatives", n_negatives),
      ZSLC_SIZE_KEY("disc.epochs", disc_epochs),
      ZSLC_DOUBLE_KEY("disc.learning_rate", disc_learning_rate),
      KeySpec{"disc.input", [](const RunConfig& c) { return std::string(to_string(c.disc_input)); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.disc_input =
                    parse_enum(k, v, {DiscriminatorInput::kLogits, DiscriminatorInput::kProbabilities});
              }},
      KeySpec{"eval.mode", [](const RunConfig& c) { return std::string(to_string(c.eval_mode)); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.eval_mode = parse_enum(k, v, {EvalMode::kZsl, EvalMode::kGzsl});
              }},
      KeySpec{"eval.rebalance", [](const RunConfig& c) { return std::string(to_string(c.rebalance)); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.rebalance = parse_enum(k, v,
                                         {RebalanceMode::kNone, RebalanceMode::kLearned, RebalanceMode::kOracle,
                                          RebalanceMode::kCalibrate});
              }},
      ZSLC_DOUBLE_KEY("eval.gamma", gamma),
      KeySpec{"eval.gamma_sweep",
              [](const RunConfig& c) {
                if (!c.gamma_sweep) return std::string("none");
                return format_double(c.gamma_sweep->start) + ":" + format_double(c.gamma_sweep->stop) + ":" +
                       format_double(c.gamma_sweep->step);
              },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                if (v == "none") {
                  c.gamma_sweep.reset();
                  return;
                }
                const auto a = v.find(':');
                const auto b = a == v.npos ? v.npos : v.find(':', a + 1);
                if (b == v.npos) throw ConfigError(std::string(k) + ": expected start:stop:step or none");
                c.gamma_sweep = GammaSweep{parse_double(k, v.substr(0, a)), parse_double(k, v.substr(a + 1, b - a - 1)),
                                           parse_double(k, v.substr(b + 1))};
              }},
      ZSLC_DOUBLE_KEY("eval.tau", eval_tau),
      ZSLC_BOOL_KEY("eval.ensemble", ensemble),
      KeySpec{"eval.rebalance_order", [](const RunConfig& c) { return std::string(to_string(c.rebalance_order)); },
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.rebalance_order = parse_enum(k, v, {RebalanceOrder::kPerBranch, RebalanceOrder::kAfterAverage});
              }},
      ZSLC_PATH_KEY("paths.features", features),
      ZSLC_PATH_KEY("paths.embeddings", embeddings),
      ZSLC_PATH_KEY("paths.split", split),
      ZSLC_PATH_KEY("paths.irrelevant", irrelevant),
      ZSLC_PATH_KEY("paths.rules", rules),
      ZSLC_PATH_KEY("paths.model", model),
      ZSLC_PATH_KEY("paths.discriminator", discriminator),
      ZSLC_PATH_KEY("paths.rules2", rules2),
      ZSLC_PATH_KEY("paths.model2", model2),
      ZSLC_PATH_KEY("paths.discriminator2", discriminator2),
      ZSLC_PATH_KEY("paths.report", report),
  };
  return specs;
}

#undef ZSLC_SIZE_KEY
#undef ZSLC_DOUBLE_KEY
#undef ZSLC_BOOL_KEY
#undef ZSLC_PATH_KEY

}  // namespace

std::string_view to_string(EvalMode m) noexcept { return m == EvalMode::kZsl ? "zsl" : "gzsl"; }

std::string_view to_string(RebalanceMode m) noexcept {
  switch (m) {
    case RebalanceMode::kNone: return "none";
    case RebalanceMode::kLearned: return "learned";
    case RebalanceMode::kOracle: return "oracle";
    case RebalanceMode::kCalibrate: return "calibrate";
  }
  return "none";
}

std::string_view to_string(RebalanceOrder o) noexcept {
  return o == RebalanceOrder::kPerBranch ? "per_branch" : "after_average";
}

std::string_view to_string(DiscriminatorInput d) noexcept {
  return d == DiscriminatorInput::kLogits ? "logits" : "probabilities";
}

std::vector<double> GammaSweep::values() const {
  std::vector<double> out;
  if (step <= 0.0) return out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

void RunConfig::validate() const {
  try {
    synth.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (n_irrelevant < 1) throw ConfigError("synth.n_irrelevant must be >= 1");
  for (std::size_t h : hidden)
    if (h < 1) throw ConfigError("model.hidden sizes must be >= 1");
  if (!(lambda >= 0.0)) throw ConfigError("craft.lambda must be >= 0");
  if (lambda_cv && lambda_grid.empty()) throw ConfigError("craft.lambda_grid is empty");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw ConfigError("craft.lambda_grid entries must be >= 0");
  train.validate();
  if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0) || !(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0)) {
    throw ConfigError("train.beta1/beta2 must lie in [0, 1)");
  }
  if (!(train.adam.epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
  if (!(mixup_alpha > 0.0)) throw ConfigError("mixup.alpha must be > 0");
  if (!(disc_learning_rate >= 0.0)) throw ConfigError("disc.learning_rate must be >= 0");
  if (!(eval_tau > 0.0)) throw ConfigError("eval.tau must be > 0");
  if (gamma_sweep && !(gamma_sweep->step > 0.0 && gamma_sweep->stop >= gamma_sweep->start)) {
    throw ConfigError("eval.gamma_sweep needs step > 0 and stop >= start");
  }
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const KeySpec& spec : key_specs()) out.emplace_back(std::string(spec.key), spec.get(config));
  return out;
}

void set_key(RunConfig& config, std::string_view key, std::string_view value) {
  for (const KeySpec& spec : key_specs()) {
    if (spec.key == key) {
      spec.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool report = false;
  bool in_config_section = false;
  std::set<std::string> seen_keys;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && trim(line) == "ZSLC-REPORT v1") {
      report = true;
      continue;
    }
    std::string_view body = line;
    if (report) {
      const auto t = trim(body);
      if (!t.empty() && t.front() == '[') {
        if (in_config_section) break;
        in_config_section = t == "[config]";
        continue;
      }
      if (!in_config_section) continue;
    }
    if (const auto hash = body.find('#'); hash != body.npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == body.npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    if (!seen_keys.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      set_key(config, key, trim(body.substr(eq + 1)));
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig apply_overrides(RunConfig config, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    set_key(config, trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)));
  }
  config.validate();
  return config;
}

std::string render_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace zslcraft::pipeline
