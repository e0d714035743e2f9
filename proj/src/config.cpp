#include "rler/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rler/errors.hpp"

namespace rler {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  Int v{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "on" || t == "true" || t == "1" || t == "yes") return true;
  if (t == "off" || t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(std::string(key) + ": expected on/off, got '" + std::string(text) + "'");
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Int>
std::string num_int(Int v) {
  return std::to_string(v);
}

struct Field {
  const char* section;
  const char* name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define RLER_DOUBLE(SEC, NAME, MEMBER)                                                   \
  Field {                                                                                \
    SEC, NAME, [](const ExperimentConfig& c) { return num(c.MEMBER); },                  \
        [](ExperimentConfig& c, std::string_view v) { c.MEMBER = to_double(SEC "." NAME, v); } \
  }
#define RLER_INT(SEC, NAME, MEMBER)                                                       \
  Field {                                                                                 \
    SEC, NAME, [](const ExperimentConfig& c) { return num_int(c.MEMBER); },               \
        [](ExperimentConfig& c, std::string_view v) {                                     \
          c.MEMBER = to_int<decltype(c.MEMBER)>(SEC "." NAME, v);                         \
        }                                                                                 \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      RLER_INT("corpus", "n_questions", corpus.n_questions),
      Field{"corpus", "operators",
            [](const ExperimentConfig& c) {
              std::string out;
              for (Operator op : c.corpus.operators) {
                if (!out.empty()) out += ',';
                out += operator_symbol(op);
              }
              return out;
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.corpus.operators.clear();
              for (const auto& s : split_list(v)) c.corpus.operators.push_back(parse_operator(s));
            }},
      RLER_INT("corpus", "min_operators", corpus.min_operators),
      RLER_INT("corpus", "max_operators", corpus.max_operators),
      RLER_INT("corpus", "min_digits", corpus.min_digits),
      RLER_INT("corpus", "max_digits", corpus.max_digits),
      RLER_INT("corpus", "n_groups", corpus.n_groups),
      RLER_INT("corpus", "candidates", corpus.candidates),
      RLER_INT("corpus", "seed", corpus.seed),
      RLER_DOUBLE("policy", "p_high", policy.p_high),
      RLER_DOUBLE("policy", "p_low", policy.p_low),
      Field{"estimator", "name",
            [](const ExperimentConfig& c) { return std::string(estimator_choice_name(c.estimator)); },
            [](ExperimentConfig& c, std::string_view v) { c.estimator = parse_estimator_choice(trim(v)); }},
      Field{"estimator", "self_estimate",
            [](const ExperimentConfig& c) -> std::string {
              switch (c.self_estimate) {
                case SelfEstimate::own: return "own";
                case SelfEstimate::sc: return "sc";
                default: return "auto";
              }
            },
            [](ExperimentConfig& c, std::string_view v) {
              const std::string t = trim(v);
              if (t == "auto") c.self_estimate = SelfEstimate::automatic;
              else if (t == "own") c.self_estimate = SelfEstimate::own;
              else if (t == "sc") c.self_estimate = SelfEstimate::sc;
              else throw ConfigError("estimator.self_estimate: expected auto, own or sc");
            }},
      RLER_DOUBLE("judge", "acc_correct", judge.acc_correct),
      RLER_DOUBLE("judge", "acc_incorrect", judge.acc_incorrect),
      RLER_DOUBLE("noise", "eps_sym", noise.eps_sym),
      RLER_DOUBLE("noise", "eps_fn", noise.eps_fn),
      RLER_DOUBLE("noise", "eps_fp", noise.eps_fp),
      RLER_DOUBLE("noise", "lambda_couple", noise.lambda_couple),
      RLER_INT("rler", "K", rler.K),
      RLER_INT("rler", "G_k", rler.G_k),
      Field{"rler", "mode",
            [](const ExperimentConfig& c) { return std::string(sharding_name(c.rler.mode)); },
            [](ExperimentConfig& c, std::string_view v) { c.rler.mode = parse_sharding(trim(v)); }},
      Field{"rler", "interpolation",
            [](const ExperimentConfig& c) { return std::string(variant_name(c.rler.interpolation)); },
            [](ExperimentConfig& c, std::string_view v) { c.rler.interpolation = parse_variant(trim(v)); }},
      Field{"rler", "selection",
            [](const ExperimentConfig& c) { return std::string(c.rler.selection ? "on" : "off"); },
            [](ExperimentConfig& c, std::string_view v) { c.rler.selection = to_bool("rler.selection", v); }},
      Field{"rler", "alpha_fixed",
            [](const ExperimentConfig& c) {
              return c.rler.alpha_fixed ? num(*c.rler.alpha_fixed) : std::string("none");
            },
            [](ExperimentConfig& c, std::string_view v) {
              const std::string t = trim(v);
              if (t.empty() || t == "none") c.rler.alpha_fixed.reset();
              else c.rler.alpha_fixed = to_double("rler.alpha_fixed", t);
            }},
      RLER_DOUBLE("rler", "init_jitter", rler.init_jitter),
      Field{"rler", "advantage_scope",
            [](const ExperimentConfig& c) {
              return std::string(c.rler.advantage_scope == AdvantageScope::selected ? "selected"
                                                                                    : "pooled");
            },
            [](ExperimentConfig& c, std::string_view v) {
              const std::string t = trim(v);
              if (t == "selected") c.rler.advantage_scope = AdvantageScope::selected;
              else if (t == "pooled") c.rler.advantage_scope = AdvantageScope::pooled;
              else throw ConfigError("rler.advantage_scope: expected selected or pooled");
            }},
      RLER_INT("training", "steps", training.steps),
      RLER_INT("training", "batch_size", training.batch_size),
      RLER_INT("training", "G", training.G),
      RLER_DOUBLE("training", "learning_rate", training.learning_rate),
      RLER_DOUBLE("training", "temperature", training.temperature),
      RLER_INT("eval", "k", eval.k),
      RLER_INT("eval", "eval_every", eval.eval_every),
      RLER_INT("eval", "n_questions", eval.n_questions),
      RLER_INT("eval", "seed", eval.seed),
      Field{"run", "seeds",
            [](const ExperimentConfig& c) {
              std::string out;
              for (auto s : c.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
              return out;
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.seeds.clear();
              for (const auto& s : split_list(v)) c.seeds.push_back(to_int<std::uint64_t>("run.seeds", s));
            }},
  };
  return table;
}

#undef RLER_DOUBLE
#undef RLER_INT

const Field& find_field(std::string_view key) {
  const auto dot = key.find('.');
  for (const auto& f : fields()) {
    const bool match = dot == std::string_view::npos
                           ? (key == f.name || (key == "estimator" && std::string_view(f.section) == "estimator" &&
                                                std::string_view(f.name) == "name"))
                           : (key.substr(0, dot) == f.section && key.substr(dot + 1) == f.name);
    if (match) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view estimator_choice_name(EstimatorChoice e) {
  switch (e) {
    case EstimatorChoice::oracle: return "oracle";
    case EstimatorChoice::sc: return "sc";
    case EstimatorChoice::freq: return "freq";
    case EstimatorChoice::judge: return "judge";
    case EstimatorChoice::rler: return "rler";
  }
  return "?";
}

EstimatorChoice parse_estimator_choice(std::string_view text) {
  for (auto e : {EstimatorChoice::oracle, EstimatorChoice::sc, EstimatorChoice::freq,
                 EstimatorChoice::judge, EstimatorChoice::rler}) {
    if (text == estimator_choice_name(e)) return e;
  }
  throw ConfigError("unknown estimator '" + std::string(text) + "'");
}

std::size_t ExperimentConfig::group_size() const {
  return estimator == EstimatorChoice::rler ? rler.K * rler.G_k : training.G;
}

void ExperimentConfig::validate() const {
  corpus.validate();
  if (!(policy.p_high > 0.0 && policy.p_high < 1.0 && policy.p_low > 0.0 && policy.p_low < 1.0)) {
    throw ConfigError("policy: p_high and p_low must lie in (0, 1)");
  }
  if (!in_unit(judge.acc_correct) || !in_unit(judge.acc_incorrect)) {
    throw ConfigError("judge: accuracies must lie in [0, 1]");
  }
  noise.validate();
  if (!noise.is_zero() && estimator != EstimatorChoice::oracle) {
    throw ConfigError("noise: dials apply to oracle base rewards; set estimator.name = oracle");
  }
  if (training.steps < 1) throw ConfigError("training: steps must be at least 1");
  if (training.batch_size < 1 || training.batch_size > corpus.n_questions) {
    throw ConfigError("training: batch_size must lie in [1, n_questions]");
  }
  if (training.G < 1) throw ConfigError("training: G must be at least 1");
  if (!(training.learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
  if (!(training.temperature > 0.0)) throw ConfigError("training: temperature must be positive");
  if (estimator == EstimatorChoice::rler) {
    if (rler.K < 1 || rler.G_k < 1) throw ConfigError("rler: K and G_k must be at least 1");
    if (rler.K * rler.G_k != training.G) {
      throw ConfigError("rler: K * G_k = " + std::to_string(rler.K * rler.G_k) +
                        " must equal training.G = " + std::to_string(training.G));
    }
    if (rler.alpha_fixed && !in_unit(*rler.alpha_fixed)) {
      throw ConfigError("rler: alpha_fixed must lie in [0, 1]");
    }
    if (!(rler.init_jitter >= 0.0)) throw ConfigError("rler: init_jitter must be non-negative");
  }
  if (eval.k < 1 || eval.eval_every < 1 || eval.n_questions < 1) {
    throw ConfigError("eval: k, eval_every and n_questions must be positive");
  }
  if (seeds.empty()) throw ConfigError("run: at least one seed is required");
}

ExperimentConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      find_field(section + "." + key).set(config, value.data());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_ini(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.name << " = " << f.get(config) << '\n';
  }
  return out.str();
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  find_field(key).set(config, value);
}

}  // namespace rler
