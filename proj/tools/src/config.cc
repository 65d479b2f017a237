#include "sent_cli/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sent/error.h"

namespace sent::cli {
namespace {

// Defaults follow the library defaults. Empty means unset.
const std::map<std::string, std::string> &Defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"run.seed", "1"},
      {"run.threads", "1"},
      {"run.k", "10"},
      {"run.epochs", "10"},
      {"run.max_iterations", "5"},
      {"run.patience", "1"},
      {"run.batch_size", "32"},
      {"run.final_pt_epochs", "10"},
      {"run.reinitialize", "true"},
      {"run.iteration_loss", "negative"},
      {"refine.th", "0.25"},
      {"refine.th_relabel", "0.7"},
      {"refine.relabel", "true"},
      {"optimizer.kind", "adam"},
      {"optimizer.learning_rate", "0.0005"},
      {"optimizer.beta1", "0.9"},
      {"optimizer.beta2", "0.999"},
      {"optimizer.epsilon", "1e-08"},
      {"featurizer.hash_dim", "16384"},
      {"featurizer.window", "2"},
      {"featurizer.use_entity_types", "true"},
      {"featurizer.use_position_buckets", "true"},
      {"featurizer.length_normalize", "true"},
      {"model.hidden_size", "0"},
      {"model.activation", "tanh"},
      {"noise.ratio", "0.3"},
      {"noise.weighting", "class_frequency"},
      {"synth.classes", "10"},
      {"synth.per_class", "200"},
      {"synth.total", "0"},
      {"synth.na_fraction", ""},
      {"synth.triggers_per_class", "2"},
      {"synth.filler_vocab", "200"},
      {"synth.entity_vocab", "20000"},
      {"synth.min_filler", "2"},
      {"synth.max_filler", "6"},
      {"histogram.bins", "50"},
      {"histogram.exclude_na", "true"},
      {"paths.train", ""},
      {"paths.dev", ""},
      {"paths.test", ""},
      {"paths.labels", ""},
      {"paths.out", ""},
  };
  return defaults;
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

[[noreturn]] void BadValue(const std::string &key, const std::string &value,
                           const char *want) {
  throw Error(ErrorCategory::kConfig,
              "config key " + key + " expects " + want + ", got '" + value + "'");
}

}  // namespace

CliConfig::CliConfig() : values_(Defaults()) {}

void CliConfig::Set(const std::string &key, const std::string &value) {
  if (!Defaults().count(key)) {
    throw Error(ErrorCategory::kConfig, "unknown config key: " + key);
  }
  values_[key] = value;
}

void CliConfig::MergeText(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string trimmed = Trim(line.substr(0, line.find('#')));
    if (trimmed.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(number);
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']') {
        throw Error(ErrorCategory::kConfig, where + ": malformed section header");
      }
      section = Trim(std::string_view(trimmed).substr(1, trimmed.size() - 2));
      continue;
    }
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::kConfig, where + ": expected key=value");
    }
    std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      Set(key, Trim(std::string_view(trimmed).substr(eq + 1)));
    } catch (const Error &e) {
      throw Error(ErrorCategory::kConfig, where + ": " + e.what());
    }
  }
}

void CliConfig::MergeFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kIo, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  MergeText(text.str(), path.string());
}

const std::string &CliConfig::Get(const std::string &key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCategory::kConfig, "unknown config key: " + key);
  }
  return it->second;
}

std::optional<std::string> CliConfig::GetOptional(const std::string &key) const {
  const std::string &value = Get(key);
  if (value.empty()) return std::nullopt;
  return value;
}

double CliConfig::GetDouble(const std::string &key) const {
  const std::string &value = Get(key);
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception &) {
  }
  BadValue(key, value, "a number");
}

int64_t CliConfig::GetInt(const std::string &key) const {
  const std::string &value = Get(key);
  int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value, "an integer");
  }
  return v;
}

uint64_t CliConfig::GetUint(const std::string &key) const {
  const std::string &value = Get(key);
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value, "a non-negative integer");
  }
  return v;
}

bool CliConfig::GetBool(const std::string &key) const {
  const std::string &value = Get(key);
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  BadValue(key, value, "true or false");
}

std::string CliConfig::Dump() const {
  std::string out, section;
  for (const auto &[key, value] : values_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!out.empty()) out += '\n';
      out += "[" + s + "]\n";
      section = s;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

RunConfig CliConfig::ToRunConfig() const {
  RunConfig c;
  c.base_seed = GetUint("run.seed");
  c.threads = static_cast<int>(GetInt("run.threads"));
  c.k = static_cast<int>(GetInt("run.k"));
  c.epochs = static_cast<int>(GetInt("run.epochs"));
  c.max_iterations = static_cast<int>(GetInt("run.max_iterations"));
  c.patience = static_cast<int>(GetInt("run.patience"));
  c.batch_size = static_cast<int>(GetInt("run.batch_size"));
  c.final_pt_epochs = static_cast<int>(GetInt("run.final_pt_epochs"));
  c.reinitialize = GetBool("run.reinitialize");
  const std::string &loss = Get("run.iteration_loss");
  if (loss == "negative") {
    c.iteration_loss = LossKind::kNegative;
  } else if (loss == "positive") {
    c.iteration_loss = LossKind::kPositive;
  } else {
    BadValue("run.iteration_loss", loss, "negative or positive");
  }

  c.refine.th = GetDouble("refine.th");
  c.refine.th_relabel = GetDouble("refine.th_relabel");
  c.refine.relabel = GetBool("refine.relabel");

  const auto kind = ParseOptimizer(Get("optimizer.kind"));
  if (!kind) BadValue("optimizer.kind", Get("optimizer.kind"), "sgd or adam");
  c.optimizer.kind = *kind;
  c.optimizer.learning_rate = GetDouble("optimizer.learning_rate");
  c.optimizer.beta1 = GetDouble("optimizer.beta1");
  c.optimizer.beta2 = GetDouble("optimizer.beta2");
  c.optimizer.epsilon = GetDouble("optimizer.epsilon");

  c.featurizer.hash_dim = static_cast<int>(GetInt("featurizer.hash_dim"));
  c.featurizer.window = static_cast<int>(GetInt("featurizer.window"));
  c.featurizer.use_entity_types = GetBool("featurizer.use_entity_types");
  c.featurizer.use_position_buckets = GetBool("featurizer.use_position_buckets");
  c.featurizer.length_normalize = GetBool("featurizer.length_normalize");

  const int64_t hidden = GetInt("model.hidden_size");
  if (hidden < 0) BadValue("model.hidden_size", Get("model.hidden_size"), ">= 0");
  if (hidden > 0) {
    const auto act = ParseActivation(Get("model.activation"));
    if (!act) BadValue("model.activation", Get("model.activation"), "tanh or relu");
    c.hidden = HiddenSpec{static_cast<int>(hidden), *act};
  }
  c.Validate();
  return c;
}

NoiseSpec CliConfig::ToNoiseSpec() const {
  NoiseSpec spec;
  spec.ratio = GetDouble("noise.ratio");
  spec.seed = GetUint("run.seed");
  const auto weighting = ParseWeighting(Get("noise.weighting"));
  if (!weighting) {
    BadValue("noise.weighting", Get("noise.weighting"), "class_frequency or uniform");
  }
  spec.weighting = *weighting;
  return spec;
}

}  // namespace sent::cli
