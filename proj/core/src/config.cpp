#include "cojump/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "cojump/errors.hpp"

namespace cojump {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  bool used = false;
};

using Sections = std::map<std::string, std::vector<Entry>>;

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

Sections parse_sections(const std::string& text) {
  Sections sections;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      }
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      if (current.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      }
      if (!sections.try_emplace(current).second) {
        throw ConfigError("line " + std::to_string(line_no) + ": section [" + current +
                          "] appears twice");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (current.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    }
    Entry e;
    e.key = trim(std::string_view(t).substr(0, eq));
    e.value = trim(std::string_view(t).substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    for (const Entry& prev : sections[current]) {
      if (prev.key == e.key) {
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                          e.key + "'");
      }
    }
    sections[current].push_back(std::move(e));
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(Sections& sections, const std::string& name) : name_(name) {
    if (const auto it = sections.find(name); it != sections.end()) {
      entries_ = &it->second;
    }
  }

  bool present() const { return entries_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    if (!entries_) return std::nullopt;
    for (Entry& e : *entries_) {
      if (e.key == key) {
        e.used = true;
        return e.value;
      }
    }
    return std::nullopt;
  }

  std::optional<double> real(const std::string& key) {
    const auto v = raw(key);
    if (!v) return std::nullopt;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw ConfigError("[" + name_ + "] " + key + ": '" + *v + "' is not a number");
    }
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const auto v = raw(key);
    if (!v) return std::nullopt;
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw ConfigError("[" + name_ + "] " + key + ": '" + *v + "' is not an integer");
    }
    return out;
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const auto v = raw(key);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw ConfigError("[" + name_ + "] " + key + ": '" + *v +
                        "' is not an unsigned integer");
    }
    return out;
  }

  void reject_unused() {
    if (!entries_) return;
    for (const Entry& e : *entries_) {
      if (!e.used) {
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                          "' in section [" + name_ + "]");
      }
    }
  }

 private:
  const std::string name_;
  std::vector<Entry>* entries_ = nullptr;
};

void read_init(Sections& sections, RunConfig& cfg) {
  const auto it = sections.find("init");
  if (it == sections.end()) return;
  for (Entry& e : it->second) {
    e.used = true;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size() || v < 0) {
      throw ConfigError("line " + std::to_string(e.line) +
                        ": initial occupancy must be a nonnegative integer");
    }
    cfg.init[e.key] = v;
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  Sections sections = parse_sections(text);
  for (const auto& [name, entries] : sections) {
    if (name != "model" && name != "params" && name != "init" && name != "noise" &&
        name != "run") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  RunConfig cfg;

  SectionReader model(sections, "model");
  const auto name = model.raw("name");
  if (!name) throw ConfigError("[model] section with a 'name' key is required");
  if (*name == "bivariate_death") {
    cfg.model = ModelKind::bivariate_death;
  } else if (*name == "multistrain_sir") {
    cfg.model = ModelKind::multistrain_sir;
  } else {
    throw ConfigError("unknown model '" + *name +
                      "' (expected bivariate_death or multistrain_sir)");
  }
  model.reject_unused();

  read_init(sections, cfg);

  SectionReader noise(sections, "noise");
  const auto tau = noise.real("tau");
  if (!tau) throw ConfigError("[noise] tau is required");
  noise.reject_unused();

  SectionReader params(sections, "params");
  if (cfg.model == ModelKind::bivariate_death) {
    const auto delta = params.real("delta");
    if (!delta) throw ConfigError("[params] delta is required for bivariate_death");
    cfg.bivariate.delta = *delta;
    cfg.bivariate.tau = *tau;
    for (const auto& [label, count] : cfg.init) {
      if (label == "Y1") {
        cfg.bivariate.y1_0 = count;
      } else if (label == "Y2") {
        cfg.bivariate.y2_0 = count;
      } else {
        throw ConfigError("[init] unknown compartment '" + label +
                          "' for bivariate_death");
      }
    }
  } else {
    SirParams p = default_sir_params();
    p.tau = *tau;
    if (const auto v = params.real("beta")) p.beta = *v;
    if (const auto v = params.real("omega")) p.omega = *v;
    if (const auto v = params.real("alpha")) p.alpha = *v;
    if (const auto v = params.real("m")) p.m = *v;
    if (const auto v = params.real("r")) p.r = *v;
    if (const auto v = params.real("gamma")) p.gamma = *v;
    Count init_total = 0;
    for (const auto& [label, count] : cfg.init) init_total += count;
    if (const auto v = params.integer("P")) {
      if (*v != init_total) {
        throw ConfigError("[params] P = " + std::to_string(*v) +
                          " does not match the [init] total " +
                          std::to_string(init_total));
      }
      p.P = *v;
    } else {
      p.P = init_total;
    }
    cfg.sir = p;
  }
  params.reject_unused();

  SectionReader run(sections, "run");
  if (const auto v = run.unsigned_integer("seed")) cfg.seed = *v;
  if (const auto v = run.real("t_end")) {
    if (!(*v >= 0.0)) throw ConfigError("[run] t_end must be nonnegative");
    cfg.t_end = *v;
  }
  if (const auto v = run.unsigned_integer("replicates")) {
    if (*v < 1) throw ConfigError("[run] replicates must be positive");
    cfg.replicates = *v;
  }
  if (const auto v = run.unsigned_integer("threads")) {
    cfg.threads = static_cast<unsigned>(*v);
  }
  if (const auto v = run.raw("out")) cfg.output_dir = *v;
  run.reject_unused();

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

SystemSpec build_system(const RunConfig& config) {
  if (config.model == ModelKind::bivariate_death) {
    return bivariate_death_system(config.bivariate);
  }
  return multistrain_sir_system(config.sir);
}

StateVector initial_state(const RunConfig& config, const SystemSpec& spec) {
  return spec.make_state(config.init);
}

}  // namespace cojump
