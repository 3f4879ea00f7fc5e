#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mcpr/io.hpp"

namespace mcpr::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
  throw std::invalid_argument("[" + section + "] " + key + ": " + what);
}

class Section {
 public:
  Section(const ConfigMap& map, std::string name) : name_(std::move(name)) {
    auto it = map.find(name_);
    if (it != map.end()) values_ = &it->second;
  }

  bool has(const std::string& key) const {
    return values_ != nullptr && values_->count(key) > 0;
  }
  std::string raw(const std::string& key) const { return values_->at(key); }

  void get(const std::string& key, int& out) const {
    if (!has(key)) return;
    try {
      out = static_cast<int>(io::parse_int(raw(key)));
    } catch (const std::exception&) {
      fail(name_, key, "expected an integer, got '" + raw(key) + "'");
    }
  }
  void get(const std::string& key, std::uint64_t& out) const {
    if (!has(key)) return;
    try {
      out = static_cast<std::uint64_t>(io::parse_int(raw(key)));
    } catch (const std::exception&) {
      fail(name_, key, "expected an integer, got '" + raw(key) + "'");
    }
  }
  void get(const std::string& key, double& out) const {
    if (!has(key)) return;
    try {
      out = io::parse_double(raw(key));
    } catch (const std::exception&) {
      fail(name_, key, "expected a number, got '" + raw(key) + "'");
    }
  }
  void get(const std::string& key, bool& out) const {
    if (!has(key)) return;
    const std::string v = raw(key);
    if (v == "true")
      out = true;
    else if (v == "false")
      out = false;
    else
      fail(name_, key, "expected true or false, got '" + v + "'");
  }
  void get(const std::string& key, std::vector<int>& out) const {
    if (!has(key)) return;
    out = parse_list<int>(key, [](const std::string& t) {
      return static_cast<int>(io::parse_int(t));
    });
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    out = parse_list<double>(key, [](const std::string& t) { return io::parse_double(t); });
  }

  void reject_unknown(const std::set<std::string>& known) const {
    if (values_ == nullptr) return;
    for (const auto& [key, value] : *values_)
      if (known.count(key) == 0) fail(name_, key, "unknown key");
  }

 private:
  template <typename T, typename Fn>
  std::vector<T> parse_list(const std::string& key, Fn&& convert) const {
    std::vector<T> out;
    std::stringstream ss(raw(key));
    std::string token;
    while (std::getline(ss, token, ',')) {
      token = trim(token);
      if (token.empty()) continue;
      try {
        out.push_back(convert(token));
      } catch (const std::exception&) {
        fail(name_, key, "bad list element '" + token + "'");
      }
    }
    if (out.empty()) fail(name_, key, "empty list");
    return out;
  }

  std::string name_;
  const std::map<std::string, std::string>* values_ = nullptr;
};

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      map[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    map[section][key] = value;
  }
  return map;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

bool RunConfig::operator==(const RunConfig& other) const {
  return simulation == other.simulation && params == other.params && fig1 == other.fig1 &&
         fig2 == other.fig2 && fig3 == other.fig3 && threads == other.threads;
}

RunConfig make_run_config(const ConfigMap& map) {
  for (const auto& [name, _] : map) {
    static const std::set<std::string> known = {"simulation", "clustering", "mle",
                                                "fig1", "fig2", "fig3", "run"};
    if (known.count(name) == 0)
      throw std::invalid_argument("[" + name + "]: unknown section");
  }
  RunConfig cfg;

  Section sim(map, "simulation");
  sim.reject_unknown({"m", "r", "K", "b", "epsilon", "seed"});
  sim.get("m", cfg.simulation.m);
  sim.get("r", cfg.simulation.r);
  sim.get("K", cfg.simulation.K);
  sim.get("b", cfg.simulation.b);
  sim.get("epsilon", cfg.simulation.epsilon);
  sim.get("seed", cfg.simulation.seed);

  Section run(map, "run");
  run.reject_unknown({"threads"});
  run.get("threads", cfg.threads);
  if (cfg.threads < 1) fail("run", "threads", "must be >= 1");

  Section clus(map, "clustering");
  clus.reject_unknown({"algorithm", "tau", "tau_constant", "kmeans_max_iters", "kmeans_tol"});
  if (clus.has("algorithm")) {
    const std::string a = clus.raw("algorithm");
    if (a == "kmeans")
      cfg.params.algorithm = pipeline::ClusterAlgorithm::kKMeans;
    else if (a == "threshold")
      cfg.params.algorithm = pipeline::ClusterAlgorithm::kThreshold;
    else
      fail("clustering", "algorithm", "expected kmeans or threshold, got '" + a + "'");
  }
  clus.get("tau", cfg.params.clustering.tau);
  clus.get("tau_constant", cfg.params.clustering.tau_constant);
  clus.get("kmeans_max_iters", cfg.params.clustering.kmeans_max_iters);
  clus.get("kmeans_tol", cfg.params.clustering.kmeans_tol);
  if (cfg.params.clustering.tau_constant <= 0.0)
    fail("clustering", "tau_constant", "must be > 0");
  if (cfg.params.clustering.kmeans_max_iters < 1)
    fail("clustering", "kmeans_max_iters", "must be >= 1");
  if (cfg.params.clustering.kmeans_tol < 0.0) fail("clustering", "kmeans_tol", "must be >= 0");

  Section mle(map, "mle");
  mle.reject_unknown({"max_iters", "tol", "ridge", "box"});
  mle.get("max_iters", cfg.params.mle.max_iters);
  mle.get("tol", cfg.params.mle.tol);
  mle.get("ridge", cfg.params.mle.ridge);
  mle.get("box", cfg.params.mle.box);
  if (cfg.params.mle.tol <= 0.0) fail("mle", "tol", "must be > 0");
  if (cfg.params.mle.ridge < 0.0) fail("mle", "ridge", "must be >= 0");
  if (cfg.params.mle.max_iters < 1) fail("mle", "max_iters", "must be >= 1");

  Section fig1(map, "fig1");
  fig1.reject_unknown({"m", "b_grid", "trials"});
  fig1.get("m", cfg.fig1.m);
  fig1.get("b_grid", cfg.fig1.b_grid);
  fig1.get("trials", cfg.fig1.trials);
  if (cfg.fig1.m < 2) fail("fig1", "m", "must be >= 2");
  if (cfg.fig1.trials < 1) fail("fig1", "trials", "must be >= 1");

  Section fig2(map, "fig2");
  fig2.reject_unknown({"m", "n", "b", "r_values", "budgets", "trials", "success_threshold",
                       "include_raw_rows"});
  fig2.get("m", cfg.fig2.m);
  fig2.get("n", cfg.fig2.n);
  fig2.get("b", cfg.fig2.b);
  fig2.get("r_values", cfg.fig2.r_values);
  fig2.get("budgets", cfg.fig2.budgets);
  fig2.get("trials", cfg.fig2.trials);
  fig2.get("success_threshold", cfg.fig2.success_threshold);
  fig2.get("include_raw_rows", cfg.fig2.include_raw_rows);
  for (int r : cfg.fig2.r_values)
    if (r < 1 || cfg.fig2.n % r != 0) fail("fig2", "r_values", "each r must divide n");
  if (cfg.fig2.trials < 1) fail("fig2", "trials", "must be >= 1");

  Section fig3(map, "fig3");
  fig3.reject_unknown(
      {"m", "n", "b", "epsilon", "r_values", "r_tilde_min", "r_tilde_max", "trials"});
  fig3.get("m", cfg.fig3.m);
  fig3.get("n", cfg.fig3.n);
  fig3.get("b", cfg.fig3.b);
  fig3.get("epsilon", cfg.fig3.epsilon);
  fig3.get("r_values", cfg.fig3.r_values);
  fig3.get("r_tilde_min", cfg.fig3.r_tilde_min);
  fig3.get("r_tilde_max", cfg.fig3.r_tilde_max);
  fig3.get("trials", cfg.fig3.trials);
  for (int r : cfg.fig3.r_values)
    if (r < 1 || cfg.fig3.n % r != 0) fail("fig3", "r_values", "each r must divide n");
  if (cfg.fig3.r_tilde_min < 1 || cfg.fig3.r_tilde_max < cfg.fig3.r_tilde_min)
    fail("fig3", "r_tilde_min", "need 1 <= r_tilde_min <= r_tilde_max");
  if (cfg.fig3.trials < 1) fail("fig3", "trials", "must be >= 1");

  // Simulation parameters are validated by the commands that use them
  // (run takes its dimensions from the dataset header instead).
  if (map.count("simulation")) cfg.simulation.validate();

  // One seed drives everything; grids and clustering share the knobs.
  cfg.params.clustering.r = cfg.simulation.r;
  cfg.fig1.seed = cfg.simulation.seed;
  cfg.fig2.seed = cfg.simulation.seed;
  cfg.fig3.seed = cfg.simulation.seed;
  cfg.fig2.clustering = cfg.params.clustering;
  cfg.fig3.clustering = cfg.params.clustering;
  cfg.fig3.mle = cfg.params.mle;
  return cfg;
}

namespace {
template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_same_v<T, double>)
      os << io::format_double(values[i]);
    else
      os << values[i];
  }
  return os.str();
}
}  // namespace

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[simulation]\n";
  os << "m = " << cfg.simulation.m << '\n';
  os << "r = " << cfg.simulation.r << '\n';
  os << "K = " << cfg.simulation.K << '\n';
  os << "b = " << io::format_double(cfg.simulation.b) << '\n';
  os << "epsilon = " << io::format_double(cfg.simulation.epsilon) << '\n';
  os << "seed = " << cfg.simulation.seed << '\n';
  os << "\n[run]\n";
  os << "threads = " << cfg.threads << '\n';
  os << "\n[clustering]\n";
  os << "algorithm = "
     << (cfg.params.algorithm == pipeline::ClusterAlgorithm::kKMeans ? "kmeans" : "threshold")
     << '\n';
  os << "tau = " << io::format_double(cfg.params.clustering.tau) << '\n';
  os << "tau_constant = " << io::format_double(cfg.params.clustering.tau_constant) << '\n';
  os << "kmeans_max_iters = " << cfg.params.clustering.kmeans_max_iters << '\n';
  os << "kmeans_tol = " << io::format_double(cfg.params.clustering.kmeans_tol) << '\n';
  os << "\n[mle]\n";
  os << "max_iters = " << cfg.params.mle.max_iters << '\n';
  os << "tol = " << io::format_double(cfg.params.mle.tol) << '\n';
  os << "ridge = " << io::format_double(cfg.params.mle.ridge) << '\n';
  os << "box = " << io::format_double(cfg.params.mle.box) << '\n';
  os << "\n[fig1]\n";
  os << "m = " << cfg.fig1.m << '\n';
  os << "b_grid = " << join(cfg.fig1.b_grid) << '\n';
  os << "trials = " << cfg.fig1.trials << '\n';
  os << "\n[fig2]\n";
  os << "m = " << cfg.fig2.m << '\n';
  os << "n = " << cfg.fig2.n << '\n';
  os << "b = " << io::format_double(cfg.fig2.b) << '\n';
  os << "r_values = " << join(cfg.fig2.r_values) << '\n';
  os << "budgets = " << join(cfg.fig2.budgets) << '\n';
  os << "trials = " << cfg.fig2.trials << '\n';
  os << "success_threshold = " << io::format_double(cfg.fig2.success_threshold) << '\n';
  os << "include_raw_rows = " << (cfg.fig2.include_raw_rows ? "true" : "false") << '\n';
  os << "\n[fig3]\n";
  os << "m = " << cfg.fig3.m << '\n';
  os << "n = " << cfg.fig3.n << '\n';
  os << "b = " << io::format_double(cfg.fig3.b) << '\n';
  os << "epsilon = " << io::format_double(cfg.fig3.epsilon) << '\n';
  os << "r_values = " << join(cfg.fig3.r_values) << '\n';
  os << "r_tilde_min = " << cfg.fig3.r_tilde_min << '\n';
  os << "r_tilde_max = " << cfg.fig3.r_tilde_max << '\n';
  os << "trials = " << cfg.fig3.trials << '\n';
  return os.str();
}

}  // namespace mcpr::cli
