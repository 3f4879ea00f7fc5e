#include "mcpr/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mcpr::io {

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& token) {
  double value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + token + "'");
  return value;
}

std::int64_t parse_int(const std::string& token) {
  std::int64_t value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("not an integer: '" + token + "'");
  return value;
}

namespace {

void write_header(std::ostream& os, const model::SimulationConfig& c) {
  os << c.m << ' ' << c.r << ' ' << c.K << ' ' << format_double(c.b) << ' '
     << format_double(c.epsilon) << ' ' << c.seed << '\n';
}

model::SimulationConfig read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing header line");
  std::istringstream ss(line);
  std::string tm, tr, tk, tb, te, ts;
  if (!(ss >> tm >> tr >> tk >> tb >> te >> ts))
    throw std::runtime_error("malformed header: '" + line + "'");
  model::SimulationConfig c;
  c.m = static_cast<int>(parse_int(tm));
  c.r = static_cast<int>(parse_int(tr));
  c.K = static_cast<int>(parse_int(tk));
  c.b = parse_double(tb);
  c.epsilon = parse_double(te);
  c.seed = static_cast<std::uint64_t>(parse_int(ts));
  c.validate();
  return c;
}

}  // namespace

void write_model(std::ostream& os, const model::SimulationConfig& config,
                 const model::ClusterModel& m) {
  write_header(os, config);
  for (int u = 0; u < m.n(); ++u) os << u << ' ' << m.labels[u] << '\n';
  os << "scores\n";
  for (int k = 0; k < m.r(); ++k) {
    os << k;
    for (int i = 0; i < m.m(); ++i) os << ' ' << format_double(m.scores[k][i]);
    os << '\n';
  }
}

void write_dataset(std::ostream& os, const model::SimulationConfig& config,
                   const model::ComparisonDataset& d) {
  write_header(os, config);
  for (int u = 0; u < d.n(); ++u)
    for (const auto& rec : d.users[u])
      os << u << ' ' << rec.i << ' ' << rec.j << ' ' << int(rec.outcome) << '\n';
}

LoadedModel read_model(std::istream& is) {
  LoadedModel out;
  out.config = read_header(is);
  const int n = out.config.n();
  out.model.labels.assign(n, -1);
  std::string line;
  for (int u = 0; u < n; ++u) {
    if (!std::getline(is, line)) throw std::runtime_error("model: truncated label block");
    std::istringstream ss(line);
    long long id, label;
    if (!(ss >> id >> label) || id != u)
      throw std::runtime_error("model: bad label line '" + line + "'");
    if (label < 0 || label >= out.config.r)
      throw std::runtime_error("model: label out of range in '" + line + "'");
    out.model.labels[u] = static_cast<int>(label);
  }
  if (!std::getline(is, line) || line != "scores")
    throw std::runtime_error("model: expected 'scores' section");
  out.model.scores.resize(out.config.r);
  for (int k = 0; k < out.config.r; ++k) {
    if (!std::getline(is, line)) throw std::runtime_error("model: truncated scores block");
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || parse_int(tok) != k)
      throw std::runtime_error("model: bad score line '" + line + "'");
    Eigen::VectorXd theta(out.config.m);
    for (int i = 0; i < out.config.m; ++i) {
      if (!(ss >> tok)) throw std::runtime_error("model: short score line '" + line + "'");
      theta[i] = parse_double(tok);
    }
    out.model.scores[k] = std::move(theta);
  }
  return out;
}

LoadedDataset read_dataset(std::istream& is) {
  LoadedDataset out;
  out.config = read_header(is);
  out.dataset.m = out.config.m;
  out.dataset.users.resize(out.config.n());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long u, i, j, outcome;
    if (!(ss >> u >> i >> j >> outcome))
      throw std::runtime_error("dataset: bad record line '" + line + "'");
    if (u < 0 || u >= out.config.n() || i < 0 || j <= i || j >= out.config.m ||
        (outcome != 1 && outcome != -1))
      throw std::runtime_error("dataset: record out of range '" + line + "'");
    out.dataset.users[u].push_back({static_cast<std::int32_t>(i),
                                    static_cast<std::int32_t>(j),
                                    static_cast<std::int8_t>(outcome)});
  }
  return out;
}

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}
std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}
}  // namespace

void save_model(const std::string& path, const model::SimulationConfig& config,
                const model::ClusterModel& m) {
  auto os = open_out(path);
  write_model(os, config, m);
  if (!os) throw std::runtime_error("write failed: " + path);
}

void save_dataset(const std::string& path, const model::SimulationConfig& config,
                  const model::ComparisonDataset& d) {
  auto os = open_out(path);
  write_dataset(os, config, d);
  if (!os) throw std::runtime_error("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  auto is = open_in(path);
  return read_model(is);
}

LoadedDataset load_dataset(const std::string& path) {
  auto is = open_in(path);
  return read_dataset(is);
}

}  // namespace mcpr::io
