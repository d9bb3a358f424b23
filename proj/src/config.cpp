#include "fbmb/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbmb::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": not a number: '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& v, const std::string& where) {
  try {
    return static_cast<std::uint64_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": not an unsigned integer: '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(where + ": not a boolean: '" + v + "'");
}

}  // namespace

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(item, "list"));
  }
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& where) {
  if (key == "H") cfg.H = to_double(value, where);
  else if (key == "T") cfg.T = to_double(value, where);
  else if (key == "n") cfg.n = static_cast<std::size_t>(to_u64(value, where));
  else if (key == "m") cfg.m = static_cast<std::size_t>(to_u64(value, where));
  else if (key == "seed") cfg.seed = to_u64(value, where);
  else if (key == "method") cfg.method = value;
  else if (key == "drift") cfg.drift = value;
  else if (key == "gamma") cfg.gamma = to_double(value, where);
  else if (key == "u_const") cfg.u_const = to_double(value, where);
  else if (key == "u_csv") cfg.u_csv = value;
  else if (key == "u_minus_const") cfg.u_minus_const = to_double(value, where);
  else if (key == "auto_u_minus") cfg.auto_u_minus = to_bool(value, where);
  else if (key == "gammas") cfg.gammas = parse_double_list(value);
  else if (key == "conservative") cfg.conservative = to_bool(value, where);
  else if (key == "decay_eps") cfg.decay_eps = to_double(value, where);
  else if (key == "out") cfg.out = value;
  else if (key == "paths_out") cfg.paths_out = value;
  else throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

void load_config_file(const std::string& path, const std::string& command, RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw std::invalid_argument(where + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(where + ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!section.empty() && section != command) continue;  // other command's section
    apply_key(cfg, key, value, where);
  }
}

std::string canonical_string(const RunConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "command=" << cfg.command << "\nH=" << num(cfg.H) << "\nT=" << num(cfg.T)
     << "\nn=" << cfg.n << "\nm=" << cfg.m << "\nseed=" << cfg.seed
     << "\nmethod=" << cfg.method << "\ndrift=" << cfg.drift << "\ngamma=" << num(cfg.gamma)
     << "\nu_const=" << num(cfg.u_const) << "\nu_csv=" << cfg.u_csv << "\nu_minus_const="
     << (cfg.u_minus_const ? num(*cfg.u_minus_const) : std::string("none"))
     << "\nauto_u_minus=" << (cfg.auto_u_minus ? 1 : 0) << "\ngammas=";
  for (std::size_t i = 0; i < cfg.gammas.size(); ++i) {
    if (i) os << ',';
    os << num(cfg.gammas[i]);
  }
  os << "\nconservative=" << (cfg.conservative ? 1 : 0) << "\ndecay_eps=" << num(cfg.decay_eps)
     << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = canonical_string(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fbmb::cli
