#include "qtunnel/model.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "qtunnel/eigensolver.hpp"
#include "qtunnel/error.hpp"

namespace qtunnel {

double PotentialSpec::operator()(double x) const {
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  if (x < a1) return 0.0;
  if (stage == Stage::PreQuench || x < a2) return U0;
  return 0.0;
}

PotentialSpec pre_quench(double a1, double U0) {
  return {a1, std::numeric_limits<double>::infinity(), U0, Stage::PreQuench};
}

PotentialSpec post_quench(double a1, double d, double U0) {
  return {a1, a1 + d, U0, Stage::PostQuench};
}

std::string_view to_string(InitialState s) {
  switch (s) {
    case InitialState::Ground: return "ground";
    case InitialState::Excited: return "excited";
    case InitialState::EqualMix: return "mix";
  }
  return "ground";
}

InitialState parse_initial_state(std::string_view text) {
  if (text == "ground" || text == "Ground") return InitialState::Ground;
  if (text == "excited" || text == "Excited") return InitialState::Excited;
  if (text == "mix" || text == "EqualMix" || text == "equal_mix") return InitialState::EqualMix;
  throw Error(ErrorCode::ConfigParse, "unknown initial_state '" + std::string(text) + "'");
}

SimulationConfig validate(SimulationConfig c) {
  std::vector<Issue> issues;
  auto fail = [&](ErrorCode code, std::string msg) { issues.push_back({code, std::move(msg)}); };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

  bool geometry_ok = true;
  if (!positive(c.a1)) {
    fail(ErrorCode::InvalidGeometry, "a1 must be positive");
    geometry_ok = false;
  }
  if (!(std::isfinite(c.d) && c.d > 0.0)) {
    fail(ErrorCode::InvalidGeometry, "barrier width d = a2 - a1 must be positive");
    geometry_ok = false;
  }
  if (!positive(c.U0)) {
    fail(ErrorCode::InvalidGeometry, "U0 must be positive");
    geometry_ok = false;
  }
  if (!(c.so.xi > 0.0)) fail(ErrorCode::InvalidCoupling, "xi must be positive (inf = uncoupled)");

  const double k_edge = geometry_ok ? std::sqrt(2.0 * c.U0) : 0.0;
  if (geometry_ok && !(c.k_grid.k_max > k_edge)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "k_max = %g must exceed sqrt(2 U0) = %g", c.k_grid.k_max, k_edge);
    fail(ErrorCode::InvalidGrid, buf);
  }
  if (!positive(c.k_grid.dk)) fail(ErrorCode::InvalidGrid, "dk must be positive");
  if (!positive(c.k_grid.tolerance)) fail(ErrorCode::InvalidGrid, "k-grid tolerance must be positive");
  if (!positive(c.x_grid.max) || !positive(c.x_grid.step))
    fail(ErrorCode::InvalidGrid, "x_max and dx must be positive");
  if (!positive(c.t_grid.max) || !positive(c.t_grid.step))
    fail(ErrorCode::InvalidGrid, "t_max and dt must be positive");
  if (geometry_ok && !(std::isfinite(c.X_obs) && c.X_obs > c.a1 + c.d))
    fail(ErrorCode::InvalidValue, "X_obs must lie beyond the barrier");

  int bound = 0;
  if (geometry_ok) {
    bound = static_cast<int>(solve_bound_states(c.pre()).size());
    if (bound == 0) {
      fail(ErrorCode::InvalidValue, "pre-quench potential holds no bound state");
    } else if (bound < 2 && c.initial != InitialState::Ground) {
      fail(ErrorCode::MissingExcited, "initial state '" + std::string(to_string(c.initial)) +
                                          "' needs an excited bound state");
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  c.derived = Derived{c.d, c.a1 + c.d, c.so.momentum(), k_edge, bound};
  c.validated = true;
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text, int line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": key '" + key +
                                            "' expects a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

SimulationConfig parse_config(std::istream& in) {
  SimulationConfig c;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string content = trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));

    if (key == "initial_state") {
      c.initial = parse_initial_state(value);
      continue;
    }
    const double v = parse_number(key, value, line);
    if (key == "a1") c.a1 = v;
    else if (key == "d") c.d = v;
    else if (key == "U0") c.U0 = v;
    else if (key == "xi") c.so.xi = v;
    else if (key == "k_max") c.k_grid.k_max = v;
    else if (key == "dk") c.k_grid.dk = v;
    else if (key == "x_max") c.x_grid.max = v;
    else if (key == "dx") c.x_grid.step = v;
    else if (key == "t_max") c.t_grid.max = v;
    else if (key == "dt") c.t_grid.step = v;
    else if (key == "X_obs") c.X_obs = v;
    else throw Error(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": unknown key '" + key + "'");
  }
  return c;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigIo, "cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string to_text(const SimulationConfig& c) {
  std::string out;
  auto put = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out += buf;
  };
  put("a1", c.a1);
  put("d", c.d);
  put("U0", c.U0);
  put("xi", c.so.xi);
  out += "initial_state = " + std::string(to_string(c.initial)) + "\n";
  put("k_max", c.k_grid.k_max);
  put("dk", c.k_grid.dk);
  put("x_max", c.x_grid.max);
  put("dx", c.x_grid.step);
  put("t_max", c.t_grid.max);
  put("dt", c.t_grid.step);
  put("X_obs", c.X_obs);
  return out;
}

}  // namespace qtunnel
