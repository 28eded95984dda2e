#include "lgent/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lgent {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out + "]";
}

std::vector<double> box_flat(const Box& b) {
  std::vector<double> out;
  for (int i = 0; i < b.dim(); ++i) {
    out.push_back(b.lo(i));
    out.push_back(b.hi(i));
  }
  return out;
}

std::vector<double> mat_flat(const Mat& m) {
  std::vector<double> out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

struct RawValue {
  std::string text;
  int line = 0;
};

struct RawConfig {
  std::map<std::string, RawValue> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    auto it = values.find(key);
    int line = it == values.end() ? 0 : it->second.line;
    throw ConfigError("scenario line " + std::to_string(line) + ", key '" +
                      key + "': " + why);
  }

  std::string get_string(const std::string& key) const {
    return values.at(key).text;
  }

  double get_double(const std::string& key) const {
    const std::string& t = values.at(key).text;
    try {
      size_t used = 0;
      double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + t + "'");
    }
  }

  long long get_int(const std::string& key) const {
    double v = get_double(key);
    if (v != std::floor(v)) fail(key, "expected an integer");
    return static_cast<long long>(v);
  }

  bool get_bool(const std::string& key) const {
    const std::string& t = values.at(key).text;
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    fail(key, "expected true/false");
  }

  std::vector<double> get_list(const std::string& key) const {
    const std::string& t = values.at(key).text;
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
      fail(key, "expected a [..] list");
    }
    std::vector<double> out;
    std::string body = t.substr(1, t.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      size_t a = item.find_first_not_of(" \t");
      if (a == std::string::npos) fail(key, "empty list entry");
      size_t b = item.find_last_not_of(" \t");
      try {
        out.push_back(std::stod(item.substr(a, b - a + 1)));
      } catch (const std::exception&) {
        fail(key, "bad list entry '" + item + "'");
      }
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }
};

RawConfig tokenize(const std::string& text) {
  RawConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      size_t x = s.find_first_not_of(" \t\r");
      if (x == std::string::npos) return std::string();
      size_t y = s.find_last_not_of(" \t\r");
      return s.substr(x, y - x + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (cfg.values.count(key)) {
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    cfg.values[key] = RawValue{value, lineno};
  }
  return cfg;
}

const std::vector<std::string> kKnownKeys = {
    "name",          "preset",         "group",          "A",
    "B",             "control_box",    "delta",          "eps_list",
    "n_min",         "n_max",          "rho",            "mode",
    "log_base",      "seed",           "budget",         "estimator",
    "upper_tol",     "lower_tol",      "check_lower",    "witness_eps",
    "witness_tmax",  "witness_grid",   "pair.k_box",     "pair.q_box",
    "pair.horizon",  "pair.segment_direction",           "pair.segment_length",
};

}  // namespace

std::vector<std::string> preset_names() {
  return {"euclid_ab", "aff_example", "heisenberg_example", "torus_cat"};
}

Scenario make_preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.preset = name;
  if (name == "euclid_ab") {
    s.control_box = Box::from_flat({-1.0, 1.0});
    s.delta = 2.0 / 15.0;
    s.pair.k_box = Box::from_flat({-0.5, 0.5});
    s.pair.q_box = Box::from_flat({-1.0, 1.0});
    s.pair.horizon = 12;
    s.eps_list = {0.05};
    s.n_min = 6;
    s.n_max = 12;
    s.rho = 0.01;
  } else if (name == "aff_example") {
    s.control_box = Box::from_flat({-1.0, 1.0});
    // The y-dynamics expands by e^(2+u) per step, so the sustainable band of
    // initial y values over a quantized alphabet is narrow and the cumulative
    // control sum is capped by Q's x-range. delta = 1/8 keeps both workable.
    s.delta = 0.125;
    s.pair.k_box = Box::from_flat({0.9, 1.1, -0.02, 0.05});
    s.pair.q_box = Box::from_flat({0.25, 4.0, -1.0, 1.0});
    s.pair.horizon = 8;
    s.eps_list = {0.2};
    s.n_min = 2;
    s.n_max = 6;
    s.rho = 0.05;
    s.check_lower = false;  // alphabet cannot resolve the e^2 rate in budget
  } else if (name == "heisenberg_example") {
    s.control_box = Box::from_flat({-1.0, 1.0});
    s.delta = 0.25;
    // x2 extent kept small: the nilpotent drift moves x1 by ~n * x2, so the
    // bundle of K-trajectories must fit one N_eps(Q) corridor through n = 12
    // for the covering count to stay flat.
    s.pair.k_box = Box::from_flat({-0.3, 0.3, -0.06, 0.06, -0.1, 0.1});
    s.pair.q_box = Box::from_flat({-1.0, 1.0, -1.2, 1.2, -1.2, 1.2});
    s.pair.horizon = 12;
    s.eps_list = {0.2};
    s.n_min = 4;
    s.n_max = 12;
    s.rho = 0.04;
  } else if (name == "torus_cat") {
    s.control_box = Box(Vec::Zero(1), Vec::Zero(1));
    s.delta = 1.0;
    s.estimator = "separated";
    s.pair.q_box = Box::from_flat({0.0, 1.0, 0.0, 1.0});
    s.pair.k_box = s.pair.q_box;
    s.pair.horizon = 10;
    Vec dir(2);
    dir << 1.0, 0.0;
    s.pair.segment_direction = dir;
    s.pair.segment_length = 1.0;
    s.eps_list = {0.05};
    s.n_min = 2;
    s.n_max = 10;
    s.rho = 0.0125;  // only the safety-margin bound matters for segments
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return s;
}

std::string canonical_dump(const Scenario& s) {
  std::string out;
  auto put = [&out](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  put("name", s.name);
  if (!s.preset.empty()) put("preset", s.preset);
  if (s.inline_a) put("A", fmt_list(mat_flat(*s.inline_a)));
  if (s.inline_b) put("B", fmt_list(mat_flat(*s.inline_b)));
  put("control_box", fmt_list(box_flat(s.control_box)));
  put("delta", fmt_double(s.delta));
  put("eps_list", fmt_list(s.eps_list));
  put("n_min", std::to_string(s.n_min));
  put("n_max", std::to_string(s.n_max));
  put("rho", fmt_double(s.rho));
  put("mode", s.mode == CoverMethod::greedy ? "greedy" : "exact");
  put("log_base", s.log_base == 2.0 ? "2" : "e");
  put("seed", std::to_string(s.seed));
  put("budget", std::to_string(s.budget));
  put("estimator", s.estimator);
  put("upper_tol", fmt_double(s.upper_tol));
  put("lower_tol", fmt_double(s.lower_tol));
  put("check_lower", s.check_lower ? "true" : "false");
  put("witness_eps", fmt_double(s.witness_eps));
  put("witness_tmax", fmt_double(s.witness_tmax));
  put("witness_grid", std::to_string(s.witness_grid));
  put("pair.k_box", fmt_list(box_flat(s.pair.k_box)));
  put("pair.q_box", fmt_list(box_flat(s.pair.q_box)));
  put("pair.horizon", std::to_string(s.pair.horizon));
  if (s.pair.segment_direction) {
    std::vector<double> d(s.pair.segment_direction->data(),
                          s.pair.segment_direction->data() +
                              s.pair.segment_direction->size());
    put("pair.segment_direction", fmt_list(d));
    put("pair.segment_length", fmt_double(s.pair.segment_length));
  }
  return out;
}

Scenario parse_scenario_text(const std::string& text) {
  RawConfig cfg = tokenize(text);
  for (const auto& [key, value] : cfg.values) {
    bool known = false;
    for (const auto& k : kKnownKeys) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) cfg.fail(key, "unknown key");
  }

  Scenario s;
  if (cfg.has("preset")) {
    s = make_preset_scenario(cfg.get_string("preset"));
  } else {
    if (!cfg.has("A") || !cfg.has("B") || !cfg.has("control_box")) {
      throw ConfigError(
          "scenario needs either 'preset' or an inline Euclidean system "
          "(A, B, control_box)");
    }
  }
  if (cfg.has("name")) s.name = cfg.get_string("name");

  if (cfg.has("A") || cfg.has("B")) {
    if (!cfg.has("A") || !cfg.has("B")) {
      throw ConfigError("inline systems need both A and B");
    }
    if (!s.preset.empty()) {
      throw ConfigError("A/B matrices cannot be combined with a preset");
    }
    std::vector<double> a = cfg.get_list("A");
    int d = static_cast<int>(std::llround(std::sqrt(double(a.size()))));
    if (d * d != static_cast<int>(a.size())) {
      cfg.fail("A", "row-major square matrix expected");
    }
    if (cfg.has("group")) {
      // Inline definitions are restricted to the Euclidean family.
      GroupSpec g = GroupSpec::from_name(cfg.get_string("group"));
      if (g.name() != GroupName::EuclideanD) {
        cfg.fail("group", "inline systems support euclidean:d only");
      }
      if (g.dimension() != d) {
        cfg.fail("group", "dimension does not match A");
      }
    }
    Mat am(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) am(r, c) = a[r * d + c];
    }
    s.inline_a = am;
    std::vector<double> b = cfg.get_list("B");
    if (b.size() % d != 0) cfg.fail("B", "row count must match A");
    int m = static_cast<int>(b.size()) / d;
    Mat bm(d, m);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < m; ++c) bm(r, c) = b[r * m + c];
    }
    s.inline_b = bm;
  } else if (cfg.has("group")) {
    cfg.fail("group", "group selection applies to inline systems only");
  }

  if (cfg.has("control_box")) s.control_box = Box::from_flat(cfg.get_list("control_box"));
  if (cfg.has("delta")) s.delta = cfg.get_double("delta");
  if (cfg.has("eps_list")) s.eps_list = cfg.get_list("eps_list");
  if (cfg.has("n_min")) s.n_min = static_cast<int>(cfg.get_int("n_min"));
  if (cfg.has("n_max")) s.n_max = static_cast<int>(cfg.get_int("n_max"));
  if (cfg.has("rho")) s.rho = cfg.get_double("rho");
  if (cfg.has("mode")) {
    std::string m = cfg.get_string("mode");
    if (m == "greedy") s.mode = CoverMethod::greedy;
    else if (m == "exact") s.mode = CoverMethod::exact;
    else cfg.fail("mode", "expected greedy or exact");
  }
  if (cfg.has("log_base")) {
    std::string b = cfg.get_string("log_base");
    if (b == "2") s.log_base = 2.0;
    else if (b == "e") s.log_base = std::exp(1.0);
    else cfg.fail("log_base", "expected 2 or e");
  }
  if (cfg.has("seed")) s.seed = static_cast<unsigned long long>(cfg.get_int("seed"));
  if (cfg.has("budget")) s.budget = cfg.get_int("budget");
  if (cfg.has("estimator")) {
    s.estimator = cfg.get_string("estimator");
    if (s.estimator != "rinv" && s.estimator != "separated") {
      cfg.fail("estimator", "expected rinv or separated");
    }
  }
  if (cfg.has("upper_tol")) s.upper_tol = cfg.get_double("upper_tol");
  if (cfg.has("lower_tol")) s.lower_tol = cfg.get_double("lower_tol");
  if (cfg.has("check_lower")) s.check_lower = cfg.get_bool("check_lower");
  if (cfg.has("witness_eps")) s.witness_eps = cfg.get_double("witness_eps");
  if (cfg.has("witness_tmax")) s.witness_tmax = cfg.get_double("witness_tmax");
  if (cfg.has("witness_grid")) s.witness_grid = static_cast<int>(cfg.get_int("witness_grid"));
  if (cfg.has("pair.k_box")) s.pair.k_box = Box::from_flat(cfg.get_list("pair.k_box"));
  if (cfg.has("pair.q_box")) s.pair.q_box = Box::from_flat(cfg.get_list("pair.q_box"));
  if (cfg.has("pair.horizon")) s.pair.horizon = static_cast<int>(cfg.get_int("pair.horizon"));
  if (cfg.has("pair.segment_direction")) {
    std::vector<double> d = cfg.get_list("pair.segment_direction");
    Vec dir(static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) dir(static_cast<int>(i)) = d[i];
    s.pair.segment_direction = dir;
  }
  if (cfg.has("pair.segment_length")) {
    s.pair.segment_length = cfg.get_double("pair.segment_length");
  }

  validate_scenario(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

void validate_scenario(const Scenario& s) {
  if (s.eps_list.empty()) throw ConfigError("eps_list must be nonempty");
  for (size_t i = 1; i < s.eps_list.size(); ++i) {
    if (!(s.eps_list[i] < s.eps_list[i - 1])) {
      throw ConfigError("eps_list must be strictly decreasing");
    }
  }
  double eps_min = s.eps_list.back();
  if (!(eps_min > 0.0)) throw ConfigError("eps values must be positive");
  if (s.rho > eps_min / 4.0 + 1e-12) {
    throw ConfigError("rho = " + std::to_string(s.rho) +
                      " violates rho <= eps_min / 4 = " +
                      std::to_string(eps_min / 4.0));
  }
  if (s.n_min < 1 || s.n_max < s.n_min) throw ConfigError("empty n range");
  if (s.pair.horizon < s.n_max) {
    throw ConfigError("pair.horizon must be >= n_max");
  }
  if (!(s.delta > 0.0)) throw ConfigError("delta must be positive");
  if (s.budget <= 0) throw ConfigError("budget must be positive");
  for (int i = 0; i < s.control_box.dim(); ++i) {
    if (s.control_box.lo(i) > 0.0 || s.control_box.hi(i) < 0.0) {
      throw ConfigError("control box must contain 0");
    }
  }
  if (s.preset.empty() && (!s.inline_a || !s.inline_b)) {
    throw ConfigError("scenario needs a preset or inline A/B matrices");
  }
}

LinearSystem make_system(const Scenario& s) {
  if (s.preset == "euclid_ab" && !s.inline_a) {
    Mat a(1, 1), b(1, 1);
    a << 2.0;
    b << 1.0;
    return make_euclidean_system(a, b, s.control_box, s.delta);
  }
  if (s.preset.empty() || s.inline_a) {
    return make_euclidean_system(*s.inline_a, *s.inline_b, s.control_box, s.delta);
  }
  if (s.preset == "aff_example") return make_aff_system(s.control_box, s.delta);
  if (s.preset == "heisenberg_example") {
    return make_heisenberg_system(s.control_box, s.delta);
  }
  if (s.preset == "torus_cat") return make_torus_cat_system();
  throw ConfigError("unknown preset '" + s.preset + "'");
}

}  // namespace lgent
