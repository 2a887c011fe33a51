#include "sfm/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sfm/errors.hpp"

namespace sfm {

ProcessSpec ProcessSpec::constant(double v) {
  ProcessSpec p;
  p.kind = ProcessKind::Constant;
  p.levels = {v};
  return p;
}

ProcessSpec ProcessSpec::markov(std::vector<double> levels, double jump_rate, std::size_t initial_level) {
  ProcessSpec p;
  p.kind = ProcessKind::Markov;
  p.levels = std::move(levels);
  p.jump_rate = jump_rate;
  p.initial_level = initial_level;
  return p;
}

ProcessSpec ProcessSpec::schedule(std::vector<double> times, std::vector<double> values) {
  ProcessSpec p;
  p.kind = ProcessKind::Schedule;
  p.times = std::move(times);
  p.values = std::move(values);
  return p;
}

double ProcessSpec::min_value() const {
  const auto& v = kind == ProcessKind::Schedule ? values : levels;
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(v.begin(), v.end());
}

double Scenario::theta_max() const {
  return thetas.empty() ? 0.0 : *std::max_element(thetas.begin(), thetas.end());
}

double Scenario::prehistory_length() const {
  return 1.1 * std::max({init.w0, theta_max(), 1e-9 * horizon}) + 1e-12;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError(msg); }

void check_process(const ProcessSpec& p, const std::string& name, double horizon) {
  switch (p.kind) {
    case ProcessKind::Constant:
      if (p.levels.size() != 1) fail(name + ": constant process needs exactly one value");
      break;
    case ProcessKind::Markov:
      if (p.levels.empty()) fail(name + ": markov process needs at least one level");
      if (!(p.jump_rate >= 0.0) || !std::isfinite(p.jump_rate)) fail(name + ": jump_rate must be nonnegative");
      if (p.initial_level >= p.levels.size()) fail(name + ": initial_level out of range");
      break;
    case ProcessKind::Schedule:
      if (p.values.size() != p.times.size() + 1) fail(name + ": schedule needs one more value than switch times");
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        if (!(p.times[i] > 0.0) || !(p.times[i] < horizon)) fail(name + ": schedule times must lie in (0, horizon)");
        if (i > 0 && !(p.times[i] > p.times[i - 1])) fail(name + ": schedule times must be strictly increasing");
      }
      break;
  }
  const double lo = p.min_value();
  if (!(lo > 0.0) || !std::isfinite(lo)) fail(name + ": rates must be strictly positive");
}

}  // namespace

void validate(Scenario& s) {
  const std::size_t n = s.n_nodes;
  if (n < 1) fail("nodes must be at least 1");
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) fail("horizon must be positive");
  if (s.thetas.size() != n) fail("thetas must have one entry per node");
  for (double th : s.thetas) {
    if (!(th >= 0.0) || !std::isfinite(th)) fail("theta must be nonnegative");
  }
  if (s.policy.ramp_rates.size() != n) fail("policy.ramp_rates must have one entry per node");
  if (s.policy.alpha_min.size() != n) fail("policy.alpha_min must have one entry per node");
  for (double r : s.policy.ramp_rates) {
    if (!(r > 0.0) || !std::isfinite(r)) fail("ramp rates must be positive");
  }
  for (double a : s.policy.alpha_min) {
    if (!(a > 0.0) || !std::isfinite(a)) fail("alpha_min must be positive");
  }
  if (s.lambda_specs.size() != n) fail("lambda must have one process per node");
  for (std::size_t i = 0; i < n; ++i) check_process(s.lambda_specs[i], "lambda[" + std::to_string(i + 1) + "]", s.horizon);
  check_process(s.b_spec, "service", s.horizon);

  auto& ic = s.init;
  if (ic.alpha0.size() != n) fail("initial.alpha0 must have one entry per node");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ic.alpha0[i] >= s.policy.alpha_min[i])) fail("initial.alpha0 must be at least alpha_min");
  }
  if (ic.prehistory_alpha.empty()) ic.prehistory_alpha = ic.alpha0;
  if (ic.prehistory_alpha.size() != n) fail("initial.prehistory_alpha must have one entry per node");
  for (double a : ic.prehistory_alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) fail("prehistory values must be strictly positive");
  }
  if (!(ic.w0 >= 0.0) || !std::isfinite(ic.w0)) fail("initial.w0 must be nonnegative");
  double pre_total = 0.0;
  for (double a : ic.prehistory_alpha) pre_total += a;
  const double x_fcfs = ic.w0 * pre_total;
  if (std::isnan(ic.x0)) {
    ic.x0 = x_fcfs;
  } else {
    if (!(ic.x0 >= 0.0)) fail("initial.x0 must be nonnegative");
    if (ic.x0 == 0.0 && ic.w0 != 0.0) fail("initial.w0 must be 0 when x0 is 0");
    if (std::abs(ic.x0 - x_fcfs) > 1e-9 * std::max(1.0, x_fcfs)) {
      fail("initial.x0 must equal w0 * sum(prehistory_alpha) for a FCFS-consistent buffer");
    }
    ic.x0 = x_fcfs;
  }
  if (!(s.numerics.event_tol_rel > 0.0)) fail("numerics.event_tol_rel must be positive");
  if (!(s.numerics.root_tol_rel > 0.0)) fail("numerics.root_tol_rel must be positive");
  if (s.numerics.scan_steps < 1) fail("numerics.scan_steps must be positive");
}

namespace {

std::string where(const YAML::Node& node, const std::string& origin) {
  const auto m = node.Mark();
  std::ostringstream os;
  os << origin;
  if (m.line >= 0) os << ":" << (m.line + 1);
  return os.str();
}

template <typename T>
T get(const YAML::Node& parent, const std::string& key, const std::string& origin) {
  const YAML::Node node = parent[key];
  if (!node) throw ScenarioError(where(parent, origin) + ": missing field '" + key + "'");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ScenarioError(where(node, origin) + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const YAML::Node& parent, const std::string& key, T fallback, const std::string& origin) {
  if (!parent[key]) return fallback;
  return get<T>(parent, key, origin);
}

ProcessSpec parse_process(const YAML::Node& node, const std::string& name, const std::string& origin) {
  if (!node.IsMap()) throw ScenarioError(where(node, origin) + ": " + name + " must be a mapping");
  const auto kind = get<std::string>(node, "kind", origin);
  if (kind == "constant") return ProcessSpec::constant(get<double>(node, "value", origin));
  if (kind == "markov") {
    return ProcessSpec::markov(get<std::vector<double>>(node, "levels", origin), get<double>(node, "jump_rate", origin),
                               get_or<std::size_t>(node, "initial_level", 0, origin));
  }
  if (kind == "schedule") {
    return ProcessSpec::schedule(get_or<std::vector<double>>(node, "times", {}, origin),
                                 get<std::vector<double>>(node, "values", origin));
  }
  throw ScenarioError(where(node["kind"], origin) + ": " + name + ": unknown process kind '" + kind + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << origin << ":" << (e.mark.line + 1) << ": parse error: " << e.msg;
    throw ScenarioError(os.str());
  }
  if (!root.IsMap()) throw ScenarioError(origin + ": top level must be a mapping");

  Scenario s;
  s.n_nodes = get<std::size_t>(root, "nodes", origin);
  s.horizon = get<double>(root, "horizon", origin);
  s.seed = get_or<std::uint64_t>(root, "seed", 0, origin);
  s.thetas = get<std::vector<double>>(root, "thetas", origin);

  const YAML::Node policy = root["policy"];
  if (!policy) throw ScenarioError(origin + ": missing section 'policy'");
  s.policy.ramp_rates = get<std::vector<double>>(policy, "ramp_rates", origin);
  s.policy.alpha_min = get<std::vector<double>>(policy, "alpha_min", origin);

  const YAML::Node init = root["initial"];
  if (!init) throw ScenarioError(origin + ": missing section 'initial'");
  s.init.alpha0 = get<std::vector<double>>(init, "alpha0", origin);
  s.init.w0 = get_or<double>(init, "w0", 0.0, origin);
  s.init.prehistory_alpha = get_or<std::vector<double>>(init, "prehistory_alpha", {}, origin);
  if (init["x0"]) s.init.x0 = get<double>(init, "x0", origin);

  const YAML::Node lambda = root["lambda"];
  if (!lambda || !lambda.IsSequence()) throw ScenarioError(origin + ": 'lambda' must be a list of process specs");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    s.lambda_specs.push_back(parse_process(lambda[i], "lambda[" + std::to_string(i + 1) + "]", origin));
  }
  const YAML::Node service = root["service"];
  if (!service) throw ScenarioError(origin + ": missing section 'service'");
  s.b_spec = parse_process(service, "service", origin);

  if (const YAML::Node num = root["numerics"]) {
    s.numerics.event_tol_rel = get_or<double>(num, "event_tol_rel", s.numerics.event_tol_rel, origin);
    s.numerics.root_tol_rel = get_or<double>(num, "root_tol_rel", s.numerics.root_tol_rel, origin);
    s.numerics.scan_steps = get_or<std::size_t>(num, "scan_steps", s.numerics.scan_steps, origin);
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

namespace {

void emit_process(YAML::Emitter& out, const ProcessSpec& p) {
  out << YAML::BeginMap;
  switch (p.kind) {
    case ProcessKind::Constant:
      out << YAML::Key << "kind" << YAML::Value << "constant";
      out << YAML::Key << "value" << YAML::Value << p.levels.at(0);
      break;
    case ProcessKind::Markov:
      out << YAML::Key << "kind" << YAML::Value << "markov";
      out << YAML::Key << "levels" << YAML::Value << YAML::Flow << p.levels;
      out << YAML::Key << "jump_rate" << YAML::Value << p.jump_rate;
      out << YAML::Key << "initial_level" << YAML::Value << p.initial_level;
      break;
    case ProcessKind::Schedule:
      out << YAML::Key << "kind" << YAML::Value << "schedule";
      out << YAML::Key << "times" << YAML::Value << YAML::Flow << p.times;
      out << YAML::Key << "values" << YAML::Value << YAML::Flow << p.values;
      break;
  }
  out << YAML::EndMap;
}

}  // namespace

std::string to_yaml(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "nodes" << YAML::Value << s.n_nodes;
  out << YAML::Key << "horizon" << YAML::Value << s.horizon;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "thetas" << YAML::Value << YAML::Flow << s.thetas;
  out << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ramp_rates" << YAML::Value << YAML::Flow << s.policy.ramp_rates;
  out << YAML::Key << "alpha_min" << YAML::Value << YAML::Flow << s.policy.alpha_min;
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha0" << YAML::Value << YAML::Flow << s.init.alpha0;
  out << YAML::Key << "w0" << YAML::Value << s.init.w0;
  if (!s.init.prehistory_alpha.empty()) {
    out << YAML::Key << "prehistory_alpha" << YAML::Value << YAML::Flow << s.init.prehistory_alpha;
  }
  out << YAML::EndMap;
  out << YAML::Key << "lambda" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : s.lambda_specs) emit_process(out, p);
  out << YAML::EndSeq;
  out << YAML::Key << "service" << YAML::Value;
  emit_process(out, s.b_spec);
  out << YAML::Key << "numerics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "event_tol_rel" << YAML::Value << s.numerics.event_tol_rel;
  out << YAML::Key << "root_tol_rel" << YAML::Value << s.numerics.root_tol_rel;
  out << YAML::Key << "scan_steps" << YAML::Value << s.numerics.scan_steps;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t process_stream_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(index) + 1)));
}

ProcessPath generate_process(const ProcessSpec& spec, double horizon, std::uint64_t stream_seed) {
  ProcessPath path;
  switch (spec.kind) {
    case ProcessKind::Constant:
      path.initial = spec.levels.at(0);
      break;
    case ProcessKind::Schedule:
      path.initial = spec.values.at(0);
      for (std::size_t i = 0; i < spec.times.size(); ++i) {
        path.times.push_back(spec.times[i]);
        path.values.push_back(spec.values[i + 1]);
      }
      break;
    case ProcessKind::Markov: {
      path.initial = spec.levels.at(spec.initial_level);
      if (spec.levels.size() < 2 || spec.jump_rate <= 0.0) break;
      std::mt19937_64 rng(stream_seed);
      const auto others = static_cast<std::uint64_t>(spec.levels.size() - 1);
      std::size_t level = spec.initial_level;
      double t = 0.0;
      for (;;) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        t += -std::log1p(-u) / spec.jump_rate;
        if (!(t < horizon)) break;
        auto next = static_cast<std::size_t>(rng() % others);
        if (next >= level) ++next;
        level = next;
        if (t > 0.0) {
          path.times.push_back(t);
          path.values.push_back(spec.levels[level]);
        }
      }
      break;
    }
  }
  return path;
}

namespace {

PiecewiseSignal to_signal(const ProcessPath& p, double horizon) {
  PiecewiseSignal sig;
  double start = 0.0;
  double value = p.initial;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    sig.append_constant(start, p.times[i], value);
    start = p.times[i];
    value = p.values[i];
  }
  sig.append_constant(start, horizon, value);
  return sig;
}

}  // namespace

Realization realize_processes(const Scenario& s, std::uint64_t seed) {
  Realization r;
  for (std::size_t n = 0; n < s.n_nodes; ++n) {
    const ProcessPath p = generate_process(s.lambda_specs.at(n), s.horizon, process_stream_seed(seed, n));
    r.lambda.push_back(to_signal(p, s.horizon));
    for (double t : p.times) r.jumps.push_back({t, false, n});
  }
  const ProcessPath b = generate_process(s.b_spec, s.horizon, process_stream_seed(seed, s.n_nodes));
  r.service = to_signal(b, s.horizon);
  for (double t : b.times) r.jumps.push_back({t, true, s.n_nodes});
  std::stable_sort(r.jumps.begin(), r.jumps.end(), [](const ExogenousJump& a, const ExogenousJump& b2) {
    if (a.time != b2.time) return a.time < b2.time;
    return a.node < b2.node;
  });
  return r;
}

}  // namespace sfm
