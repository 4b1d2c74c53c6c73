#include "netloss/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "netloss/errors.hpp"
#include "netloss/parallel.hpp"
#include "netloss_presets.hpp"

namespace netloss {

using json = nlohmann::json;

std::string_view to_string(Series s) {
  switch (s) {
    case Series::state_norm: return "state_norm";
    case Series::ln_v: return "ln_v";
    case Series::loss_ratio: return "loss_ratio";
    case Series::trigger_gaps: return "trigger_gaps";
  }
  return "unknown";
}

// ---------------------------------------------------------------- parsing

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

// Object view that remembers its location for error messages and rejects
// keys nobody asked for.
class Node {
 public:
  Node(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_, "expected an object");
  }

  [[nodiscard]] const std::string& where() const { return where_; }
  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) bad(where_, std::string("missing key '") + key + "'");
    return j_.at(key);
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Node child(const char* key) { return Node(at(key), where_ + "." + key); }

  double number(const char* key) { return as_number(at(key), path(key)); }
  double number_or(const char* key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, path(key)) : fallback;
  }
  std::uint64_t count(const char* key) { return as_count(at(key), path(key)); }
  std::uint64_t count_or(const char* key, std::uint64_t fallback) {
    const json* v = find(key);
    return v ? as_count(*v, path(key)) : fallback;
  }
  std::string string(const char* key) {
    const json& v = at(key);
    if (!v.is_string()) bad(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const char* key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) bad(path(key), "expected a string");
    return v->get<std::string>();
  }

  [[nodiscard]] std::string path(const char* key) const { return where_ + "." + key; }

  // Call once every key has been consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) bad(where_, "unknown key '" + it.key() + "'");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(where, "expected a finite number");
    return d;
  }

  static std::uint64_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    bad(where, "expected a non-negative integer");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Mat parse_matrix(const json& v, const std::string& where) {
  if (v.is_number()) return Mat(1, 1, {Node::as_number(v, where)});
  if (!v.is_array() || v.empty()) bad(where, "expected a number or a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  std::vector<double> entries;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) bad(rw, "expected a non-empty array");
    if (r == 0) cols = row.size();
    if (row.size() != cols) bad(rw, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) entries.push_back(Node::as_number(row[c], rw + "[" + std::to_string(c) + "]"));
  }
  return Mat(rows, cols, std::move(entries));
}

std::vector<double> parse_numbers(const json& v, const std::string& where) {
  if (v.is_number()) return {Node::as_number(v, where)};
  if (!v.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(Node::as_number(v[j], where + "[" + std::to_string(j) + "]"));
  return out;
}

Trig parse_trig(const std::string& s, const std::string& where) {
  if (s == "sin") return Trig::sin;
  if (s == "cos") return Trig::cos;
  bad(where, "trig must be 'sin' or 'cos'");
}

TransitionSchedule parse_schedule(Node n) {
  const std::string kind = n.string("kind");
  TransitionSchedule out = TransitionSchedule::constant(0.0);
  if (kind == "constant") {
    out = TransitionSchedule::constant(n.number("p"));
  } else if (kind == "sinusoid" || kind == "sinusoid_squared") {
    const double base = n.number("base");
    const double amp = n.number("amplitude");
    const double freq = n.number("frequency");
    const Trig trig = parse_trig(n.string_or("trig", "sin"), n.path("trig"));
    out = kind == "sinusoid" ? TransitionSchedule::sinusoid(base, amp, freq, trig)
                             : TransitionSchedule::sinusoid_squared(base, amp, freq, trig);
  } else {
    bad(n.path("kind"), "unknown schedule kind '" + kind + "'");
  }
  n.finish();
  return out;
}

MarkovLossModel parse_chain(Node n) {
  const std::string kind = n.string_or("kind", "markov");
  if (kind == "never_fail") {
    n.finish();
    return MarkovLossModel::never_fail();
  }
  if (kind == "bernoulli") {
    const double p = n.number("p");
    n.finish();
    return MarkovLossModel::bernoulli(p);
  }
  if (kind != "markov") bad(n.path("kind"), "unknown chain kind '" + kind + "'");
  const std::vector<double> init = parse_numbers(n.at("init"), n.path("init"));
  if (init.size() != 2) bad(n.path("init"), "expected [theta0, theta1]");
  TransitionSchedule from_success = parse_schedule(n.child("from_success"));
  TransitionSchedule from_failure = parse_schedule(n.child("from_failure"));
  std::optional<double> p1, p0;
  if (const json* v = n.find("p1")) p1 = Node::as_number(*v, n.path("p1"));
  if (const json* v = n.find("p0")) p0 = Node::as_number(*v, n.path("p0"));
  n.finish();
  return MarkovLossModel(init[0], init[1], from_success, from_failure, p1, p0);
}

AttackStrategy parse_attack(Node n) {
  const std::string kind = n.string("kind");
  AttackStrategy out = NoAttack{};
  if (kind == "none") {
    out = NoAttack{};
  } else if (kind == "budget_greedy") {
    out = BudgetGreedy{n.number_or("kappa", 0.0), n.number("tau")};
  } else if (kind == "selective_budget") {
    out = SelectiveBudget{n.number_or("kappa", 0.0), n.number("tau")};
  } else if (kind == "state_threshold") {
    out = StateThreshold{n.number_or("kappa", 0.0), n.number("tau"), n.number("zeta")};
  } else if (kind == "random_period") {
    RandomPeriod rp;
    const json& sup = n.at("support");
    if (!sup.is_array()) bad(n.path("support"), "expected an array of periods");
    for (std::size_t j = 0; j < sup.size(); ++j) rp.support.push_back(Node::as_count(sup[j], n.path("support")));
    rp.probs = parse_numbers(n.at("probs"), n.path("probs"));
    out = rp;
  } else if (kind == "bernoulli") {
    out = BernoulliAttack{n.number("p")};
  } else {
    bad(n.path("kind"), "unknown attack kind '" + kind + "'");
  }
  n.finish();
  validate(out);
  return out;
}

LossChannel parse_channel(Node n) {
  MarkovLossModel random = n.has("random") ? parse_chain(n.child("random")) : MarkovLossModel::never_fail();
  AttackStrategy attack = n.has("attack") ? parse_attack(n.child("attack")) : AttackStrategy{NoAttack{}};
  const std::string dep = n.string_or("dependence", "independent");
  Dependence d = Dependence::independent;
  if (dep == "independent") {
    d = Dependence::independent;
  } else if (dep == "attacker_observes_random") {
    d = Dependence::attacker_observes_random;
  } else {
    bad(n.path("dependence"), "expected 'independent' or 'attacker_observes_random'");
  }
  n.finish();
  try {
    return LossChannel(std::move(random), std::move(attack), d);
  } catch (const ConfigError& e) {
    throw ConfigError(n.where() + ": " + e.what());
  }
}

ControllerSource parse_controller(Node& n) {
  if (n.has("design")) {
    Node d = n.child("design");
    DesignRequest req;
    req.rho = d.number("rho");
    req.delta = d.number_or("delta", 0.01);
    if (const json* g = d.find("beta_grid")) req.beta_grid = parse_numbers(*g, d.path("beta_grid"));
    d.finish();
    return req;
  }
  if (n.has("Q") || n.has("M")) {
    return LmiGain{parse_matrix(n.at("Q"), n.path("Q")), parse_matrix(n.at("M"), n.path("M")), n.number("beta")};
  }
  return ExplicitGain{parse_matrix(n.at("K"), n.path("K")), parse_matrix(n.at("P"), n.path("P")), n.number("beta")};
}

Series parse_series(const std::string& s, const std::string& where) {
  if (s == "state_norm") return Series::state_norm;
  if (s == "ln_v") return Series::ln_v;
  if (s == "loss_ratio") return Series::loss_ratio;
  if (s == "trigger_gaps") return Series::trigger_gaps;
  bad(where, "unknown output '" + s + "'");
}

json parse_text(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace

ExperimentSpec parse_experiment(std::string_view text) {
  const json root = parse_text(text, "experiment");
  try {
    Node n(root, "experiment");
    ExperimentSpec spec;
    spec.name = n.string_or("name", "experiment");

    Node plant = n.child("plant");
    spec.plant = PlantModel(parse_matrix(plant.at("A"), plant.path("A")), parse_matrix(plant.at("B"), plant.path("B")));
    plant.finish();

    Node ctrl = n.child("controller");
    spec.controller = parse_controller(ctrl);
    spec.theta = ctrl.count_or("theta", 1);
    if (spec.theta < 1) bad(ctrl.path("theta"), "theta must be >= 1");
    ctrl.finish();

    if (n.has("certificates")) {
      Node c = n.child("certificates");
      if (c.has("stability")) {
        Node s = c.child("stability");
        spec.stability = StabilityRequest{s.number("phi"), s.number("rho")};
        s.finish();
      }
      if (c.has("instability")) {
        Node s = c.child("instability");
        spec.instability = InstabilityRequest{parse_matrix(s.at("P_hat"), s.path("P_hat")), s.number("beta_hat"),
                                              s.number("phi_hat"), s.number("sigma")};
        s.finish();
      }
      c.finish();
    }

    if (n.has("channel")) spec.channel = parse_channel(n.child("channel"));

    Node sim = n.child("sim");
    spec.sim.x0 = Vec(parse_numbers(sim.at("x0"), sim.path("x0")));
    spec.sim.horizon = sim.count_or("horizon", 500);
    spec.sim.diverge_threshold = sim.number_or("diverge_threshold", 1e9);
    spec.sim.converge_threshold = sim.number_or("converge_threshold", 1e-9);
    spec.sim.seed = sim.count_or("seed", 0);
    spec.sim.trace_attempts = sim.count_or("trace_attempts", 0);
    sim.finish();
    validate(spec.sim, spec.plant);

    spec.paths = n.count_or("paths", 1);
    if (spec.paths < 1) bad(n.path("paths"), "paths must be >= 1");

    const json& outs = n.at("outputs");
    if (!outs.is_array() || outs.empty()) bad(n.path("outputs"), "expected a non-empty array of output names");
    for (std::size_t j = 0; j < outs.size(); ++j) {
      const std::string where = n.path("outputs") + "[" + std::to_string(j) + "]";
      if (!outs[j].is_string()) bad(where, "expected a string");
      const std::string name = outs[j].get<std::string>();
      if (name == "certificates") {
        spec.want_certificates = true;
        continue;
      }
      const Series s = parse_series(name, where);
      if (std::find(spec.series.begin(), spec.series.end(), s) == spec.series.end()) spec.series.push_back(s);
    }
    n.finish();

    if (std::holds_alternative<StateThreshold>(spec.channel.attack()) && spec.sim.trace_attempts > 0) {
      throw ConfigError("experiment.sim.trace_attempts: not available with a state-threshold attacker");
    }
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment: ") + e.what());
  }
}

ExperimentSpec load_experiment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read experiment file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p.text;
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

ExperimentSpec load_experiment_ref(const std::string& ref) {
  constexpr std::string_view prefix = "preset:";
  if (ref.starts_with(prefix)) return parse_experiment(preset_text(std::string_view(ref).substr(prefix.size())));
  return load_experiment(ref);
}

MarkovLossModel parse_chain_json(std::string_view text) {
  const json root = parse_text(text, "chain");
  try {
    return parse_chain(Node(root, "chain"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("chain: ") + e.what());
  }
}

OracleSpec parse_oracle(std::string_view text) {
  const json root = parse_text(text, "oracle");
  try {
    Node n(root, "oracle");
    OracleSpec spec;
    spec.chain = parse_chain(n.child("chain"));
    spec.rho = n.number("rho");
    spec.p_tilde = n.number_or("p_tilde", spec.chain.p1_bound());
    const std::uint64_t k = n.count_or("k_max", 20);
    if (k < 1 || k > 20) bad(n.path("k_max"), "k_max must lie in [1, 20]");
    spec.k_max = static_cast<unsigned>(k);
    n.finish();
    validate(TailBoundSpec{spec.rho, spec.p_tilde, 1.0});
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("oracle: ") + e.what());
  }
}

std::vector<OracleRow> run_oracle(const OracleSpec& spec) {
  const TailBoundSpec bound{spec.rho, spec.p_tilde, 1.0};
  const auto dist = exact_count_distributions(spec.chain, spec.k_max);
  std::vector<OracleRow> rows;
  for (unsigned k = 1; k <= spec.k_max; ++k) {
    OracleRow r;
    r.k = k;
    r.exact = tail_probability(dist[k], spec.rho);
    r.bound = psi_k(bound, 0.0, k);
    r.sound = r.exact <= r.bound + 1e-12;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- running

CertificateReport certify(const ExperimentSpec& spec) {
  CertificateReport rep;
  if (const auto* e = std::get_if<ExplicitGain>(&spec.controller)) {
    rep.k = e->k;
    rep.p = e->p;
    rep.beta = e->beta;
  } else if (const auto* l = std::get_if<LmiGain>(&spec.controller)) {
    const GainPair g = gain_from_qm(l->q, l->m);
    rep.k = g.k;
    rep.p = g.p;
    rep.beta = l->beta;
  } else {
    const auto& d = std::get<DesignRequest>(spec.controller);
    DesignResult res = d.beta_grid.empty() ? design_gain(spec.plant, d.rho, d.delta)
                                           : design_gain(spec.plant, d.rho, d.delta, d.beta_grid);
    rep.k = res.k;
    rep.p = res.p;
    rep.beta = res.beta;
    rep.design = std::move(res);
  }

  if (spec.stability) {
    rep.stability = check_stability(spec.plant, rep.k, rep.p, rep.beta, spec.stability->phi, spec.stability->rho);
  } else if (rep.design) {
    rep.stability = rep.design->certificate;
  }
  if (spec.instability) {
    const auto& r = *spec.instability;
    rep.instability = check_instability(spec.plant, rep.k, r.p_hat, r.beta_hat, r.phi_hat, r.sigma, spec.theta);
  }
  if (const auto* l = std::get_if<LmiGain>(&spec.controller); l && spec.stability) {
    rep.lmi = lmi_pair_margins(l->q, l->m, spec.plant, l->beta, spec.stability->phi);
  } else if (rep.design) {
    rep.lmi = lmi_pair_margins(rep.design->q, rep.design->m, spec.plant, rep.design->beta, rep.design->phi);
  }
  return rep;
}

namespace {

std::vector<double> extract(const SimResult& r, Series s) {
  std::vector<double> out;
  switch (s) {
    case Series::state_norm:
      out.reserve(r.states.size());
      for (const Vec& x : r.states) out.push_back(x.norm());
      break;
    case Series::ln_v:
      out.reserve(r.v_trace.size());
      for (double v : r.v_trace) out.push_back(std::log(v));
      break;
    case Series::loss_ratio:
      out = r.ratio_series;
      break;
    case Series::trigger_gaps:
      for (std::size_t i = 1; i < r.trigger_times.size(); ++i) {
        out.push_back(static_cast<double>(r.trigger_times[i] - r.trigger_times[i - 1]));
      }
      break;
  }
  return out;
}

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

SeriesStats aggregate(const std::vector<std::vector<double>>& per_path) {
  std::size_t len = 0;
  for (const auto& p : per_path) len = std::max(len, p.size());
  SeriesStats st;
  st.min.resize(len);
  st.median.resize(len);
  st.max.resize(len);
  std::vector<double> column;
  for (std::size_t t = 0; t < len; ++t) {
    column.clear();
    for (const auto& p : per_path) {
      if (t < p.size() && !std::isnan(p[t])) column.push_back(p[t]);
    }
    if (column.empty()) {
      st.min[t] = st.median[t] = st.max[t] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    st.min[t] = *lo;
    st.max[t] = *hi;
    st.median[t] = median_of(column);
  }
  return st;
}

}  // namespace

BatchResult run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides) {
  BatchResult out;
  out.name = spec.name;
  out.want_certificates = spec.want_certificates;
  out.certificates = certify(spec);
  const TriggerController ctrl(out.certificates.k, out.certificates.p, out.certificates.beta, spec.theta);
  check_compatible(spec.plant, ctrl);

  const std::uint64_t paths = overrides.paths.value_or(spec.paths);
  if (paths < 1) throw ValidationError("paths must be >= 1");
  const std::uint64_t base_seed = overrides.seed.value_or(spec.sim.seed);

  out.summaries.resize(paths);
  for (Series s : spec.series) out.series[s].resize(paths);

  parallel_for(paths, [&](std::size_t p) {
    SimConfig cfg = spec.sim;
    cfg.seed = path_seed(base_seed, p);
    const SimResult r = simulate(spec.plant, ctrl, spec.channel, cfg);
    PathSummary& s = out.summaries[p];
    s.path = p;
    s.seed = cfg.seed;
    s.verdict = r.verdict;
    s.final_time = r.final_time();
    s.final_norm = r.states.back().norm();
    s.final_ln_v = std::log(r.v_trace.back());
    s.attempts = r.loss.size();
    s.final_ratio = r.ratio_series.empty() ? std::numeric_limits<double>::quiet_NaN() : r.ratio_series.back();
    for (Series ser : spec.series) out.series[ser][p] = extract(r, ser);
  });

  for (const auto& [s, per_path] : out.series) out.aggregates[s] = aggregate(per_path);
  return out;
}

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json stability_json(const StabilityCertificate& c) {
  return json{{"contraction_margin", num(c.contraction_margin)}, {"growth_margin", num(c.growth_margin)},
              {"exponent", num(c.exponent)},   {"nu", num(c.nu)},
              {"tol", num(c.tol)},                     {"pass", c.pass}};
}

json instability_json(const InstabilityCertificate& c) {
  return json{{"expansion_margin", num(c.expansion_margin)}, {"open_loop_margin", num(c.open_loop_margin)},
              {"exponent", num(c.exponent)},   {"tol", num(c.tol)},
              {"pass", c.pass},                        {"theta_warning", c.theta_warning}};
}

json lmi_json(const LmiReport& r) {
  return json{{"q_min", num(r.q_min)},
              {"contraction_min", num(r.contraction_min)},
              {"growth_min", num(r.growth_min)},
              {"feasible", r.feasible}};
}

json design_json(const DesignResult& d) {
  return json{{"K", mat_json(d.k)},        {"P", mat_json(d.p)},   {"beta", num(d.beta)},
              {"phi", num(d.phi)},         {"phi_min", num(d.phi_min)}, {"Q", mat_json(d.q)},
              {"M", mat_json(d.m)},        {"certificate", stability_json(d.certificate)}};
}

json report_json(const CertificateReport& r) {
  json j = {{"K", mat_json(r.k)}, {"P", mat_json(r.p)}, {"beta", num(r.beta)}};
  if (r.stability) j["stability"] = stability_json(*r.stability);
  if (r.instability) j["instability"] = instability_json(*r.instability);
  if (r.lmi) j["lmi"] = lmi_json(*r.lmi);
  if (r.design) j["design"] = design_json(*r.design);
  return j;
}

json summary_json(const PathSummary& s) {
  return json{{"path", s.path},
              {"seed", s.seed},
              {"verdict", std::string(to_string(s.verdict))},
              {"final_time", s.final_time},
              {"final_norm", num(s.final_norm)},
              {"final_ln_v", num(s.final_ln_v)},
              {"attempts", s.attempts},
              {"final_ratio", num(s.final_ratio)}};
}

json batch_json(const BatchResult& r) {
  json j;
  j["name"] = r.name;
  j["summary"] = json::array();
  for (const auto& s : r.summaries) j["summary"].push_back(summary_json(s));
  j["series"] = json::object();
  for (const auto& [s, per_path] : r.series) {
    json paths = json::array();
    for (const auto& values : per_path) {
      json col = json::array();
      for (double v : values) col.push_back(num(v));
      paths.push_back(col);
    }
    const SeriesStats& st = r.aggregates.at(s);
    json stats = json::object();
    for (const auto& [key, vec] : {std::pair{"min", &st.min}, std::pair{"median", &st.median}, std::pair{"max", &st.max}}) {
      json col = json::array();
      for (double v : *vec) col.push_back(num(v));
      stats[key] = col;
    }
    j["series"][std::string(to_string(s))] = json{{"paths", paths}, {"stats", stats}};
  }
  if (r.want_certificates) j["certificates"] = report_json(r.certificates);
  return j;
}

void write_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + file.string());
}

std::string series_csv(const std::vector<std::vector<double>>& per_path) {
  std::ostringstream os;
  os << "t";
  for (std::size_t p = 0; p < per_path.size(); ++p) os << ",path_" << p;
  os << "\n";
  std::size_t len = 0;
  for (const auto& v : per_path) len = std::max(len, v.size());
  for (std::size_t t = 0; t < len; ++t) {
    os << t;
    for (const auto& v : per_path) {
      os << ",";
      if (t < v.size()) os << format_double(v[t]);
    }
    os << "\n";
  }
  return os.str();
}

std::string stats_csv(const SeriesStats& st) {
  std::ostringstream os;
  os << "t,min,median,max\n";
  for (std::size_t t = 0; t < st.min.size(); ++t) {
    os << t << "," << format_double(st.min[t]) << "," << format_double(st.median[t]) << ","
       << format_double(st.max[t]) << "\n";
  }
  return os.str();
}

std::string summary_csv(const BatchResult& r) {
  std::ostringstream os;
  os << "path,seed,verdict,final_time,final_norm,final_ln_v,attempts,final_ratio\n";
  for (const auto& s : r.summaries) {
    os << s.path << "," << s.seed << "," << to_string(s.verdict) << "," << s.final_time << ","
       << format_double(s.final_norm) << "," << format_double(s.final_ln_v) << "," << s.attempts << ","
       << format_double(s.final_ratio) << "\n";
  }
  return os.str();
}

std::string certificates_csv(const CertificateReport& r) {
  std::ostringstream os;
  os << "name,value\n";
  auto row = [&os](const std::string& name, double v) { os << name << "," << format_double(v) << "\n"; };
  auto flag = [&os](const std::string& name, bool v) { os << name << "," << (v ? 1 : 0) << "\n"; };
  for (std::size_t i = 0; i < r.k.rows(); ++i)
    for (std::size_t j = 0; j < r.k.cols(); ++j) row("K[" + std::to_string(i) + "][" + std::to_string(j) + "]", r.k(i, j));
  row("beta", r.beta);
  if (r.stability) {
    row("stability.contraction_margin", r.stability->contraction_margin);
    row("stability.growth_margin", r.stability->growth_margin);
    row("stability.exponent", r.stability->exponent);
    row("stability.nu", r.stability->nu);
    flag("stability.pass", r.stability->pass);
  }
  if (r.instability) {
    row("instability.expansion_margin", r.instability->expansion_margin);
    row("instability.open_loop_margin", r.instability->open_loop_margin);
    row("instability.exponent", r.instability->exponent);
    flag("instability.pass", r.instability->pass);
    flag("instability.theta_warning", r.instability->theta_warning);
  }
  if (r.lmi) {
    row("lmi.q_min", r.lmi->q_min);
    row("lmi.contraction_min", r.lmi->contraction_min);
    row("lmi.growth_min", r.lmi->growth_min);
    flag("lmi.feasible", r.lmi->feasible);
  }
  if (r.design) {
    row("design.beta", r.design->beta);
    row("design.phi", r.design->phi);
    row("design.phi_min", r.design->phi_min);
  }
  return os.str();
}

}  // namespace

std::string to_json(const BatchResult& result, int indent) { return batch_json(result).dump(indent); }
std::string to_json(const CertificateReport& report, int indent) { return report_json(report).dump(indent); }
std::string to_json(const DesignResult& design, int indent) { return design_json(design).dump(indent); }

void emit(const BatchResult& result, OutputFormat format, const std::filesystem::path& dest) {
  std::error_code ec;
  std::filesystem::create_directories(dest, ec);
  if (ec || !std::filesystem::is_directory(dest)) throw IoError("cannot create output directory " + dest.string());
  if (format == OutputFormat::json) {
    write_file(dest / "result.json", to_json(result, 1) + "\n");
    return;
  }
  for (const auto& [s, per_path] : result.series) {
    const std::string base(to_string(s));
    write_file(dest / (base + ".csv"), series_csv(per_path));
    write_file(dest / (base + "_stats.csv"), stats_csv(result.aggregates.at(s)));
  }
  write_file(dest / "summary.csv", summary_csv(result));
  if (result.want_certificates) write_file(dest / "certificates.csv", certificates_csv(result.certificates));
}

}  // namespace netloss
