#include "subexp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "subexp/errors.hpp"

namespace subexp {
namespace {

template <typename T>
T get(const YAML::Node& node, const char* key, const T& fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

VectorXd as_vector(const YAML::Node& node, const char* what) {
  if (!node.IsSequence()) throw ConfigError(std::string(what) + " must be a list of numbers");
  VectorXd v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    try {
      v(static_cast<Index>(i)) = node[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(std::string(what) + " entries must be numbers");
    }
  }
  return v;
}

MatrixXd as_rows_matrix(const YAML::Node& node, const char* what) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(std::string(what) + " must be a non-empty list of rows");
  const VectorXd first = as_vector(node[0], what);
  MatrixXd m(static_cast<Index>(node.size()), first.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    const VectorXd r = as_vector(node[i], what);
    if (r.size() != first.size()) throw ConfigError(std::string(what) + " rows differ in length");
    m.row(static_cast<Index>(i)) = r.transpose();
  }
  return m;
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

DistributionSpec parse_distribution(const YAML::Node& n) {
  check_keys(n, {"kind", "dimension", "scale", "base", "mixing", "seed_domain"}, "distribution");
  DistributionSpec s;
  s.kind = parse_distribution_kind(get<std::string>(n, "kind", "gaussian"));
  s.seed_domain = get<std::string>(n, "seed_domain", "inputs");
  if (s.kind == DistributionKind::mixed) {
    s.base_kind = parse_distribution_kind(get<std::string>(n, "base", "laplace"));
    if (!n["mixing"]) throw ConfigError("mixed distribution needs a mixing matrix");
    s.mixing = as_rows_matrix(n["mixing"], "mixing");
    s.dimension = s.mixing->rows();
    if (n["dimension"] && get<long>(n, "dimension", 0) != s.dimension) {
      throw ConfigError("dimension disagrees with mixing matrix rows");
    }
    s.scale = get<double>(n, "scale", unit_variance_scale(s.base_kind));
  } else {
    s.dimension = get<long>(n, "dimension", 0);
    s.scale = get<double>(n, "scale", unit_variance_scale(s.kind));
  }
  s.validate();
  return s;
}

NoiseSpec parse_noise(const YAML::Node& n) {
  if (!n) return NoiseSpec::none();
  if (n.IsScalar()) {
    if (n.as<std::string>() == "none") return NoiseSpec::none();
    throw ConfigError("noise must be 'none' or a mapping");
  }
  check_keys(n, {"kind", "std", "scale"}, "noise");
  const std::string kind = get<std::string>(n, "kind", "none");
  if (kind == "none") return NoiseSpec::none();
  if (kind == "gaussian") return NoiseSpec::gaussian(get<double>(n, "std", 0.0));
  if (kind == "laplace") {
    if (n["scale"]) return NoiseSpec::laplace(get<double>(n, "scale", 0.0));
    return NoiseSpec::laplace_with_std(get<double>(n, "std", 0.0));
  }
  throw ConfigError("unknown noise kind '" + kind + "'");
}

void parse_model(const YAML::Node& n, ExperimentConfig& cfg) {
  check_keys(n, {"kind", "link", "beta0", "noise"}, "model");
  cfg.model.kind = parse_model_kind(get<std::string>(n, "kind", "linear"));
  cfg.model.link = parse_link(get<std::string>(n, "link", "identity"));
  cfg.model.noise = parse_noise(n["noise"]);
  const YAML::Node b = n["beta0"];
  if (!b) throw ConfigError("model.beta0 is required");
  if (b.IsSequence()) {
    cfg.model.beta0 = as_vector(b, "beta0");
  } else {
    check_keys(b, {"sparse", "norm", "values"}, "beta0");
    SparseBeta sb;
    sb.k = get<long>(b, "sparse", 1);
    sb.norm = get<double>(b, "norm", 1.0);
    const std::string values = get<std::string>(b, "values", "gaussian");
    if (values != "gaussian" && values != "equal") throw ConfigError("beta0.values must be gaussian or equal");
    sb.equal_magnitudes = values == "equal";
    cfg.beta0_sparse = sb;
  }
}

SetConfig parse_set(const YAML::Node& n, const std::string& base_dir) {
  check_keys(n, {"kind", "radius", "halfwidth", "center", "vertices", "vertices_file", "tuned_factor"}, "set");
  SetConfig s;
  s.kind = parse_set_kind(get<std::string>(n, "kind", "l1_ball"));
  const char* rkey = s.kind == SetKind::hypercube ? "halfwidth" : "radius";
  const YAML::Node r = n[rkey];
  if (r && r.IsScalar() && r.as<std::string>() == "tuned") {
    s.radius.reset();
  } else if (r) {
    s.radius = get<double>(n, rkey, 1.0);
  } else if (s.kind != SetKind::polytope) {
    throw ConfigError(std::string("set.") + rkey + " is required (number or 'tuned')");
  }
  s.tuned_factor = get<double>(n, "tuned_factor", 1.0);
  if (n["center"]) s.center = as_vector(n["center"], "center");
  if (s.kind == SetKind::polytope) {
    if (n["vertices"]) {
      s.vertices = as_rows_matrix(n["vertices"], "vertices").transpose();
    } else if (n["vertices_file"]) {
      std::filesystem::path p = get<std::string>(n, "vertices_file", "");
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      s.vertices = read_vertex_file(p.string());
    } else {
      throw ConfigError("polytope needs vertices or vertices_file");
    }
  }
  return s;
}

TargetRule parse_target(const YAML::Node& n) {
  TargetRule t;
  if (!n) return t;
  if (n.IsSequence()) {
    t.kind = TargetRuleKind::explicit_vector;
    t.value = as_vector(n, "target");
    return t;
  }
  if (n.IsScalar()) {
    const std::string k = n.as<std::string>();
    if (k == "beta0") t.kind = TargetRuleKind::beta0;
    else if (k == "mu_beta0") t.kind = TargetRuleKind::mu_beta0;
    else if (k == "erm_mc") t.kind = TargetRuleKind::erm_mc;
    else throw ConfigError("unknown target rule '" + k + "'");
    return t;
  }
  check_keys(n, {"rule", "mc_budget", "value"}, "target");
  TargetRule inner = parse_target(n["value"] ? n["value"] : n["rule"]);
  inner.mc_budget = get<std::size_t>(n, "mc_budget", inner.mc_budget);
  return inner;
}

SolverConfig parse_solver(const YAML::Node& n) {
  SolverConfig s;
  if (!n) return s;
  check_keys(n, {"max_iters", "tol", "step", "backtrack_beta", "backtrack_c", "restarts", "trace"}, "solver");
  s.max_iters = get<int>(n, "max_iters", s.max_iters);
  s.tol = get<double>(n, "tol", s.tol);
  s.step_rule = parse_step_rule(get<std::string>(n, "step", "fixed_inverse_lipschitz"));
  s.backtrack_beta = get<double>(n, "backtrack_beta", s.backtrack_beta);
  s.backtrack_c = get<double>(n, "backtrack_c", s.backtrack_c);
  s.restart_count = get<int>(n, "restarts", s.restart_count);
  s.record_trace = get<bool>(n, "trace", false);
  s.validate();
  return s;
}

void parse_experiment(const YAML::Node& n, ExperimentConfig& cfg) {
  if (!n) return;
  check_keys(n, {"n_grid", "trials", "estimator"}, "experiment");
  if (n["n_grid"]) {
    const VectorXd g = as_vector(n["n_grid"], "n_grid");
    cfg.n_grid.clear();
    for (Index i = 0; i < g.size(); ++i) cfg.n_grid.push_back(static_cast<Index>(g(i)));
  }
  cfg.trials_per_n = get<int>(n, "trials", cfg.trials_per_n);
  const std::string est = get<std::string>(n, "estimator", "lasso");
  if (est == "lasso") cfg.estimator = Estimator::lasso;
  else if (est == "lifted") cfg.estimator = Estimator::lifted;
  else throw ConfigError("unknown estimator '" + est + "'");
}

void parse_defaults(const YAML::Node& n, CommandDefaults& d) {
  if (!n) return;
  check_keys(n, {"n", "t", "n_dirs", "mc_budget", "width_trials", "u"}, "commands");
  d.n = get<long>(n, "n", d.n);
  d.t = get<double>(n, "t", d.t);
  d.n_dirs = get<std::size_t>(n, "n_dirs", d.n_dirs);
  d.mc_budget = get<std::size_t>(n, "mc_budget", d.mc_budget);
  d.width_trials = get<std::size_t>(n, "width_trials", d.width_trials);
  d.u = get<double>(n, "u", d.u);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  check_keys(root, {"name", "seed", "distribution", "model", "set", "target", "solver", "experiment", "outputs",
                    "commands"},
             "config");
  ExperimentConfig cfg;
  cfg.name = get<std::string>(root, "name", "experiment");
  cfg.master_seed = get<std::uint64_t>(root, "seed", 0);
  if (!root["distribution"]) throw ConfigError("config.distribution is required");
  cfg.spec = parse_distribution(root["distribution"]);
  if (!root["model"]) throw ConfigError("config.model is required");
  parse_model(root["model"], cfg);
  if (!root["set"]) throw ConfigError("config.set is required");
  cfg.set = parse_set(root["set"], base_dir);
  cfg.target = parse_target(root["target"]);
  cfg.solver = parse_solver(root["solver"]);
  parse_experiment(root["experiment"], cfg);
  if (root["outputs"]) {
    check_keys(root["outputs"], {"results"}, "outputs");
    cfg.results_path = get<std::string>(root["outputs"], "results", "");
  }
  parse_defaults(root["commands"], cfg.defaults);
  ExperimentConfig probe = cfg;
  materialize_beta0(probe);
  probe.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

YAML::Node vector_node(const VectorXd& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (Index i = 0; i < v.size(); ++i) n.push_back(v(i));
  return n;
}

YAML::Node rows_node(const MatrixXd& m) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (Index i = 0; i < m.rows(); ++i) n.push_back(vector_node(m.row(i).transpose()));
  return n;
}

}  // namespace

std::string canonical_config_text(const ExperimentConfig& cfg) {
  YAML::Node root;
  root["name"] = cfg.name;
  root["seed"] = cfg.master_seed;
  YAML::Node d;
  d["kind"] = to_string(cfg.spec.kind);
  d["dimension"] = cfg.spec.dimension;
  d["scale"] = cfg.spec.scale;
  d["seed_domain"] = cfg.spec.seed_domain;
  if (cfg.spec.kind == DistributionKind::mixed) {
    d["base"] = to_string(cfg.spec.base_kind);
    d["mixing"] = rows_node(*cfg.spec.mixing);
  }
  root["distribution"] = d;
  YAML::Node m;
  m["kind"] = to_string(cfg.model.kind);
  m["link"] = to_string(cfg.model.link);
  if (cfg.beta0_sparse) {
    m["beta0"]["sparse"] = cfg.beta0_sparse->k;
    m["beta0"]["norm"] = cfg.beta0_sparse->norm;
    m["beta0"]["values"] = cfg.beta0_sparse->equal_magnitudes ? "equal" : "gaussian";
  } else {
    m["beta0"] = vector_node(cfg.model.beta0);
  }
  switch (cfg.model.noise.kind) {
    case NoiseSpec::Kind::none: m["noise"]["kind"] = "none"; break;
    case NoiseSpec::Kind::gaussian:
      m["noise"]["kind"] = "gaussian";
      m["noise"]["std"] = cfg.model.noise.param;
      break;
    case NoiseSpec::Kind::laplace:
      m["noise"]["kind"] = "laplace";
      m["noise"]["scale"] = cfg.model.noise.param;
      break;
  }
  root["model"] = m;
  YAML::Node s;
  s["kind"] = to_string(cfg.set.kind);
  const char* rkey = cfg.set.kind == SetKind::hypercube ? "halfwidth" : "radius";
  if (cfg.set.kind != SetKind::polytope) {
    if (cfg.set.radius) s[rkey] = *cfg.set.radius;
    else s[rkey] = "tuned";
  }
  s["tuned_factor"] = cfg.set.tuned_factor;
  if (cfg.set.center.size()) s["center"] = vector_node(cfg.set.center);
  if (cfg.set.kind == SetKind::polytope) s["vertices"] = rows_node(cfg.set.vertices.transpose());
  root["set"] = s;
  YAML::Node t;
  if (cfg.target.kind == TargetRuleKind::explicit_vector) {
    t["value"] = vector_node(cfg.target.value);
  } else {
    t["rule"] = to_string(cfg.target.kind);
  }
  t["mc_budget"] = cfg.target.mc_budget;
  root["target"] = t;
  YAML::Node so;
  so["max_iters"] = cfg.solver.max_iters;
  so["tol"] = cfg.solver.tol;
  so["step"] = to_string(cfg.solver.step_rule);
  so["backtrack_beta"] = cfg.solver.backtrack_beta;
  so["backtrack_c"] = cfg.solver.backtrack_c;
  so["restarts"] = cfg.solver.restart_count;
  root["solver"] = so;
  YAML::Node e;
  YAML::Node grid(YAML::NodeType::Sequence);
  for (Index n : cfg.n_grid) grid.push_back(n);
  e["n_grid"] = grid;
  e["trials"] = cfg.trials_per_n;
  e["estimator"] = to_string(cfg.estimator);
  root["experiment"] = e;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return out.c_str();
}

MatrixXd read_vertex_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vertex file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw ConfigError("vertex file '" + path + "' has a non-numeric entry");
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("vertex file rows differ in length");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("vertex file '" + path + "' has no vertices");
  MatrixXd m(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  }
  return m;
}

}  // namespace subexp
