#include "mfpo/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace mfpo {
namespace harness {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": key '" + key +
                     "': not a number: " + v);
  }
}

long parse_int(const std::string& v, const std::string& key, int line) {
  const double x = parse_double(v, key, line);
  if (x != std::floor(x))
    throw ParseError("line " + std::to_string(line) + ": key '" + key +
                     "': not an integer: " + v);
  return static_cast<long>(x);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string base =
      slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  if (dot != std::string::npos) base = base.substr(0, dot);
  return base;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void RunConfig::validate() const {
  if (algorithm != "mfpo" && algorithm != "fedpg")
    throw ParseError("unknown algorithm: " + algorithm);
  if (env != "cartpole" && env != "pendulum" && env != "chain")
    throw ParseError("unknown environment: " + env);
  if (hidden < 1) throw ParseError("hidden must be positive");
  if (eval_episodes < 1) throw ParseError("eval_episodes must be positive");
  for (int n : sweep_agents)
    if (n < 1) throw ParseError("sweep agent counts must be positive");
  try {
    hp.validate();
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid hyperparameters: ") + e.what());
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  PracticalSchedule practical;
  TheorySchedule theory;
  bool use_theory = false;
  bool theory_explicit_constants = false;
  double sigma_g = 1.0, L_tilde = 1.0;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ParseError("line " + std::to_string(lineno) +
                       ": empty key or value");

    if (key == "algorithm") cfg.algorithm = val;
    else if (key == "env") cfg.env = val;
    else if (key == "hidden") cfg.hidden = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, key, lineno));
    else if (key == "agents") cfg.hp.N = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "local_steps") cfg.hp.K = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "batch") cfg.hp.D = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "init_batch") cfg.hp.D_tilde = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "steps") cfg.hp.T = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "gamma") cfg.hp.estimator.gamma = parse_double(val, key, lineno);
    else if (key == "estimator") {
      if (val == "reinforce") cfg.hp.estimator.kind = estimators::Kind::Reinforce;
      else if (val == "gpomdp") cfg.hp.estimator.kind = estimators::Kind::Gpomdp;
      else throw ParseError("line " + std::to_string(lineno) + ": unknown estimator: " + val);
    } else if (key == "baseline") {
      if (val == "zero") cfg.hp.estimator.baseline_mode = estimators::BaselineMode::Zero;
      else if (val == "running_mean") cfg.hp.estimator.baseline_mode = estimators::BaselineMode::RunningMean;
      else throw ParseError("line " + std::to_string(lineno) + ": unknown baseline: " + val);
    } else if (key == "baseline_decay") cfg.hp.estimator.baseline_decay = parse_double(val, key, lineno);
    else if (key == "weight_clip") cfg.hp.estimator.weight_clip = parse_double(val, key, lineno);
    else if (key == "schedule") {
      if (val == "practical") use_theory = false;
      else if (val == "theory") use_theory = true;
      else throw ParseError("line " + std::to_string(lineno) + ": unknown schedule: " + val);
    } else if (key == "alpha0") practical.alpha0 = parse_double(val, key, lineno);
    else if (key == "decay") practical.decay = parse_double(val, key, lineno);
    else if (key == "momentum_coeff") practical.momentum_coeff = parse_double(val, key, lineno);
    else if (key == "decay_interval") practical.decay_interval = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "sigma_g") sigma_g = parse_double(val, key, lineno);
    else if (key == "L_tilde") L_tilde = parse_double(val, key, lineno);
    else if (key == "c_alpha") { theory.c_alpha = parse_double(val, key, lineno); theory_explicit_constants = true; }
    else if (key == "c_nu") { theory.c_nu = parse_double(val, key, lineno); theory_explicit_constants = true; }
    else if (key == "eval_episodes") cfg.eval_episodes = static_cast<int>(parse_int(val, key, lineno));
    else if (key == "out") cfg.out = val;
    else if (key == "stop_at_return") cfg.stop_at_return = parse_double(val, key, lineno);
    else if (key == "sweep_agents") {
      std::istringstream list(val);
      std::string item;
      while (std::getline(list, item, ','))
        cfg.sweep_agents.push_back(static_cast<int>(parse_int(trim(item), key, lineno)));
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key: " + key);
    }
  }

  if (use_theory) {
    if (theory_explicit_constants) {
      theory.sigma_g = sigma_g;
      theory.L_tilde = L_tilde;
      theory.K = cfg.hp.K;
      theory.D = cfg.hp.D;
      theory.N = cfg.hp.N;
    } else {
      theory = TheorySchedule::with_defaults(sigma_g, L_tilde, cfg.hp.K,
                                             cfg.hp.D, cfg.hp.N);
    }
    cfg.hp.schedule = theory;
  } else {
    cfg.hp.schedule = practical;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

policy::PolicyArch arch_for(const RunConfig& cfg) {
  if (cfg.env == "cartpole")
    return policy::PolicyArch::categorical(4, cfg.hidden, 2);
  if (cfg.env == "pendulum")
    return policy::PolicyArch::tanh_gaussian(3, cfg.hidden, 1);
  const TabularMDP mdp =
      TabularMDP::random_chain(RngStream::derive(0, {kEnvTag}));
  return policy::PolicyArch::categorical(mdp.n_states, cfg.hidden,
                                         mdp.n_actions);
}

algorithm::TrainResult execute(const RunConfig& cfg, int agents_override) {
  RunConfig c = cfg;
  if (agents_override > 0) c.hp.N = agents_override;
  c.validate();

  const policy::PolicyArch arch = arch_for(c);
  algorithm::EnvFactory factory = [&c]() { return make_environment(c.env); };

  algorithm::TrainOptions opts;
  opts.eval_episodes = c.eval_episodes;
  opts.stop_at_return = c.stop_at_return;
  TabularMDP chain_mdp;
  if (c.env == "chain") {
    chain_mdp = TabularMDP::random_chain(RngStream::derive(0, {kEnvTag}));
    opts.oracle_mdp = &chain_mdp;
  }

  if (c.algorithm == "mfpo")
    return algorithm::run_training(c.hp, arch, factory, c.seed, opts);

  fedavg_pg::FedPgParams fp;
  fp.N = c.hp.N;
  fp.K = c.hp.K;
  fp.D = c.hp.D;
  fp.T = c.hp.T;
  fp.estimator = c.hp.estimator;
  if (const auto* p = std::get_if<PracticalSchedule>(&c.hp.schedule))
    fp.schedule = *p;
  else
    throw ParseError("fedpg supports the practical schedule only");
  return fedavg_pg::run_training(fp, arch, factory, c.seed, opts);
}

void write_csv(const std::string& path, const MetricsTable& metrics) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "round,step,env_interactions,comm_rounds,eval_return_mean,"
         "eval_return_std,grad_norm_sq,wall_ms\n";
  for (const auto& r : metrics) {
    out << r.round << ',' << r.step << ',' << r.env_interactions << ','
        << r.comm_rounds << ',' << fmt(r.eval_return_mean) << ','
        << fmt(r.eval_return_std) << ','
        << (r.grad_norm_sq ? fmt(*r.grad_norm_sq) : std::string()) << ','
        << r.wall_ms << '\n';
  }
}

MetricsTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty metrics file: " + path);
  MetricsTable table;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    while (cols.size() < 8) cols.push_back("");
    MetricsRecord r;
    r.round = std::stoi(cols[0]);
    r.step = std::stoi(cols[1]);
    r.env_interactions = std::stoll(cols[2]);
    r.comm_rounds = std::stoi(cols[3]);
    r.eval_return_mean = std::stod(cols[4]);
    r.eval_return_std = std::stod(cols[5]);
    if (!cols[6].empty()) r.grad_norm_sq = std::stod(cols[6]);
    if (!cols[7].empty()) r.wall_ms = std::stoll(cols[7]);
    table.push_back(r);
  }
  return table;
}

std::string csv_body_without_wall(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open metrics file: " + path);
  std::string line, body;
  while (std::getline(in, line)) {
    const auto comma = line.find_last_of(',');
    body += line.substr(0, comma);
    body += '\n';
  }
  return body;
}

std::vector<std::string> run(const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::string> written;

  std::vector<int> agent_counts = cfg.sweep_agents;
  if (agent_counts.empty()) agent_counts.push_back(0);

  for (int n : agent_counts) {
    std::string out_path = cfg.out;
    if (n > 0) {
      const auto dot = out_path.find_last_of('.');
      const std::string suffix = "_N" + std::to_string(n);
      out_path = dot == std::string::npos
                     ? out_path + suffix
                     : out_path.substr(0, dot) + suffix + out_path.substr(dot);
    }
    const auto result = execute(cfg, n);
    write_csv(out_path, result.metrics);
    written.push_back(out_path);

    const auto& last = result.metrics.empty() ? MetricsRecord{}
                                              : result.metrics.back();
    std::printf(
        "%s env=%s N=%d seed=%llu: final_return=%.2f rounds=%d "
        "interactions=%lld -> %s\n",
        cfg.algorithm.c_str(), cfg.env.c_str(), n > 0 ? n : cfg.hp.N,
        static_cast<unsigned long long>(cfg.seed), last.eval_return_mean,
        last.comm_rounds, static_cast<long long>(last.env_interactions),
        out_path.c_str());
  }
  return written;
}

CompareReport compare_report(const std::vector<std::string>& csv_paths,
                             double threshold_return) {
  if (csv_paths.empty()) throw ParseError("no metric files given");
  CompareReport report;
  static const std::regex seed_re("(_?seed[0-9]+|_s[0-9]+)");

  for (const auto& path : csv_paths) {
    RunReport rr;
    rr.path = path;
    rr.group = std::regex_replace(basename_of(path), seed_re, "");
    for (const auto& row : read_csv(path)) {
      if (row.eval_return_mean >= threshold_return) {
        rr.reached = true;
        rr.rounds_to_threshold = row.comm_rounds;
        rr.interactions_to_threshold = row.env_interactions;
        break;
      }
    }
    report.runs.push_back(std::move(rr));
  }

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const RunReport*>> by_group;
  for (const auto& rr : report.runs) {
    if (!by_group.count(rr.group)) group_order.push_back(rr.group);
    by_group[rr.group].push_back(&rr);
  }
  for (const auto& g : group_order) {
    GroupReport gr;
    gr.group = g;
    std::vector<double> rounds, inter;
    for (const auto* rr : by_group[g]) {
      ++gr.runs;
      if (rr->reached) {
        ++gr.reached;
        rounds.push_back(rr->rounds_to_threshold);
        inter.push_back(static_cast<double>(rr->interactions_to_threshold));
      }
    }
    if (!rounds.empty()) {
      gr.median_rounds = median(rounds);
      gr.median_interactions = median(inter);
    }
    report.groups.push_back(gr);
  }
  for (const auto& gr : report.groups) {
    const auto& first = report.groups.front();
    report.speedup_vs_first.push_back(
        first.median_interactions > 0.0 && gr.median_interactions > 0.0
            ? gr.median_interactions / first.median_interactions
            : 0.0);
  }
  return report;
}

std::string format_report(const CompareReport& report, double threshold) {
  std::ostringstream out;
  out << "threshold return: " << threshold << "\n";
  for (const auto& rr : report.runs) {
    out << "  " << rr.path << ": ";
    if (rr.reached)
      out << "rounds=" << rr.rounds_to_threshold
          << " interactions=" << rr.interactions_to_threshold << "\n";
    else
      out << "threshold never reached\n";
  }
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    const auto& gr = report.groups[i];
    out << "group " << gr.group << ": reached " << gr.reached << "/"
        << gr.runs;
    if (gr.reached > 0)
      out << " median_rounds=" << gr.median_rounds
          << " median_interactions=" << gr.median_interactions
          << " interactions_vs_first=" << report.speedup_vs_first[i];
    out << "\n";
  }
  return out.str();
}

}  // namespace harness
}  // namespace mfpo
