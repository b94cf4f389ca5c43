#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "edr/analysis.hpp"
#include "edr/dynamics.hpp"
#include "edr/exact.hpp"
#include "edr/io.hpp"
#include "edr/nash.hpp"

namespace {

using namespace edr;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

Rat parse_tolerance(const std::string& text) {
  // Accept "1/10000000000", "0.0000000001" and scientific shorthand "1e-10".
  auto epos = text.find_first_of("eE");
  if (epos != std::string::npos) {
    auto mant = parse_rational(text.substr(0, epos));
    int exp = std::stoi(text.substr(epos + 1));
    if (!mant) throw CLI::ValidationError("--tol", "cannot parse tolerance");
    Rat scale = 1;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(exp)));
    if (exp >= 0)
      scale = Rat(p10);
    else
      scale = Rat(mpz_class(1), p10);
    return *mant * scale;
  }
  auto r = parse_rational(text);
  if (!r || *r <= 0) throw CLI::ValidationError("--tol", "tolerance must be positive");
  return *r;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file(path, content);
}

int cmd_solve(const std::string& input, const std::string& method, const std::string& tol,
              const std::string& output, int emit_decimals) {
  Profile profile = load_profile(input);
  SolveConfig cfg;
  if (!tol.empty()) cfg.tolerance = parse_tolerance(tol);

  auto start = std::chrono::steady_clock::now();
  EquilibriumResult result;
  if (method == "exact-binary") {
    if (!profile.binary_weights()) {
      std::cerr << "error: --method exact-binary requires binary (0/1) valuations\n";
      return 1;
    }
    result = charity_egalitarian(profile);
    EquilibriumResult cross = conditional_egalitarian(profile);
    for (int x = 0; x < profile.num_charities(); ++x) {
      if (result.distribution.amounts[x] != cross.distribution.amounts[x]) {
        std::cerr << "error: charity-egalitarian and conditional-egalitarian disagree; "
                     "this is a bug\n";
        return 2;
      }
    }
    result.method = "exact-binary";
  } else {
    SolveConfig::Method m;
    if (method == "auto")
      m = SolveConfig::Method::auto_mode;
    else if (method == "dynamics")
      m = SolveConfig::Method::dynamics;
    else if (method == "subgradient")
      m = SolveConfig::Method::subgradient;
    else {
      std::cerr << "error: unknown method '" << method << "'\n";
      return 1;
    }
    cfg.method = m;
    result = solve_equilibrium(profile, cfg);
  }
  double ms = elapsed_ms(start);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  RenderOptions opt;
  opt.emit_decimals = emit_decimals;
  emit(output, result_to_json(profile, result, ms, opt));

  bool verified = result.mode == Mode::exact ? result.residual == 0 : result.converged;
  return verified ? 0 : 2;
}

SequenceSpec parse_sequence(const std::string& text, const Profile& profile,
                            std::uint64_t seed) {
  if (text == "round-robin") return SequenceSpec::round_robin();
  if (text.rfind("random:", 0) == 0) {
    int k = std::stoi(text.substr(7));
    return SequenceSpec::random_with_bound(k, seed);
  }
  if (text.rfind("file:", 0) == 0) {
    std::string body = read_file(text.substr(5));
    std::vector<int> order;
    std::string token;
    for (char c : body) {
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')') {
        if (!token.empty()) {
          int idx = profile.agent_index(token);
          if (idx < 0) idx = std::stoi(token) - 1;  // 1-based agent position
          order.push_back(idx);
          token.clear();
        }
      } else {
        token += c;
      }
    }
    if (!token.empty()) {
      int idx = profile.agent_index(token);
      if (idx < 0) idx = std::stoi(token) - 1;
      order.push_back(idx);
    }
    if (order.empty()) throw std::runtime_error("sequence file lists no agents");
    for (int i : order)
      if (i < 0 || i >= profile.num_agents())
        throw std::runtime_error("sequence file references an unknown agent");
    return SequenceSpec::explicit_list(std::move(order));
  }
  throw std::runtime_error("unknown sequence '" + text + "'");
}

int cmd_dynamics(const std::string& input, const std::string& mode_str,
                 const std::string& sequence, long rounds, const std::string& trace_path,
                 bool use_float, int window, std::uint64_t seed) {
  Profile profile = load_profile(input);
  DynamicsTrace trace;
  if (mode_str == "redistribute") {
    RedistributionOptions opt;
    opt.sequence = parse_sequence(sequence, profile, seed);
    opt.max_rounds = rounds >= 0 ? rounds : 100000;
    if (rounds >= 0) opt.residual_stop = 0;  // explicit round count wins
    opt.mode = use_float ? Mode::floating : Mode::exact;
    trace = run_redistribution(profile, opt);
  } else if (mode_str == "spend") {
    SpendingOptions opt;
    opt.mode = use_float ? Mode::floating : Mode::exact;
    if (window > 0) {
      std::cerr << "warning: observation windows other than n-1 are experimental; "
                   "convergence is only proven for the last n-1 rounds\n";
      opt.window = window;
    }
    if (sequence.rfind("file:", 0) == 0) {
      SequenceSpec s = parse_sequence(sequence, profile, seed);
      std::vector<int> order(s.order.begin(),
                             s.order.begin() + std::min<size_t>(s.order.size(),
                                                               profile.num_agents()));
      opt.order = order;
    }
    long r = rounds >= 0 ? rounds : 100L * profile.num_agents();
    trace = run_spending(profile, r, opt);
  } else {
    std::cerr << "error: unknown dynamics mode '" << mode_str << "'\n";
    return 1;
  }

  std::ostringstream csv;
  write_trace_csv(csv, profile, trace);
  emit(trace_path, csv.str());

  // Distance to the solver's equilibrium for the summary line.
  EquilibriumResult eq = solve_equilibrium(profile);
  double dist = 0.0;
  for (int x = 0; x < profile.num_charities(); ++x)
    dist = std::max(dist, std::abs(to_double(trace.final_distribution.amounts[x] -
                                            eq.distribution.amounts[x])));
  std::cout << "final residual=" << format_double(trace.final_residual)
            << " distance_to_equilibrium=" << format_double(dist) << "\n";
  return 0;
}

int cmd_verify(const std::string& input, const std::string& dist_path, int emit_decimals) {
  Profile profile = load_profile(input);
  Distribution d = load_distribution(dist_path, profile);

  if (d.mode == Mode::exact && d.total() != profile.total_contribution()) {
    std::cerr << "error: distribution sums to " << format_rational(d.total())
              << ", endowment is " << format_rational(profile.total_contribution()) << "\n";
    return 1;
  }
  if (d.mode == Mode::floating &&
      std::abs(to_double(d.total() - profile.total_contribution())) >
          1e-8 * std::max(1.0, to_double(profile.total_contribution()))) {
    std::cerr << "error: distribution sum is off by more than the float tolerance\n";
    return 1;
  }

  EquilibriumCheck check = is_equilibrium(profile, d, d.mode);
  EfficiencyCheck eff = is_efficient(profile, d);
  RenderOptions opt;
  opt.emit_decimals = emit_decimals;

  std::cout << (check.accepted ? "equilibrium: certified" : "equilibrium: refuted") << "\n";
  if (!check.detail.empty()) std::cout << "  " << check.detail << "\n";
  std::cout << "efficient: " << (eff.efficient ? "yes" : "no");
  if (!eff.efficient)
    std::cout << " (witness: " << profile.charities()[eff.witness_charity]
              << " is funded but critical for no agent)";
  std::cout << "\n";

  if (check.accepted) {
    EquilibriumResult eq;
    eq.mode = d.mode;
    eq.distribution = d;
    eq.decomposition = check.certificate;
    eq.residual = 0;
    eq.converged = true;
    eq.utilities.resize(profile.num_agents());
    for (int i = 0; i < profile.num_agents(); ++i)
      eq.utilities[i] = leontief_utility(profile, i, d);
    LindahlPrices prices = lindahl_prices(profile, eq);
    std::cout << "lindahl prices (agent x charity):\n";
    for (int i = 0; i < profile.num_agents(); ++i) {
      std::cout << "  " << profile.agent(i).name << ":";
      for (int x = 0; x < profile.num_charities(); ++x)
        std::cout << " " << profile.charities()[x] << "="
                  << format_amount(prices.prices[i][x], d.mode, opt);
      std::cout << "\n";
    }
    std::cout << "lindahl conditions: budgets "
              << (prices.budgets_exhausted ? "exhausted" : "VIOLATED") << ", column sums "
              << (prices.unit_column_sums ? "unit on funded charities" : "VIOLATED") << "\n";
  }
  return check.accepted ? 0 : 3;
}

int cmd_probe(const std::string& input, const std::string& random_nm,
              const std::string& property, long trials, std::uint64_t seed,
              const std::string& report_path, double p_exponent, long samples) {
  ProbeOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  if (!input.empty()) opts.profile = load_profile(input);
  if (!random_nm.empty()) {
    auto comma = random_nm.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("--random expects n,m");
    opts.random_agents = std::stoi(random_nm.substr(0, comma));
    opts.random_charities = std::stoi(random_nm.substr(comma + 1));
  }

  ProbeReport report;
  if (property == "gsp") {
    report = probe_group_strategyproofness(opts);
  } else if (property == "pref-mono") {
    report = probe_monotonicity(MonotonicityKind::preference, opts);
  } else if (property == "contrib-mono") {
    report = probe_monotonicity(MonotonicityKind::contribution, opts);
  } else if (property == "gwelfare") {
    WelfareSpec w = p_exponent == 0.0 ? WelfareSpec::nash_spec()
                                      : WelfareSpec::power_spec(p_exponent);
    report = probe_gwelfare_decomposable(w, samples, opts);
  } else if (property == "dynamics-potential") {
    report = probe_dynamics_laws(opts);
  } else {
    std::cerr << "error: unknown property '" << property << "'\n";
    return 1;
  }

  emit(report_path, probe_report_to_json(report));
  bool ok = report.expected_counterexample ? report.violations > 0
                                           : report.violations == 0;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equilibrium distribution solver for donor coordination"};
  app.require_subcommand(1);

  std::string input, output, method = "auto", tol, dist_path;
  int emit_decimals = -1;

  auto* solve = app.add_subcommand("solve", "compute the equilibrium distribution");
  solve->add_option("--input", input)->required();
  solve->add_option("--method", method)
      ->check(CLI::IsMember({"auto", "dynamics", "subgradient", "exact-binary"}));
  solve->add_option("--tol", tol);
  solve->add_option("--output", output);
  solve->add_option("--emit-decimals", emit_decimals);

  std::string dyn_mode = "redistribute", sequence = "round-robin", trace_path;
  long rounds = -1;
  bool use_float = false;
  int window = 0;
  std::uint64_t seed = 0;

  auto* dynamics = app.add_subcommand("dynamics", "run decentralized spending processes");
  dynamics->add_option("--input", input)->required();
  dynamics->add_option("--mode", dyn_mode)->check(CLI::IsMember({"redistribute", "spend"}));
  dynamics->add_option("--sequence", sequence);
  dynamics->add_option("--rounds", rounds);
  dynamics->add_option("--trace", trace_path);
  dynamics->add_flag("--float", use_float, "binary64 arithmetic instead of exact rationals");
  dynamics->add_option("--experimental-window", window);
  dynamics->add_option("--seed", seed);

  auto* verify = app.add_subcommand("verify", "certify or refute a distribution");
  verify->add_option("--input", input)->required();
  verify->add_option("--distribution", dist_path)->required();
  verify->add_option("--emit-decimals", emit_decimals);

  std::string random_nm, property, report_path;
  long trials = 1000, samples = 10000;
  double p_exponent = 0.0;

  auto* probe = app.add_subcommand("probe", "randomized axiom probes");
  probe->add_option("--input", input);
  probe->add_option("--random", random_nm, "random instances sized n,m");
  probe->add_option("--property", property)
      ->required()
      ->check(CLI::IsMember({"gsp", "pref-mono", "contrib-mono", "gwelfare",
                             "dynamics-potential"}));
  probe->add_option("--trials", trials);
  probe->add_option("--seed", seed);
  probe->add_option("--report", report_path);
  probe->add_option("--p", p_exponent, "power-welfare exponent for gwelfare");
  probe->add_option("--samples", samples, "decomposable samples for gwelfare");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(input, method, tol, output, emit_decimals);
    if (dynamics->parsed())
      return cmd_dynamics(input, dyn_mode, sequence, rounds, trace_path, use_float, window,
                          seed);
    if (verify->parsed()) return cmd_verify(input, dist_path, emit_decimals);
    if (probe->parsed())
      return cmd_probe(input, random_nm, property, trials, seed, report_path, p_exponent,
                       samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
