#include "edr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace edr {

namespace {

using ordered_json = nlohmann::ordered_json;

Rat parse_number(const ordered_json& v, const std::string& path) {
  if (v.is_string()) {
    auto r = parse_rational(v.get<std::string>());
    if (!r)
      throw std::runtime_error(path + ": cannot parse \"" + v.get<std::string>() +
                               "\" as a decimal or fraction");
    return *r;
  }
  if (v.is_number_integer()) {
    auto r = parse_rational(std::to_string(v.get<long long>()));
    return *r;
  }
  throw std::runtime_error(path +
                           ": numbers must be strings (\"316.5\", \"950/3\") or integers");
}

ordered_json parse_document(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

Profile parse_profile_json(const std::string& text) {
  ordered_json doc = parse_document(text);
  if (!doc.is_object()) throw std::runtime_error("profile: expected a JSON object");
  if (!doc.contains("charities") || !doc["charities"].is_array())
    throw std::runtime_error("profile.charities: expected an array of names");
  if (!doc.contains("agents") || !doc["agents"].is_array())
    throw std::runtime_error("profile.agents: expected an array of agents");

  std::vector<std::string> charities;
  for (size_t k = 0; k < doc["charities"].size(); ++k) {
    const auto& c = doc["charities"][k];
    if (!c.is_string())
      throw std::runtime_error("profile.charities[" + std::to_string(k) +
                               "]: expected a string");
    charities.push_back(c.get<std::string>());
  }

  std::vector<AgentSpec> agents;
  for (size_t k = 0; k < doc["agents"].size(); ++k) {
    const std::string path = "profile.agents[" + std::to_string(k) + "]";
    const auto& a = doc["agents"][k];
    if (!a.is_object()) throw std::runtime_error(path + ": expected an object");
    AgentSpec spec;
    if (!a.contains("name") || !a["name"].is_string())
      throw std::runtime_error(path + ".name: expected a string");
    spec.name = a["name"].get<std::string>();
    if (!a.contains("contribution"))
      throw std::runtime_error(path + ".contribution: missing");
    spec.contribution = parse_number(a["contribution"], path + ".contribution");
    spec.values.assign(charities.size(), Rat(0));
    if (!a.contains("values") || !a["values"].is_object())
      throw std::runtime_error(path + ".values: expected an object keyed by charity");
    for (const auto& [key, value] : a["values"].items()) {
      auto it = std::find(charities.begin(), charities.end(), key);
      if (it == charities.end())
        throw std::runtime_error(path + ".values: unknown charity \"" + key + "\"");
      spec.values[it - charities.begin()] = parse_number(value, path + ".values." + key);
    }
    agents.push_back(std::move(spec));
  }

  try {
    return Profile(std::move(charities), std::move(agents));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
}

Profile load_profile(const std::string& path) {
  return parse_profile_json(read_file(path));
}

Distribution parse_distribution_json(const std::string& text, const Profile& profile) {
  ordered_json doc = parse_document(text);
  if (!doc.is_object()) throw std::runtime_error("distribution: expected a JSON object");
  Mode mode = Mode::exact;
  const ordered_json* amounts = &doc;
  if (doc.contains("amounts")) {
    amounts = &doc["amounts"];
    if (!amounts->is_object())
      throw std::runtime_error("distribution.amounts: expected an object");
    if (doc.contains("mode")) {
      std::string m = doc["mode"].get<std::string>();
      if (m == "exact")
        mode = Mode::exact;
      else if (m == "float")
        mode = Mode::floating;
      else
        throw std::runtime_error("distribution.mode: expected \"exact\" or \"float\"");
    }
  }
  std::vector<Rat> values(profile.num_charities(), Rat(0));
  for (const auto& [key, value] : amounts->items()) {
    int x = profile.charity_index(key);
    if (x < 0)
      throw std::runtime_error("distribution: unknown charity \"" + key + "\"");
    values[x] = parse_number(value, "distribution." + key);
    if (values[x] < 0)
      throw std::runtime_error("distribution." + key + ": negative amount");
  }
  return make_distribution(std::move(values), mode);
}

Distribution load_distribution(const std::string& path, const Profile& profile) {
  return parse_distribution_json(read_file(path), profile);
}

std::string format_amount(const Rat& value, Mode mode, const RenderOptions& opt) {
  if (opt.emit_decimals >= 0) return format_decimal(value, opt.emit_decimals);
  if (mode == Mode::floating) return format_double(to_double(value));
  return format_rational(value);
}

std::string result_to_json(const Profile& profile, const EquilibriumResult& result,
                           double wall_time_ms, const RenderOptions& opt) {
  ordered_json doc;
  doc["mode"] = result.mode == Mode::exact ? "exact" : "float";
  ordered_json dist = ordered_json::object();
  for (int x = 0; x < profile.num_charities(); ++x)
    dist[profile.charities()[x]] =
        format_amount(result.distribution.amounts[x], result.mode, opt);
  doc["distribution"] = std::move(dist);
  ordered_json dec = ordered_json::array();
  for (int i = 0; i < profile.num_agents(); ++i) {
    ordered_json row;
    row["agent"] = profile.agent(i).name;
    ordered_json amounts = ordered_json::object();
    for (int x = 0; x < profile.num_charities(); ++x)
      amounts[profile.charities()[x]] =
          format_amount(result.decomposition.rows[i][x], result.mode, opt);
    row["amounts"] = std::move(amounts);
    dec.push_back(std::move(row));
  }
  doc["decomposition"] = std::move(dec);
  ordered_json utils = ordered_json::object();
  for (int i = 0; i < profile.num_agents(); ++i)
    utils[profile.agent(i).name] = format_amount(result.utilities[i], result.mode, opt);
  doc["utilities"] = std::move(utils);
  doc["nash_welfare"] = format_double(result.nash_welfare_value);
  doc["residual"] = format_amount(result.residual, result.mode, opt);
  doc["converged"] = result.converged;
  ordered_json solver;
  solver["method"] = result.method;
  solver["iterations"] = result.iterations;
  solver["wall_time_ms"] = format_double(wall_time_ms);
  doc["solver"] = std::move(solver);
  if (!result.warnings.empty()) doc["warnings"] = result.warnings;
  return doc.dump(2) + "\n";
}

EquilibriumResult parse_result_json(const std::string& text, const Profile& profile) {
  ordered_json doc = parse_document(text);
  EquilibriumResult res;
  std::string mode = doc.at("mode").get<std::string>();
  res.mode = mode == "exact" ? Mode::exact : Mode::floating;
  res.distribution.mode = res.mode;
  res.distribution.amounts.assign(profile.num_charities(), Rat(0));
  for (const auto& [key, value] : doc.at("distribution").items()) {
    int x = profile.charity_index(key);
    if (x < 0) throw std::runtime_error("result.distribution: unknown charity " + key);
    res.distribution.amounts[x] = parse_number(value, "result.distribution." + key);
  }
  res.decomposition.mode = res.mode;
  res.decomposition.rows.assign(profile.num_agents(),
                                std::vector<Rat>(profile.num_charities(), Rat(0)));
  for (const auto& row : doc.at("decomposition")) {
    int i = profile.agent_index(row.at("agent").get<std::string>());
    if (i < 0) throw std::runtime_error("result.decomposition: unknown agent");
    for (const auto& [key, value] : row.at("amounts").items()) {
      int x = profile.charity_index(key);
      if (x < 0) throw std::runtime_error("result.decomposition: unknown charity " + key);
      res.decomposition.rows[i][x] = parse_number(value, "result.decomposition");
    }
  }
  res.utilities.assign(profile.num_agents(), Rat(0));
  for (const auto& [key, value] : doc.at("utilities").items()) {
    int i = profile.agent_index(key);
    if (i < 0) throw std::runtime_error("result.utilities: unknown agent " + key);
    res.utilities[i] = parse_number(value, "result.utilities." + key);
  }
  res.nash_welfare_value = std::strtod(doc.at("nash_welfare").get<std::string>().c_str(), nullptr);
  res.residual = parse_number(doc.at("residual"), "result.residual");
  res.converged = doc.at("converged").get<bool>();
  if (doc.contains("solver")) {
    res.method = doc["solver"].value("method", "");
    res.iterations = doc["solver"].value("iterations", 0L);
  }
  return res;
}

std::string probe_report_to_json(const ProbeReport& report) {
  ordered_json doc;
  doc["property"] = report.property;
  doc["trials"] = report.trials;
  doc["violations"] = report.violations;
  doc["near_misses"] = report.near_misses;
  doc["inconclusive"] = report.inconclusive;
  doc["worst_margin"] = std::isfinite(report.worst_margin)
                            ? format_double(report.worst_margin)
                            : std::string("inf");
  doc["seed"] = report.seed;
  if (report.expected_counterexample) doc["expected_counterexample"] = true;
  ordered_json details = ordered_json::array();
  for (const auto& d : report.details) {
    ordered_json item;
    item["trial"] = d.trial;
    item["description"] = d.description;
    details.push_back(std::move(item));
  }
  doc["details"] = std::move(details);
  return doc.dump(2) + "\n";
}

void write_trace_csv(std::ostream& os, const Profile& profile, const DynamicsTrace& trace) {
  os << "round,agent,shifted,potential,residual";
  for (const auto& name : profile.charities()) os << "," << name;
  os << "\n";
  for (const TraceRound& r : trace.rounds) {
    os << r.round << "," << profile.agent(r.agent).name << ","
       << format_double(to_double(r.shifted)) << "," << format_double(r.potential) << ","
       << format_double(r.residual);
    for (const Rat& a : r.amounts) os << "," << format_double(to_double(a));
    os << "\n";
  }
}

}  // namespace edr
