#include "edr/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>

namespace edr {

std::optional<Rat> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::string s = text;
  auto bad = [&](char c) {
    return !(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
             c == '.' || c == '/');
  };
  if (std::any_of(s.begin(), s.end(), bad)) return std::nullopt;

  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      std::string num = s.substr(0, slash);
      std::string den = s.substr(slash + 1);
      if (num.empty() || den.empty()) return std::nullopt;
      if (num.find('.') != std::string::npos || den.find('.') != std::string::npos)
        return std::nullopt;
      mpz_class n(num), d(den);
      if (d == 0) return std::nullopt;
      Rat r(n, d);
      r.canonicalize();
      return r;
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) {
      return Rat(mpz_class(s));
    }
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    if (frac.empty() && whole.empty()) return std::nullopt;
    if (frac.find_first_of("+-") != std::string::npos) return std::nullopt;
    bool negative = !whole.empty() && whole[0] == '-';
    if (whole == "-" || whole == "+" || whole.empty()) whole += "0";
    mpz_class ipart(whole);
    Rat r(ipart);
    if (!frac.empty()) {
      mpz_class f(frac);
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      Rat fp(f, scale);
      fp.canonicalize();
      r += negative ? -fp : fp;
    }
    return r;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::string format_rational(const Rat& value) {
  return value.get_str();
}

std::string format_decimal(const Rat& value, int decimals) {
  if (decimals < 0) decimals = 0;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, decimals);
  Rat scaled = value * Rat(scale);
  bool negative = scaled < 0;
  Rat mag = negative ? Rat(-scaled) : scaled;
  // round half away from zero
  mpz_class twice_num = 2 * mag.get_num() + mag.get_den();
  mpz_class rounded = twice_num / (2 * mag.get_den());
  std::string digits = rounded.get_str();
  std::string out;
  if (decimals == 0) {
    out = digits;
  } else {
    if (static_cast<int>(digits.size()) <= decimals)
      digits.insert(0, decimals + 1 - digits.size(), '0');
    out = digits.substr(0, digits.size() - decimals) + "." +
          digits.substr(digits.size() - decimals);
  }
  if (negative && rounded != 0) out.insert(0, 1, '-');
  return out;
}

std::string format_double(double value) {
  char buf[64];
  if (value == std::trunc(value) && std::abs(value) < 1e15) {
    snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Rat rat_abs(const Rat& value) { return value < 0 ? Rat(-value) : value; }
Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

Rat rat_pow(const Rat& base, int exponent) {
  if (exponent == 0) throw std::invalid_argument("rat_pow: zero exponent");
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den_mpz_t(), e);
  r.canonicalize();
  if (exponent < 0) {
    if (r == 0) throw std::domain_error("rat_pow: negative power of zero");
    r = 1 / r;
  }
  return r;
}

Profile::Profile(std::vector<std::string> charities, std::vector<AgentSpec> agents)
    : charities_(std::move(charities)), agents_(std::move(agents)) {
  if (charities_.empty()) throw std::invalid_argument("profile: no charities");
  if (agents_.empty()) throw std::invalid_argument("profile: no agents");
  {
    std::set<std::string> seen(charities_.begin(), charities_.end());
    if (seen.size() != charities_.size())
      throw std::invalid_argument("profile: duplicate charity name");
  }
  {
    std::set<std::string> seen;
    for (const auto& a : agents_)
      if (!seen.insert(a.name).second)
        throw std::invalid_argument("profile: duplicate agent name '" + a.name + "'");
  }

  const int m = num_charities();
  const int n = num_agents();
  binary_ = true;
  total_ = 0;
  approved_.resize(n);
  values_f_.resize(n);
  contributions_f_.resize(n);
  supporters_.resize(m);
  for (int i = 0; i < n; ++i) {
    AgentSpec& a = agents_[i];
    if (static_cast<int>(a.values.size()) != m)
      throw std::invalid_argument("profile: agent '" + a.name +
                                  "' has wrong number of valuations");
    if (a.contribution < 0)
      throw std::invalid_argument("profile: agent '" + a.name +
                                  "' has negative contribution");
    total_ += a.contribution;
    contributions_f_[i] = to_double(a.contribution);
    values_f_[i].resize(m);
    for (int x = 0; x < m; ++x) {
      const Rat& v = a.values[x];
      if (v < 0)
        throw std::invalid_argument("profile: agent '" + a.name +
                                    "' has negative valuation for '" + charities_[x] + "'");
      if (v != 0 && v != 1) binary_ = false;
      values_f_[i][x] = to_double(v);
      if (v > 0) {
        approved_[i].push_back(x);
        if (a.contribution > 0) supporters_[x].push_back(i);
      }
    }
    if (approved_[i].empty())
      throw std::invalid_argument("profile: agent '" + a.name +
                                  "' values no charity positively");
  }
}

int Profile::charity_index(const std::string& name) const {
  for (int x = 0; x < num_charities(); ++x)
    if (charities_[x] == name) return x;
  return -1;
}

int Profile::agent_index(const std::string& name) const {
  for (int i = 0; i < num_agents(); ++i)
    if (agents_[i].name == name) return i;
  return -1;
}

std::vector<double> Distribution::as_doubles() const {
  std::vector<double> out(amounts.size());
  for (size_t i = 0; i < amounts.size(); ++i) out[i] = to_double(amounts[i]);
  return out;
}

Rat Distribution::total() const {
  Rat t = 0;
  for (const Rat& a : amounts) t += a;
  return t;
}

Distribution make_distribution(std::vector<Rat> amounts, Mode mode) {
  return Distribution{std::move(amounts), mode};
}

Distribution distribution_from_doubles(std::span<const double> amounts) {
  Distribution d;
  d.mode = Mode::floating;
  d.amounts.reserve(amounts.size());
  for (double a : amounts) d.amounts.emplace_back(a);
  return d;
}

std::vector<Rat> Decomposition::column_sums() const {
  std::vector<Rat> sums;
  if (rows.empty()) return sums;
  sums.assign(rows[0].size(), Rat(0));
  for (const auto& row : rows)
    for (size_t x = 0; x < row.size(); ++x) sums[x] += row[x];
  return sums;
}

Distribution Decomposition::to_distribution() const {
  return Distribution{column_sums(), mode};
}

bool decomposition_consistent(const Profile& profile, const Decomposition& dec,
                              const Distribution& d) {
  if (static_cast<int>(dec.rows.size()) != profile.num_agents()) return false;
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (static_cast<int>(dec.rows[i].size()) != profile.num_charities()) return false;
    Rat row_sum = 0;
    for (const Rat& v : dec.rows[i]) {
      if (v < 0) return false;
      row_sum += v;
    }
    if (row_sum != profile.agent(i).contribution) return false;
  }
  std::vector<Rat> cols = dec.column_sums();
  for (int x = 0; x < profile.num_charities(); ++x)
    if (cols[x] != d.amounts[x]) return false;
  return true;
}

WelfareSpec WelfareSpec::nash_spec() { return WelfareSpec{}; }

WelfareSpec WelfareSpec::power_spec(double p) {
  if (p == 0.0) throw std::invalid_argument("welfare: power exponent must be nonzero");
  WelfareSpec w;
  w.tag = Tag::power;
  w.exponent = p;
  return w;
}

WelfareSpec WelfareSpec::custom_spec(std::function<double(double)> g,
                                     std::function<double(double)> g_prime) {
  WelfareSpec w;
  w.tag = Tag::custom;
  w.g = std::move(g);
  w.g_prime = std::move(g_prime);
  return w;
}

LeximinKey::LeximinKey(std::vector<Rat> values) : sorted_(std::move(values)) {
  std::sort(sorted_.begin(), sorted_.end());
}

int leximin_compare(const LeximinKey& a, const LeximinKey& b) {
  if (a.sorted().size() != b.sorted().size())
    throw std::invalid_argument("leximin_compare: length mismatch");
  for (size_t k = 0; k < a.sorted().size(); ++k) {
    if (a.sorted()[k] < b.sorted()[k]) return -1;
    if (a.sorted()[k] > b.sorted()[k]) return 1;
  }
  return 0;
}

Rat leontief_utility(const Profile& profile, int agent, std::span<const Rat> amounts) {
  const auto& approved = profile.approved(agent);
  Rat best;
  bool first = true;
  for (int x : approved) {
    Rat ratio = amounts[x] / profile.value(agent, x);
    if (first || ratio < best) {
      best = ratio;
      first = false;
    }
  }
  return best;
}

Rat leontief_utility(const Profile& profile, int agent, const Distribution& d) {
  return leontief_utility(profile, agent, std::span<const Rat>(d.amounts));
}

double leontief_utility_f(const Profile& profile, int agent,
                          std::span<const double> amounts) {
  const auto& approved = profile.approved(agent);
  double best = std::numeric_limits<double>::infinity();
  for (int x : approved)
    best = std::min(best, amounts[x] / profile.value_f(agent, x));
  return best;
}

double cobb_douglas_log_utility(const Profile& profile, int agent, const Distribution& d) {
  double total = 0.0;
  for (int x : profile.approved(agent)) {
    if (d.amounts[x] <= 0) return -std::numeric_limits<double>::infinity();
    total += profile.value_f(agent, x) * std::log(to_double(d.amounts[x]));
  }
  return total;
}

std::vector<int> critical_set(const Profile& profile, int agent,
                              std::span<const Rat> amounts) {
  const auto& approved = profile.approved(agent);
  Rat best = leontief_utility(profile, agent, amounts);
  std::vector<int> out;
  for (int x : approved)
    if (amounts[x] == best * profile.value(agent, x)) out.push_back(x);
  return out;
}

std::vector<int> critical_set_f(const Profile& profile, int agent,
                                std::span<const double> amounts, double tau) {
  const auto& approved = profile.approved(agent);
  double u = leontief_utility_f(profile, agent, amounts);
  std::vector<int> out;
  for (int x : approved)
    if (amounts[x] / profile.value_f(agent, x) <= (1.0 + tau) * u) out.push_back(x);
  return out;
}

std::vector<int> critical_set(const Profile& profile, int agent, const Distribution& d,
                              double tau) {
  if (d.mode == Mode::exact)
    return critical_set(profile, agent, std::span<const Rat>(d.amounts));
  std::vector<double> a = d.as_doubles();
  return critical_set_f(profile, agent, a, tau);
}

double nash_welfare(const Profile& profile, const Distribution& d) {
  double total = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (profile.agent(i).contribution == 0) continue;  // 0 log 0 = 0
    Rat u = leontief_utility(profile, i, d);
    if (u == 0) return -std::numeric_limits<double>::infinity();
    total += profile.contribution_f(i) * std::log(to_double(u));
  }
  return total;
}

double nash_welfare_f(const Profile& profile, std::span<const double> amounts) {
  double total = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    double c = profile.contribution_f(i);
    if (c == 0.0) continue;
    double u = leontief_utility_f(profile, i, amounts);
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    total += c * std::log(u);
  }
  return total;
}

double g_welfare(const Profile& profile, const Distribution& d, const WelfareSpec& w) {
  if (w.tag == WelfareSpec::Tag::nash) return nash_welfare(profile, d);
  double total = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    double c = profile.contribution_f(i);
    if (c == 0.0) continue;
    double u = to_double(leontief_utility(profile, i, d));
    double term;
    if (w.tag == WelfareSpec::Tag::power) {
      double p = w.exponent;
      if (u == 0.0 && p < 0) return -std::numeric_limits<double>::infinity();
      term = (u == 0.0 && p > 0) ? 0.0 : (p > 0 ? 1.0 : -1.0) * std::pow(u, p);
    } else {
      term = w.g(u);
      if (!std::isfinite(term)) return -std::numeric_limits<double>::infinity();
    }
    total += c * term;
  }
  return total;
}

std::optional<Rat> g_welfare_exact(const Profile& profile, const Distribution& d, int p) {
  if (p == 0) throw std::invalid_argument("g_welfare_exact: zero exponent");
  Rat total = 0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    const Rat& c = profile.agent(i).contribution;
    if (c == 0) continue;
    Rat u = leontief_utility(profile, i, d);
    if (u == 0) {
      if (p < 0) return std::nullopt;  // -infinity
      continue;                        // 0^p = 0 for p > 0
    }
    Rat up = rat_pow(u, p);
    if (p > 0)
      total += c * up;
    else
      total -= c * up;
  }
  return total;
}

ProfileReduction reduce_profile(const Profile& profile) {
  if (profile.total_contribution() == 0)
    throw std::invalid_argument("reduce_profile: zero endowment");
  std::vector<int> agent_map, charity_map;
  std::vector<int> charity_pos(profile.num_charities(), -1);
  for (int x = 0; x < profile.num_charities(); ++x) {
    if (!profile.active_supporters(x).empty()) {
      charity_pos[x] = static_cast<int>(charity_map.size());
      charity_map.push_back(x);
    }
  }
  std::vector<AgentSpec> agents;
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (profile.agent(i).contribution == 0) continue;
    agent_map.push_back(i);
    AgentSpec spec;
    spec.name = profile.agent(i).name;
    spec.contribution = profile.agent(i).contribution;
    spec.values.resize(charity_map.size(), Rat(0));
    for (size_t rx = 0; rx < charity_map.size(); ++rx)
      spec.values[rx] = profile.value(i, charity_map[rx]);
    agents.push_back(std::move(spec));
  }
  std::vector<std::string> names;
  names.reserve(charity_map.size());
  for (int x : charity_map) names.push_back(profile.charities()[x]);
  return ProfileReduction{Profile(std::move(names), std::move(agents)),
                          std::move(agent_map), std::move(charity_map)};
}

Distribution expand_distribution(const ProfileReduction& red, const Profile& full,
                                 const Distribution& reduced) {
  Distribution out;
  out.mode = reduced.mode;
  out.amounts.assign(full.num_charities(), Rat(0));
  for (size_t rx = 0; rx < red.charity_map.size(); ++rx)
    out.amounts[red.charity_map[rx]] = reduced.amounts[rx];
  return out;
}

Decomposition expand_decomposition(const ProfileReduction& red, const Profile& full,
                                   const Decomposition& reduced) {
  Decomposition out;
  out.mode = reduced.mode;
  out.rows.assign(full.num_agents(), std::vector<Rat>(full.num_charities(), Rat(0)));
  for (size_t ri = 0; ri < red.agent_map.size(); ++ri)
    for (size_t rx = 0; rx < red.charity_map.size(); ++rx)
      out.rows[red.agent_map[ri]][red.charity_map[rx]] = reduced.rows[ri][rx];
  return out;
}

}  // namespace edr
