#include "ltrlab/scenario_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "ltrlab/error.hpp"
#include "ltrlab/svmlight.hpp"

namespace ltrlab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = line;
    // Comments start at '#' outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '"') quoted = !quoted;
      if (text[i] == '#' && !quoted) {
        text.resize(i);
        break;
      }
    }
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      }
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!section.empty()) key = section + "." + key;
    if (config.values_.contains(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    }
    config.values_[key] = value;
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  double value = 0.0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
  }
  return value;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  long long value = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + s + "'");
  }
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

void KeyValueConfig::require_all_used() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!used_.contains(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

namespace sim {

namespace {

void check_probability_range(const Range& r, const std::string& what) {
  if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
    throw ConfigError(what + ": need 0 <= min <= max <= 1");
  }
}

std::string vertical_section(events::Vertical v) {
  return "vertical." + std::string(events::to_string(v));
}

}  // namespace

double UserModel::examination(int rank) const {
  if (rank < 1 || rank > page_length) return 0.0;
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

void ScenarioConfig::validate() const {
  if (queries_per_vertical < 1) throw ConfigError("queries_per_vertical must be >= 1");
  if (products_per_query < 1) throw ConfigError("products_per_query must be >= 1");
  if (horizon_days < 1) throw ConfigError("horizon_days must be >= 1");
  if (user.page_length < 1) throw ConfigError("page_length must be >= 1");
  if (web_sessions_per_day < 0 || app_sessions_per_day < 0) {
    throw ConfigError("sessions per day must be >= 0");
  }
  if (!(logging_noise >= 0.0)) throw ConfigError("logging_noise must be >= 0");
  for (auto v : events::kAllVerticals) {
    const auto& d = dynamics(v);
    const std::string name = vertical_section(v);
    if (!(d.drift_rate >= 0.0)) throw ConfigError(name + ".drift_rate must be >= 0");
    if (!(d.new_product_rate >= 0.0 && d.new_product_rate <= 1.0)) {
      throw ConfigError(name + ".new_product_rate must be in [0, 1]");
    }
    check_probability_range(d.click, name + ".click");
    check_probability_range(d.atc_given_click, name + ".atc_given_click");
    check_probability_range(d.order_given_atc, name + ".order_given_atc");
  }
}

ScenarioConfig ScenarioConfig::standard() {
  using events::Vertical;
  ScenarioConfig c;
  auto set = [&c](Vertical v, double drift, double arrivals) {
    c.dynamics(v).drift_rate = drift;
    c.dynamics(v).new_product_rate = arrivals;
  };
  set(Vertical::kFood, 0.0, 0.001);
  set(Vertical::kConsumables, 0.0, 0.001);
  set(Vertical::kHome, 0.04, 0.01);
  set(Vertical::kHardlines, 0.06, 0.015);
  set(Vertical::kFashion, 0.10, 0.02);
  set(Vertical::kEts, 0.10, 0.02);
  // many queries with thin daily traffic: 30-day counts stay noisy
  c.queries_per_vertical = 20;
  c.web_sessions_per_day = 1;
  c.app_sessions_per_day = 1;
  return c;
}

ScenarioConfig scenario_from_config(const KeyValueConfig& kv) {
  ScenarioConfig c = ScenarioConfig::standard();
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  c.queries_per_vertical =
      static_cast<int>(kv.get_int("queries_per_vertical", c.queries_per_vertical));
  c.products_per_query = static_cast<int>(kv.get_int("products_per_query", c.products_per_query));
  c.horizon_days = static_cast<int>(kv.get_int("horizon_days", c.horizon_days));
  try {
    c.start_date = parse_day(kv.get_string("start_date", format_day(c.start_date)));
  } catch (const ParseError& err) {
    throw ConfigError(std::string("start_date: ") + err.what());
  }
  c.user.page_length = static_cast<int>(kv.get_int("page_length", c.user.page_length));
  c.web_sessions_per_day =
      static_cast<int>(kv.get_int("web_sessions_per_day", c.web_sessions_per_day));
  c.app_sessions_per_day =
      static_cast<int>(kv.get_int("app_sessions_per_day", c.app_sessions_per_day));
  c.logging_noise = kv.get_double("logging_noise", c.logging_noise);
  for (auto v : events::kAllVerticals) {
    auto& d = c.dynamics(v);
    const std::string s = vertical_section(v) + ".";
    d.drift_rate = kv.get_double(s + "drift_rate", d.drift_rate);
    d.new_product_rate = kv.get_double(s + "new_product_rate", d.new_product_rate);
    d.click.lo = kv.get_double(s + "click_min", d.click.lo);
    d.click.hi = kv.get_double(s + "click_max", d.click.hi);
    d.atc_given_click.lo = kv.get_double(s + "atc_given_click_min", d.atc_given_click.lo);
    d.atc_given_click.hi = kv.get_double(s + "atc_given_click_max", d.atc_given_click.hi);
    d.order_given_atc.lo = kv.get_double(s + "order_given_atc_min", d.order_given_atc.lo);
    d.order_given_atc.hi = kv.get_double(s + "order_given_atc_max", d.order_given_atc.hi);
  }
  c.validate();
  return c;
}

void write_scenario_config(std::ostream& out, const ScenarioConfig& c) {
  using ltr::format_double;
  out << "seed = " << c.seed << '\n'
      << "queries_per_vertical = " << c.queries_per_vertical << '\n'
      << "products_per_query = " << c.products_per_query << '\n'
      << "horizon_days = " << c.horizon_days << '\n'
      << "start_date = \"" << format_day(c.start_date) << "\"\n"
      << "page_length = " << c.user.page_length << '\n'
      << "web_sessions_per_day = " << c.web_sessions_per_day << '\n'
      << "app_sessions_per_day = " << c.app_sessions_per_day << '\n'
      << "logging_noise = " << format_double(c.logging_noise) << '\n';
  for (auto v : events::kAllVerticals) {
    const auto& d = c.dynamics(v);
    out << "\n[" << vertical_section(v) << "]\n"
        << "drift_rate = " << format_double(d.drift_rate) << '\n'
        << "new_product_rate = " << format_double(d.new_product_rate) << '\n'
        << "click_min = " << format_double(d.click.lo) << '\n'
        << "click_max = " << format_double(d.click.hi) << '\n'
        << "atc_given_click_min = " << format_double(d.atc_given_click.lo) << '\n'
        << "atc_given_click_max = " << format_double(d.atc_given_click.hi) << '\n'
        << "order_given_atc_min = " << format_double(d.order_given_atc.lo) << '\n'
        << "order_given_atc_max = " << format_double(d.order_given_atc.hi) << '\n';
  }
}

}  // namespace sim
}  // namespace ltrlab
