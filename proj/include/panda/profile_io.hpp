#pragma once

// Flat key-value radio profile files.
//
//   ; comment
//   p_tx_mw = 59.23
//   ...
//
// All nine keys are required and unknown keys are rejected so a typo never
// silently falls back to a default.

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "panda/types.hpp"

namespace panda {

inline constexpr std::array<std::string_view, 9> kProfileKeys = {
    "p_tx_mw", "p_rx_mw",  "p_sleep_mw", "msg_dur_ms", "c_sr_uj",
    "c_rs_uj", "c_st_uj", "c_ts_uj",    "t_cca_ms"};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError("key '" + key + "': not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) {
    ++used;
  }
  if (used != text.size()) {
    throw InputError("key '" + key + "': trailing characters in '" + text + "'");
  }
  return value;
}

inline RadioProfile radio_from_tree(const boost::property_tree::ptree& tree) {
  for (const auto& [key, child] : tree) {
    if (!child.empty()) {
      throw InputError("radio profile: unexpected section '" + key + "'");
    }
    bool known = false;
    for (auto k : kProfileKeys) {
      known = known || key == k;
    }
    if (!known) {
      throw InputError("radio profile: unknown key '" + key + "'");
    }
  }
  auto get = [&](const char* key) {
    auto v = tree.get_optional<std::string>(key);
    if (!v) {
      throw InputError(std::string("radio profile: missing key '") + key + "'");
    }
    return parse_double(key, *v);
  };
  RadioProfile r;
  r.p_tx = get("p_tx_mw");
  r.p_rx = get("p_rx_mw");
  r.p_sleep = get("p_sleep_mw");
  r.msg_dur = get("msg_dur_ms");
  r.c_sr = get("c_sr_uj");
  r.c_rs = get("c_rs_uj");
  r.c_st = get("c_st_uj");
  r.c_ts = get("c_ts_uj");
  r.t_cca = get("t_cca_ms");
  r.validate();
  return r;
}

}  // namespace detail

inline RadioProfile parse_radio_profile(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("radio profile: ") + e.what());
  }
  return detail::radio_from_tree(tree);
}

inline RadioProfile parse_radio_profile(const std::string& text) {
  std::istringstream in(text);
  return parse_radio_profile(in);
}

inline RadioProfile load_radio_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open radio profile '" + path.string() + "'");
  }
  return parse_radio_profile(in);
}

inline std::string format_radio_profile(const RadioProfile& r) {
  std::ostringstream out;
  out.precision(17);
  out << "p_tx_mw = " << r.p_tx << "\n"
      << "p_rx_mw = " << r.p_rx << "\n"
      << "p_sleep_mw = " << r.p_sleep << "\n"
      << "msg_dur_ms = " << r.msg_dur << "\n"
      << "c_sr_uj = " << r.c_sr << "\n"
      << "c_rs_uj = " << r.c_rs << "\n"
      << "c_st_uj = " << r.c_st << "\n"
      << "c_ts_uj = " << r.c_ts << "\n"
      << "t_cca_ms = " << r.t_cca << "\n";
  return out.str();
}

}  // namespace panda
