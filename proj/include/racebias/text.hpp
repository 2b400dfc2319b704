#pragma once

// Small parsing helpers shared by the text file readers.

#include <sstream>
#include <string>
#include <vector>

#include "racebias/arith.hpp"

namespace racebias {

namespace detail {

inline std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

inline bool parse_u64(const std::string &s, u64 &v) {
  try {
    std::size_t pos = 0;
    if (s.empty() || s.find('-') != std::string::npos) return false;
    v = std::stoull(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_double(const std::string &s, double &v) {
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

}  // namespace racebias
