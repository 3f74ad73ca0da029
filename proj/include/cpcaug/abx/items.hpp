// cpcaug/abx/items.hpp

// Copyright 2026  The cpcaug Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Item files list one segment per line:
//   #file onset offset #phone prev-phone next-phone speaker
// The first line is a header starting with '#'; times are seconds.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

struct ItemRecord {
  std::string file_id;
  double onset = 0.0;
  double offset = 0.0;
  std::string phone;  // center phone
  std::string prev;
  std::string next;
  std::string speaker;

  friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

inline constexpr const char* kItemHeader =
    "#file onset offset #phone prev-phone next-phone speaker";

namespace items_detail {

inline double parse_time(const std::string& tok, const std::string& where) {
  const char* s = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    fail(ErrorKind::kFormat, where + ": bad time '" + tok + "'");
  }
  return v;
}

}  // namespace items_detail

/// Parses item lines from `in`; `where` names the source in error messages.
inline std::vector<ItemRecord> parse_items(std::istream& in, const std::string& where) {
  std::vector<ItemRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string at = where + ":" + std::to_string(lineno);
    if (!header) {
      if (line[line.find_first_not_of(" \t")] != '#') {
        fail(ErrorKind::kFormat, at + ": expected a header line starting with '#'");
      }
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.size() != 7) {
      fail(ErrorKind::kFormat,
           at + ": expected 7 fields (file onset offset phone prev next speaker), got " +
               std::to_string(tok.size()));
    }
    ItemRecord r{tok[0],
                 items_detail::parse_time(tok[1], at),
                 items_detail::parse_time(tok[2], at),
                 tok[3],
                 tok[4],
                 tok[5],
                 tok[6]};
    if (r.onset < 0.0) fail(ErrorKind::kFormat, at + ": negative onset");
    if (!(r.onset < r.offset)) {
      fail(ErrorKind::kFormat, at + ": onset " + tok[1] + " is not before offset " + tok[2]);
    }
    out.push_back(std::move(r));
  }
  if (!header) fail(ErrorKind::kFormat, where + ": missing header line");
  return out;
}

inline std::vector<ItemRecord> load_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kNotFound, path.string() + ": cannot open item file");
  return parse_items(in, path.string());
}

inline void write_items(const std::filesystem::path& path, const std::vector<ItemRecord>& items) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
  out << kItemHeader << "\n" << std::setprecision(17);
  for (const auto& r : items) {
    out << r.file_id << ' ' << r.onset << ' ' << r.offset << ' ' << r.phone << ' ' << r.prev
        << ' ' << r.next << ' ' << r.speaker << "\n";
  }
  if (!out) fail(ErrorKind::kIo, path.string() + ": write failed");
}

}  // namespace cpcaug
