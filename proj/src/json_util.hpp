#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "dyadlab/error.hpp"

namespace dyadlab::detail {

/// Parses JSON, reporting syntax errors as "<source>:<line>:<col>: <reason>".
inline nlohmann::json parse_json_text(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string reason = e.what();
    if (auto p = reason.find("syntax error"); p != std::string::npos) reason = reason.substr(p);
    throw Error(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + reason);
  }
}

}  // namespace dyadlab::detail
