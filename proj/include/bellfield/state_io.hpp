#pragma once

// JSON state files:
//   {"modes":["a1","a2"], "cutoff":2,
//    "terms":[{"occ":[1,0],"re":1,"im":0}, {"occ":[0,1],"re":1,"im":0}]}
// Terms are normalized on load.

#include <cstddef>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bellfield/fock.hpp"

namespace bellfield {

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  fail(ErrorKind::parse_error, "field '" + field + "': " + what);
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return 0.0;
  if (!it->is_number()) field_error(path + "." + key, "expected a number");
  return it->get<double>();
}

}  // namespace detail

inline MultiModeState parse_state_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse_error,
         "malformed JSON at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) detail::field_error("<root>", "expected an object");

  auto modes = doc.find("modes");
  if (modes == doc.end()) detail::field_error("modes", "missing");
  if (!modes->is_array() || modes->empty()) detail::field_error("modes", "expected a nonempty array of strings");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < modes->size(); ++i) {
    if (!(*modes)[i].is_string()) {
      detail::field_error("modes[" + std::to_string(i) + "]", "expected a string");
    }
    labels.push_back((*modes)[i].get<std::string>());
  }

  auto cutoff = doc.find("cutoff");
  if (cutoff == doc.end()) detail::field_error("cutoff", "missing");
  if (!cutoff->is_number_integer() || cutoff->get<long long>() < 0) {
    detail::field_error("cutoff", "expected a nonnegative integer");
  }

  std::optional<ModeLayout> layout;
  try {
    layout.emplace(std::move(labels), static_cast<int>(cutoff->get<long long>()));
  } catch (const Error& e) {
    detail::field_error("modes", e.what());
  }

  auto terms = doc.find("terms");
  if (terms == doc.end()) detail::field_error("terms", "missing");
  if (!terms->is_array()) detail::field_error("terms", "expected an array");

  std::vector<BasisTerm> basis;
  for (std::size_t i = 0; i < terms->size(); ++i) {
    const auto& term = (*terms)[i];
    const std::string path = "terms[" + std::to_string(i) + "]";
    if (!term.is_object()) detail::field_error(path, "expected an object");
    auto occ = term.find("occ");
    if (occ == term.end() || !occ->is_array() || occ->size() != layout->size()) {
      detail::field_error(path + ".occ",
                          "expected an array of " + std::to_string(layout->size()) + " integers");
    }
    std::vector<int> counts;
    int total = 0;
    for (const auto& n : *occ) {
      if (!n.is_number_integer() || n.get<long long>() < 0 || n.get<long long>() > kMaxCutoff) {
        detail::field_error(path + ".occ", "occupation numbers must be nonnegative integers");
      }
      counts.push_back(static_cast<int>(n.get<long long>()));
      total += counts.back();
    }
    if (total > layout->cutoff()) {
      detail::field_error(path + ".occ", "total " + std::to_string(total) + " exceeds cutoff " +
                                             std::to_string(layout->cutoff()));
    }
    const double re = detail::number_field(term, "re", path);
    const double im = detail::number_field(term, "im", path);
    basis.push_back({Occupation::from(counts), cplx(re, im)});
  }
  try {
    return MultiModeState::assemble(*layout, std::move(basis), Normalization::renormalize);
  } catch (const Error& e) {
    detail::field_error("terms", e.what());
  }
}

inline MultiModeState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse_error, "cannot open state file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_state_json(text);
}

inline nlohmann::json state_to_json(const MultiModeState& state) {
  nlohmann::json doc;
  doc["modes"] = state.layout().labels();
  doc["cutoff"] = state.layout().cutoff();
  auto& terms = doc["terms"] = nlohmann::json::array();
  for (const auto& t : state.terms()) {
    terms.push_back({{"occ", t.occ.to_vector(state.layout().size())},
                     {"re", t.amp.real()},
                     {"im", t.amp.imag()}});
  }
  return doc;
}

}  // namespace bellfield
