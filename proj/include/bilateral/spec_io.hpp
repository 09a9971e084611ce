#pragma once

#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bilateral/distributions.hpp"
#include "bilateral/measures.hpp"
#include "bilateral/mechanisms.hpp"

namespace bilateral {

// A parsed JSON text that remembers where every value started, so semantic
// errors can name a source line.
class SpecDocument {
 public:
  // Throws SpecError on malformed JSON.
  static SpecDocument parse(std::string_view text);

  const nlohmann::json& root() const { return root_; }
  // 1-based line of the value at `pointer`, falling back to the nearest
  // ancestor; 0 when unknown.
  int line_of(const std::string& pointer) const;

 private:
  nlohmann::json root_;
  std::string text_;
  std::map<std::string, std::size_t> offsets_;
};

// Builds and validates a distribution. Every problem is reported as a
// SpecError carrying the offending JSON pointer and its line.
DistPtr distribution_from_json(const SpecDocument& doc, const std::string& pointer = "");
DistPtr parse_distribution(std::string_view text);

Mechanism mechanism_from_json(const SpecDocument& doc, const std::string& pointer = "");
Mechanism parse_mechanism(std::string_view text);

nlohmann::json to_json(const Distribution& d);
nlohmann::json to_json(const Mechanism& m);
nlohmann::json to_json(const MeasureReport& r);

}  // namespace bilateral
