#include "bilateral/spec_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "bilateral/errors.hpp"

namespace bilateral {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

int line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Walks text that is already known to be valid JSON and records the byte
// offset at which each value starts, keyed by JSON pointer.
class Locator {
 public:
  Locator(std::string_view s, std::map<std::string, std::size_t>& out) : s_(s), out_(out) {}

  void run() {
    skip_ws();
    value("");
  }

 private:
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
  }

  std::string string_token() {
    const std::size_t start = i_;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') ++i_;
      ++i_;
    }
    ++i_;  // closing quote
    return json::parse(s_.substr(start, i_ - start)).get<std::string>();
  }

  void value(const std::string& ptr) {
    out_[ptr] = i_;
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip_ws();
      if (s_[i_] == '}') {
        ++i_;
        return;
      }
      while (i_ < s_.size()) {
        skip_ws();
        const std::string key = string_token();
        skip_ws();
        ++i_;  // ':'
        skip_ws();
        value(ptr + "/" + escape_token(key));
        skip_ws();
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        ++i_;  // '}'
        return;
      }
    } else if (c == '[') {
      ++i_;
      skip_ws();
      if (s_[i_] == ']') {
        ++i_;
        return;
      }
      for (std::size_t k = 0; i_ < s_.size(); ++k) {
        skip_ws();
        value(ptr + "/" + std::to_string(k));
        skip_ws();
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        ++i_;  // ']'
        return;
      }
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' && s_[i_] != ' ' &&
             s_[i_] != '\n' && s_[i_] != '\r' && s_[i_] != '\t') {
        ++i_;
      }
    }
  }

  std::string_view s_;
  std::map<std::string, std::size_t>& out_;
  std::size_t i_ = 0;
};

class Reader {
 public:
  Reader(const SpecDocument& doc, std::string ptr) : doc_(doc), ptr_(std::move(ptr)) {}

  [[noreturn]] void fail(const std::string& msg, const std::string& field = "") const {
    const std::string p = field.empty() ? ptr_ : ptr_ + "/" + field;
    throw SpecError((p.empty() ? "" : p + ": ") + msg, doc_.line_of(p), p);
  }

  const json& node() const {
    const json& j = doc_.root().at(json::json_pointer(ptr_));
    return j;
  }

  void expect_object() const {
    if (!node().is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : node().items()) {
      if (!ok.count(k)) fail("unknown field \"" + k + "\"", escape_token(k));
    }
  }

  const json& field(const char* name) const {
    if (!node().contains(name)) fail(std::string("missing field \"") + name + "\"");
    return node().at(name);
  }

  double number(const char* name) const {
    const json& v = field(name);
    if (!v.is_number()) fail("expected a number", name);
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail("expected a finite number", name);
    return d;
  }

  std::string type() const {
    const json& v = field("type");
    if (!v.is_string()) fail("expected a string", "type");
    return v.get<std::string>();
  }

  std::string child(const std::string& rel) const { return ptr_ + "/" + rel; }
  const std::string& ptr() const { return ptr_; }

 private:
  const SpecDocument& doc_;
  std::string ptr_;
};

std::string field_for_violation(const std::string& type, const std::string& code) {
  if (type == "discrete" &&
      (code == "mass-sum" || code == "atom-mass" || code == "atom-order" || code == "negative-support")) {
    return "atoms";
  }
  if (type == "mixture" && code == "mixture-weights") return "parts";
  if (type == "truncate" && code == "negative-support") return "cap";
  return "";
}

}  // namespace

SpecDocument SpecDocument::parse(std::string_view text) {
  SpecDocument doc;
  doc.text_ = std::string(text);
  try {
    doc.root_ = json::parse(doc.text_);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw SpecError(std::string("malformed JSON: ") + e.what(), line_at(doc.text_, at), "");
  }
  Locator(doc.text_, doc.offsets_).run();
  return doc;
}

int SpecDocument::line_of(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    auto it = offsets_.find(p);
    if (it != offsets_.end()) return line_at(text_, it->second);
    if (p.empty()) return 0;
    p = p.substr(0, p.rfind('/'));
  }
}

DistPtr distribution_from_json(const SpecDocument& doc, const std::string& pointer) {
  Reader r(doc, pointer);
  r.expect_object();
  const std::string type = r.type();
  DistPtr d;
  try {
    if (type == "discrete") {
      r.allow_only({"type", "atoms"});
      const json& atoms = r.field("atoms");
      if (!atoms.is_array() || atoms.empty()) r.fail("expected a non-empty array of [x, p] pairs", "atoms");
      std::vector<Atom> list;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const json& a = atoms[i];
        const std::string f = "atoms/" + std::to_string(i);
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
          r.fail("expected a pair [x, p] of numbers", f);
        }
        list.push_back({a[0].get<double>(), a[1].get<double>()});
      }
      d = make_discrete(std::move(list));
    } else if (type == "uniform") {
      r.allow_only({"type", "a", "b"});
      const double a = r.number("a");
      const double b = r.number("b");
      if (!(a < b)) r.fail("need a < b", "b");
      d = make_uniform(a, b);
    } else if (type == "exponential") {
      r.allow_only({"type", "rate"});
      const double rate = r.number("rate");
      if (!(rate > 0.0)) r.fail("rate must be > 0", "rate");
      d = make_exponential(rate);
    } else if (type == "power") {
      r.allow_only({"type", "r"});
      const double rr = r.number("r");
      if (!(rr > 0.0)) r.fail("r must be > 0", "r");
      d = make_power(rr);
    } else if (type == "mixture") {
      r.allow_only({"type", "parts"});
      const json& parts = r.field("parts");
      if (!parts.is_array() || parts.empty()) r.fail("expected a non-empty array", "parts");
      std::vector<MixtureComponent> comps;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        Reader part(doc, r.child("parts/" + std::to_string(i)));
        part.expect_object();
        part.allow_only({"weight", "dist"});
        const double w = part.number("weight");
        part.field("dist");
        comps.push_back({w, distribution_from_json(doc, part.child("dist"))});
      }
      d = make_mixture(std::move(comps));
    } else if (type == "truncate") {
      r.allow_only({"type", "cap", "dist"});
      const double cap = r.number("cap");
      r.field("dist");
      d = make_truncated(distribution_from_json(doc, r.child("dist")), cap);
    } else {
      r.fail("unknown distribution type \"" + type + "\"", "type");
    }
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  const auto violations = validate(*d);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    r.fail(v.code + ": " + v.message, field_for_violation(type, v.code));
  }
  return d;
}

DistPtr parse_distribution(std::string_view text) {
  return distribution_from_json(SpecDocument::parse(text));
}

Mechanism mechanism_from_json(const SpecDocument& doc, const std::string& pointer) {
  Reader r(doc, pointer);
  r.expect_object();
  const std::string type = r.type();
  if (type == "fixed") {
    r.allow_only({"type", "p"});
    const double p = r.number("p");
    if (p < 0.0) r.fail("price must be >= 0", "p");
    return FixedPrice{p};
  }
  if (type == "mean") {
    r.allow_only({"type"});
    return MeanPrice{};
  }
  if (type == "sample") {
    r.allow_only({"type"});
    return SamplePrice{};
  }
  if (type == "gstar") {
    r.allow_only({"type"});
    return GStar{};
  }
  if (type == "hybrid") {
    r.allow_only({"type"});
    return HybridAsym{};
  }
  if (type == "quantile") {
    r.allow_only({"type", "g"});
    r.field("g");
    DistPtr g = distribution_from_json(doc, r.child("g"));
    if (g->support_lo() < 0.0 || g->support_hi() > 1.0) r.fail("G must be supported on [0, 1]", "g");
    return QuantileRule{g};
  }
  r.fail("unknown mechanism type \"" + type + "\"", "type");
}

Mechanism parse_mechanism(std::string_view text) {
  return mechanism_from_json(SpecDocument::parse(text));
}

json to_json(const Distribution& d) {
  if (const auto* x = dynamic_cast<const DiscreteDistribution*>(&d)) {
    json atoms = json::array();
    for (const Atom& a : x->atom_list()) atoms.push_back({a.x, a.p});
    return {{"type", "discrete"}, {"atoms", atoms}};
  }
  if (const auto* x = dynamic_cast<const UniformDistribution*>(&d)) {
    return {{"type", "uniform"}, {"a", x->a()}, {"b", x->b()}};
  }
  if (const auto* x = dynamic_cast<const ExponentialDistribution*>(&d)) {
    return {{"type", "exponential"}, {"rate", x->rate()}};
  }
  if (const auto* x = dynamic_cast<const PowerDistribution*>(&d)) {
    return {{"type", "power"}, {"r", x->exponent()}};
  }
  if (const auto* x = dynamic_cast<const MixtureDistribution*>(&d)) {
    json parts = json::array();
    for (const auto& c : x->parts()) parts.push_back({{"weight", c.weight}, {"dist", to_json(*c.dist)}});
    return {{"type", "mixture"}, {"parts", parts}};
  }
  if (const auto* x = dynamic_cast<const TruncatedDistribution*>(&d)) {
    return {{"type", "truncate"}, {"cap", x->cap()}, {"dist", to_json(*x->base())}};
  }
  throw std::invalid_argument("to_json: unknown distribution type");
}

json to_json(const Mechanism& m) {
  json j{{"type", mechanism_name(m)}};
  if (const auto* f = std::get_if<FixedPrice>(&m)) j["p"] = f->p;
  if (const auto* q = std::get_if<QuantileRule>(&m)) j["g"] = to_json(*q->g);
  return j;
}

json to_json(const MeasureReport& r) {
  json j{{"method", to_string(r.method)},
         {"mean_s", r.mean_s},
         {"opt_gft", r.opt_gft},
         {"opt_w", r.opt_w},
         {"gft_at_p", r.gft_at_p},
         {"w_at_p", r.w_at_p},
         {"ratio_gft", r.ratio_gft},
         {"ratio_w", r.ratio_w},
         {"degenerate", r.degenerate}};
  j["price"] = r.price ? json(*r.price) : json(nullptr);
  j["mc_stderr"] = r.mc_stderr ? json(*r.mc_stderr) : json(nullptr);
  if (r.mc_detail) {
    j["mc_stderr_detail"] = {{"mean_s", r.mc_detail->mean_s},
                             {"opt_gft", r.mc_detail->opt_gft},
                             {"opt_w", r.mc_detail->opt_w},
                             {"gft_at_p", r.mc_detail->gft_at_p},
                             {"w_at_p", r.mc_detail->w_at_p}};
  }
  return j;
}

}  // namespace bilateral
