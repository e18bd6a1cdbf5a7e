#include "mapwh/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mapwh {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path, msg);
}

std::string idx(const std::string& path, size_t k) {
  std::ostringstream os;
  os << path << "[" << k << "]";
  return os.str();
}

std::string key(const std::string& path, const char* k) {
  return path.empty() ? std::string(k) : path + "." + k;
}

const json& need(const json& j, const std::string& path, const char* k) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(k);
  if (it == j.end()) fail(key(path, k), "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "value must be finite");
  return v;
}

double number_or(const json& j, const std::string& path, const char* k,
                 double fallback) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(k);
  if (it == j.end()) return fallback;
  return number(*it, key(path, k));
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::vector<ExpPolyTerm> parse_terms(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of terms");
  std::vector<ExpPolyTerm> ts;
  for (size_t k = 0; k < j.size(); ++k) {
    const std::string tp = idx(path, k);
    const json& t = j[k];
    ExpPolyTerm term{};
    term.w = number(need(t, tp, "w"), key(tp, "w"));
    term.p = integer(need(t, tp, "p"), key(tp, "p"));
    if (term.p < 0 || term.p > 60)
      fail(key(tp, "p"), "power must lie in [0, 60]");
    term.beta = number(need(t, tp, "beta"), key(tp, "beta"));
    if (!(term.beta > 0.0)) fail(key(tp, "beta"), "rate must be positive");
    ts.push_back(term);
  }
  return ts;
}

double parse_atom0(const json& j, const std::string& path) {
  const double a = number_or(j, path, "atom0", 0.0);
  if (a < 0.0) fail(key(path, "atom0"), "atom must be >= 0");
  return a;
}

// One-sided measure object; the side field, when present, must match.
ExpPolyMeasure parse_measure(const json& j, const std::string& path,
                             Side side) {
  if (!j.is_object()) fail(path, "expected a measure object");
  ExpPolyMeasure m;
  m.side = side;
  m.atom0 = parse_atom0(j, path);
  if (j.contains("terms")) m.terms = parse_terms(j["terms"], key(path, "terms"));
  if (j.contains("side")) {
    const json& sd = j["side"];
    if (!sd.is_string()) fail(key(path, "side"), "expected a string");
    const std::string v = sd.get<std::string>();
    const char* want = side == Side::pos ? "pos" : "neg";
    if (v != want) fail(key(path, "side"), "side does not match its slot");
  }
  return m;
}

// Transition-law slot: one-sided ("pos"/"neg") or "both" with terms_neg.
TwoSidedMeasure parse_trans_measure(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a measure object");
  TwoSidedMeasure m;
  m.atom0 = parse_atom0(j, path);
  std::string side = "pos";
  if (j.contains("side")) {
    const json& sd = j["side"];
    if (!sd.is_string()) fail(key(path, "side"), "expected a string");
    side = sd.get<std::string>();
  }
  if (side != "pos" && side != "neg" && side != "both")
    fail(key(path, "side"), "side must be pos, neg or both");
  std::vector<ExpPolyTerm> ts;
  if (j.contains("terms")) ts = parse_terms(j["terms"], key(path, "terms"));
  if (side == "pos") {
    m.pos = ts;
  } else if (side == "neg") {
    m.neg = ts;
    if (j.contains("terms_neg"))
      fail(key(path, "terms_neg"), "terms_neg requires side both");
  } else {
    m.pos = ts;
    if (j.contains("terms_neg"))
      m.neg = parse_terms(j["terms_neg"], key(path, "terms_neg"));
  }
  if (side == "pos" && j.contains("terms_neg"))
    fail(key(path, "terms_neg"), "terms_neg requires side both");
  return m;
}

std::vector<double> parse_matrix(const json& j, const std::string& path,
                                 int n) {
  if (!j.is_array()) fail(path, "expected a matrix");
  std::vector<double> out;
  out.reserve(size_t(n) * n);
  if (!j.empty() && j[0].is_array()) {
    if (int(j.size()) != n) fail(path, "expected n rows");
    for (size_t i = 0; i < j.size(); ++i) {
      const std::string rp = idx(path, i);
      if (!j[i].is_array() || int(j[i].size()) != n)
        fail(rp, "expected a row of n numbers");
      for (size_t k = 0; k < j[i].size(); ++k)
        out.push_back(number(j[i][k], idx(rp, k)));
    }
  } else {
    if (int(j.size()) != n * n) fail(path, "expected n*n numbers");
    for (size_t k = 0; k < j.size(); ++k)
      out.push_back(number(j[k], idx(path, k)));
  }
  return out;
}

MapSpec parse_spec(const json& j) {
  if (!j.is_object()) fail("", "top level must be an object");
  const json& schema = need(j, "", "schema");
  if (!schema.is_string() || schema.get<std::string>() != "mapwh/1")
    fail("schema", "unsupported schema (want \"mapwh/1\")");

  MapSpec s;
  s.n = integer(need(j, "", "n"), "n");
  if (s.n < 1 || s.n > 64) fail("n", "phase count must lie in [1, 64]");

  s.kind = SpecKind::subordinator;
  if (j.contains("kind")) {
    const json& k = j["kind"];
    if (!k.is_string()) fail("kind", "expected a string");
    const std::string v = k.get<std::string>();
    if (v == "subordinator")
      s.kind = SpecKind::subordinator;
    else if (v == "general")
      s.kind = SpecKind::general;
    else
      fail("kind", "kind must be subordinator or general");
  }

  const json& pi = need(j, "", "pi");
  if (!pi.is_array() || int(pi.size()) != s.n)
    fail("pi", "expected an array of n numbers");
  for (size_t k = 0; k < pi.size(); ++k)
    s.pi.push_back(number(pi[k], idx("pi", k)));

  s.Q = parse_matrix(need(j, "", "Q"), "Q", s.n);

  const json& comps = need(j, "", "components");
  if (!comps.is_array() || int(comps.size()) != s.n)
    fail("components", "expected an array of n components");
  for (size_t i = 0; i < comps.size(); ++i) {
    const std::string cp = idx("components", i);
    const json& c = comps[i];
    if (!c.is_object()) fail(cp, "expected an object");
    PhaseComponent pc;
    pc.kill = number_or(c, cp, "kill", 0.0);
    pc.center = number_or(c, cp, "center", 0.0);
    pc.gauss = number_or(c, cp, "gauss", 0.0);
    if (pc.kill < 0.0) fail(key(cp, "kill"), "killing rate must be >= 0");
    if (pc.gauss < 0.0) fail(key(cp, "gauss"), "variance must be >= 0");
    if (c.contains("jumps_pos"))
      pc.jumps_pos =
          parse_measure(c["jumps_pos"], key(cp, "jumps_pos"), Side::pos);
    pc.jumps_pos.side = Side::pos;
    if (c.contains("jumps_neg"))
      pc.jumps_neg =
          parse_measure(c["jumps_neg"], key(cp, "jumps_neg"), Side::neg);
    pc.jumps_neg.side = Side::neg;
    s.components.push_back(std::move(pc));
  }

  if (j.contains("trans")) {
    const json& tr = j["trans"];
    if (!tr.is_array() || int(tr.size()) != s.n)
      fail("trans", "expected n rows of measures");
    for (size_t i = 0; i < tr.size(); ++i) {
      const std::string rp = idx("trans", i);
      if (!tr[i].is_array() || int(tr[i].size()) != s.n)
        fail(rp, "expected a row of n measures");
      for (size_t k = 0; k < tr[i].size(); ++k)
        s.trans.push_back(parse_trans_measure(tr[i][k], idx(rp, k)));
    }
  } else {
    s.trans = default_trans(s.n);
  }
  return s;
}

json terms_to_json(const std::vector<ExpPolyTerm>& ts) {
  json a = json::array();
  for (const ExpPolyTerm& t : ts)
    a.push_back({{"w", t.w}, {"p", t.p}, {"beta", t.beta}});
  return a;
}

json measure_to_json(const ExpPolyMeasure& m, Side slot) {
  return {{"atom0", m.atom0},
          {"terms", terms_to_json(m.terms)},
          {"side", slot == Side::pos ? "pos" : "neg"}};
}

json trans_to_json(const TwoSidedMeasure& m) {
  if (m.neg.empty())
    return {{"atom0", m.atom0}, {"terms", terms_to_json(m.pos)}, {"side", "pos"}};
  if (m.pos.empty())
    return {{"atom0", m.atom0}, {"terms", terms_to_json(m.neg)}, {"side", "neg"}};
  return {{"atom0", m.atom0},
          {"terms", terms_to_json(m.pos)},
          {"terms_neg", terms_to_json(m.neg)},
          {"side", "both"}};
}

json spec_to_json(const MapSpec& s) {
  json j;
  j["schema"] = "mapwh/1";
  j["n"] = s.n;
  j["kind"] = s.kind == SpecKind::subordinator ? "subordinator" : "general";
  j["pi"] = s.pi;
  json q = json::array();
  for (int i = 0; i < s.n; ++i) {
    json row = json::array();
    for (int k = 0; k < s.n; ++k) row.push_back(s.q(i, k));
    q.push_back(std::move(row));
  }
  j["Q"] = std::move(q);
  json comps = json::array();
  for (const PhaseComponent& c : s.components)
    comps.push_back({{"kill", c.kill},
                     {"center", c.center},
                     {"gauss", c.gauss},
                     {"jumps_pos", measure_to_json(c.jumps_pos, Side::pos)},
                     {"jumps_neg", measure_to_json(c.jumps_neg, Side::neg)}});
  j["components"] = std::move(comps);
  json tr = json::array();
  for (int i = 0; i < s.n; ++i) {
    json row = json::array();
    for (int k = 0; k < s.n; ++k) row.push_back(trans_to_json(s.F(i, k)));
    tr.push_back(std::move(row));
  }
  j["trans"] = std::move(tr);
  return j;
}

}  // namespace

MapSpec spec_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("", "malformed JSON");
  return parse_spec(j);
}

MapSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return spec_from_json_text(buf.str());
}

std::string spec_to_json_text(const MapSpec& s, int indent) {
  return spec_to_json(s).dump(indent);
}

void save_spec(const MapSpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << spec_to_json_text(s) << "\n";
}

}  // namespace mapwh
