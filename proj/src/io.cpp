#include "wiretap/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace wiretap {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& field, std::size_t line) {
  double value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ConfigError("line " + std::to_string(line) + ": not a finite number: '" + field + "'");
  return value;
}

}  // namespace

Samples read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "a,b") throw ConfigError("line 1: expected header 'a,b'");
  std::vector<double> a, b;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected two comma-separated fields");
    a.push_back(parse_double(trim(row.substr(0, comma)), lineno));
    b.push_back(parse_double(trim(row.substr(comma + 1)), lineno));
  }
  Samples s;
  s.a = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
  s.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  return s;
}

Samples read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_samples_csv(in);
}

void write_samples_csv(std::ostream& out, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("write_samples_csv: length mismatch");
  out << "a,b\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.size(); ++i) out << a(i) << ',' << b(i) << '\n';
}

namespace {

using Path = std::vector<std::string>;

std::string render(const Path& path) {
  std::string out;
  for (const auto& p : path) out += "/" + p;
  return out.empty() ? "/" : out;
}

std::size_t line_at(const std::string& text, std::size_t pos) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(pos, text.size())), '\n'));
}

// Finds the line of a key path by scanning for each quoted key in turn.
// Array indices do not move the cursor, which is precise enough for
// pointing a reader at the offending entry.
std::size_t line_of(const std::string& text, const Path& path) {
  std::size_t pos = 0;
  for (const auto& token : path) {
    if (!token.empty() && std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::string quoted = "\"" + token + "\"";
    std::size_t found = pos;
    while ((found = text.find(quoted, found)) != std::string::npos) {
      std::size_t after = found + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      found += quoted.size();
    }
    if (found == std::string::npos) break;
    pos = found;
  }
  return line_at(text, pos);
}

class SchemaReader {
 public:
  explicit SchemaReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const Path& path, const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_of(text_, path)) + " (" + render(path) + "): " + msg);
  }

  const json& object(const json& j, const Path& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }))
        fail(extend(path, key), "unknown key '" + key + "'");
    }
    return j;
  }

  const json& member(const json& j, const Path& path, const std::string& key) const {
    if (!j.contains(key)) fail(path, "missing required key '" + key + "'");
    return j.at(key);
  }

  double number(const json& j, const Path& path, const std::string& key) const {
    const json& v = member(j, path, key);
    if (!v.is_number()) fail(extend(path, key), "expected a number");
    return v.get<double>();
  }
  double number_or(const json& j, const Path& path, const std::string& key, double fallback) const {
    return j.contains(key) ? number(j, path, key) : fallback;
  }

  std::uint64_t count(const json& j, const Path& path, const std::string& key) const {
    const json& v = member(j, path, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(extend(path, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count_or(const json& j, const Path& path, const std::string& key, std::uint64_t fallback) const {
    return j.contains(key) ? count(j, path, key) : fallback;
  }

  bool flag_or(const json& j, const Path& path, const std::string& key, bool fallback) const {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) fail(extend(path, key), "expected true or false");
    return j.at(key).get<bool>();
  }

  std::string string(const json& j, const Path& path, const std::string& key) const {
    const json& v = member(j, path, key);
    if (!v.is_string()) fail(extend(path, key), "expected a string");
    return v.get<std::string>();
  }

  static Path extend(Path path, const std::string& key) {
    path.push_back(key);
    return path;
  }

 private:
  const std::string& text_;
};

NoiseSpec parse_noise(const SchemaReader& r, const json& j, const Path& path) {
  if (!j.is_object()) r.fail(path, "expected an object");
  const std::string variant = r.string(j, path, "variant");
  try {
    if (variant == "gaussian") {
      r.object(j, path, {"variant", "v_Y"});
      const double v = r.number(j, path, "v_Y");
      if (v < 0) r.fail(SchemaReader::extend(path, "v_Y"), "v_Y must be non-negative");
      return NoiseSpec::gaussian(v);
    }
    if (variant == "mixture") {
      r.object(j, path, {"variant", "components"});
      const Path cpath = SchemaReader::extend(path, "components");
      const json& comps = r.member(j, path, "components");
      if (!comps.is_array() || comps.empty()) r.fail(cpath, "expected a non-empty array");
      std::vector<NoiseSpec::Component> out;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const Path p = SchemaReader::extend(cpath, std::to_string(i));
        r.object(comps[i], p, {"weight", "mean", "stdev"});
        out.push_back({r.number(comps[i], p, "weight"), r.number(comps[i], p, "mean"), r.number(comps[i], p, "stdev")});
      }
      return NoiseSpec::mixture(std::move(out));
    }
    if (variant == "empirical") {
      r.object(j, path, {"variant", "values"});
      const json& vals = r.member(j, path, "values");
      if (!vals.is_array() || vals.empty()) r.fail(SchemaReader::extend(path, "values"), "expected a non-empty array");
      std::vector<double> out;
      for (const auto& v : vals) {
        if (!v.is_number()) r.fail(SchemaReader::extend(path, "values"), "values must be numbers");
        out.push_back(v.get<double>());
      }
      return NoiseSpec::empirical(std::move(out));
    }
  } catch (const std::invalid_argument& e) {
    r.fail(path, e.what());
  }
  r.fail(SchemaReader::extend(path, "variant"), "unknown noise variant '" + variant + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  const SchemaReader r(text);
  r.object(doc, {}, {"seed", "channel", "noise", "protocol"});
  Scenario s;
  s.seed = r.count_or(doc, {}, "seed", 0);

  const Path cpath{"channel"};
  const json& ch = r.object(r.member(doc, {}, "channel"), cpath, {"a_B", "b_B", "e_B", "a_E", "b_E"});
  s.channel = {r.number(ch, cpath, "a_B"), r.number(ch, cpath, "b_B"), r.number_or(ch, cpath, "e_B", 0.0),
               r.number(ch, cpath, "a_E"), r.number(ch, cpath, "b_E")};
  try {
    s.channel.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(cpath, e.what());
  }

  s.noise = parse_noise(r, r.member(doc, {}, "noise"), {"noise"});

  const Path ppath{"protocol"};
  if (doc.contains("protocol")) {
    const json& pj = r.object(doc.at("protocol"), ppath,
                              {"n", "l", "epsilon", "target", "m2", "code_path", "code", "k_auth", "subtract_auth",
                               "post_selection", "max_bp_iters", "fault_flips", "record_eve_view"});
    ProtocolConfig& p = s.protocol;
    p.n = r.count_or(pj, ppath, "n", p.n);
    p.l = r.count_or(pj, ppath, "l", p.l);
    p.epsilon = r.number_or(pj, ppath, "epsilon", p.epsilon);
    p.security_target_log2 = r.number_or(pj, ppath, "target", p.security_target_log2);
    p.m2 = r.count_or(pj, ppath, "m2", p.m2);
    p.k_auth = r.count_or(pj, ppath, "k_auth", p.k_auth);
    p.subtract_auth = r.flag_or(pj, ppath, "subtract_auth", p.subtract_auth);
    p.post_selection = r.flag_or(pj, ppath, "post_selection", p.post_selection);
    p.max_bp_iters = static_cast<int>(r.count_or(pj, ppath, "max_bp_iters", static_cast<std::uint64_t>(p.max_bp_iters)));
    p.fault_flips = r.count_or(pj, ppath, "fault_flips", p.fault_flips);
    p.record_eve_view = r.flag_or(pj, ppath, "record_eve_view", p.record_eve_view);
    if (pj.contains("code_path") && pj.contains("code"))
      r.fail(ppath, "give either code_path or code, not both");
    if (pj.contains("code_path")) {
      std::filesystem::path cp = r.string(pj, ppath, "code_path");
      if (cp.is_relative() && !base_dir.empty()) cp = std::filesystem::path(base_dir) / cp;
      p.code.alist_path = cp.string();
    }
    if (pj.contains("code")) {
      const Path gpath = SchemaReader::extend(ppath, "code");
      const json& gj = r.object(pj.at("code"), gpath, {"n_code", "wc", "wr", "seed"});
      p.code.n_code = r.count_or(gj, gpath, "n_code", p.code.n_code);
      p.code.wc = r.count_or(gj, gpath, "wc", p.code.wc);
      p.code.wr = r.count_or(gj, gpath, "wr", p.code.wr);
      p.code.seed = r.count_or(gj, gpath, "seed", p.code.seed);
    }
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      r.fail(ppath, e.what());
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string key_digest(const BitString& key) {
  const std::string hex = key.to_hex();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(hex.data(), hex.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(md[i]);
  return out.str();
}

ordered_json to_json(const Scenario& s) {
  ordered_json noise;
  std::visit(
      [&noise](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NoiseSpec::Gaussian>) {
          noise = {{"variant", "gaussian"}, {"v_Y", k.variance}};
        } else if constexpr (std::is_same_v<T, NoiseSpec::Mixture>) {
          noise = {{"variant", "mixture"}, {"components", ordered_json::array()}};
          for (const auto& c : k.components)
            noise["components"].push_back({{"weight", c.weight}, {"mean", c.mean}, {"stdev", c.stdev}});
        } else {
          noise = {{"variant", "empirical"}, {"values", k.values}};
        }
      },
      s.noise.kind());
  const ProtocolConfig& p = s.protocol;
  ordered_json proto = {{"n", p.n}, {"l", p.l}, {"epsilon", p.epsilon}, {"target", p.security_target_log2},
                        {"m2", p.m2}};
  if (!p.code.alist_path.empty())
    proto["code_path"] = p.code.alist_path;
  else
    proto["code"] = {{"n_code", p.code.n_code}, {"wc", p.code.wc}, {"wr", p.code.wr}, {"seed", p.code.seed}};
  proto["k_auth"] = p.k_auth;
  proto["subtract_auth"] = p.subtract_auth;
  proto["post_selection"] = p.post_selection;
  proto["max_bp_iters"] = p.max_bp_iters;
  proto["fault_flips"] = p.fault_flips;
  proto["record_eve_view"] = p.record_eve_view;
  return {{"seed", s.seed},
          {"channel",
           {{"a_B", s.channel.a_B}, {"b_B", s.channel.b_B}, {"e_B", s.channel.e_B}, {"a_E", s.channel.a_E},
            {"b_E", s.channel.b_E}}},
          {"noise", noise},
          {"protocol", proto}};
}

ordered_json to_json(const SecurityCertificate& c) {
  return {{"criterion", c.criterion == Criterion::VariationalDistance ? "variational_distance" : "modified_mutual_info"},
          {"s_star", c.s_star},
          {"log2_bound", c.log2_bound},
          {"n", c.n},
          {"m1", c.m1},
          {"padding", c.padding},
          {"underline", c.underline},
          {"confidence", c.confidence}};
}

ordered_json run_record(const Scenario& scenario, std::uint64_t run_seed, const ProtocolOutcome& o, bool emit_keys) {
  const Transcript& t = o.transcript;
  const EstimateBundle& b = o.bundle;
  ordered_json rec;
  rec["seed"] = run_seed;
  rec["status"] = to_string(o.status);
  rec["abort_reason"] = to_string(o.abort_reason);
  rec["detail"] = o.detail;
  rec["config"] = to_json(scenario);
  rec["estimates"] = {{"e_hat", b.e_hat},       {"v_hat", b.v_hat}, {"c_hat", b.c_hat},
                      {"v_ab_hat", b.v_ab_hat}, {"w_hat", b.w_hat}, {"l", b.l},
                      {"epsilon", b.epsilon},
                      {"branch", o.branch == EveBranch::Prime ? "prime" : "double_prime"},
                      {"mi_ab", o.mi_ab_estimate}};
  rec["transcript"] = {{"sampling_seed", t.sampling_seed},
                       {"estimation_rounds", t.est1_a.size() + t.est2_a.size()},
                       {"e_hat", t.e_hat},
                       {"v_hat", t.v_hat},
                       {"c_hat", t.c_hat},
                       {"m1", t.m1},
                       {"m2", t.m2},
                       {"alpha", t.alpha.to_hex()},
                       {"pa_seed", t.pa_seed.to_hex()},
                       {"verify_seed", t.verify_seed.to_hex()},
                       {"alice_tag", t.alice_tag.to_hex()},
                       {"bob_tag", t.bob_tag.to_hex()}};
  rec["code"] = {{"dim_c", o.dim_c}, {"blocks", o.blocks}, {"blocks_converged", o.blocks_converged}};
  ordered_json key = {{"length", o.alice_key.size()}, {"net_length", o.net_key_length}};
  if (o.status == Status::Success) {
    key["alice_sha256"] = key_digest(o.alice_key);
    key["bob_sha256"] = key_digest(o.bob_key);
    if (emit_keys) {
      key["alice"] = o.alice_key.to_hex();
      key["bob"] = o.bob_key.to_hex();
    }
  }
  rec["key"] = key;
  rec["auth_failure"] = o.auth_failure;
  if (o.has_certificates)
    rec["certificates"] = {{"d", to_json(o.certificates.d)}, {"iprime", to_json(o.certificates.iprime)}};
  else
    rec["certificates"] = nullptr;
  return rec;
}

}  // namespace wiretap
