#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wiretap/io.hpp"

using namespace wiretap;
namespace fs = std::filesystem;

namespace {

const std::string kData = WIRETAP_DATA_DIR;
const std::string kCli = WIRETAP_CLI;

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p);

Run run(const std::string& args) {
  const fs::path err = fs::temp_directory_path() / "wiretap_cli_stderr.txt";
  const std::string cmd = kCli + " " + args + " 2>" + err.string();
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out, slurp(err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wiretap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string message_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kScenario = R"({
  "seed": 4,
  "channel": {"a_B": 3.0, "b_B": 1.0, "e_B": 0.5, "a_E": 1.4, "b_E": 3.0},
  "noise": {"variant": "gaussian", "v_Y": 0.2},
  "protocol": {"n": 8192, "l": 2000, "m2": 32, "target": -20,
               "code": {"n_code": 4096, "wc": 3, "wr": 4, "seed": 7}}
})";

}  // namespace

TEST_CASE("scenario parsing") {
  const Scenario s = parse_scenario(kScenario);
  CHECK(s.seed == 4);
  CHECK(s.channel.e_B == 0.5);
  CHECK(s.protocol.n == 8192);
  CHECK(s.protocol.m2 == 32);
  CHECK(s.protocol.security_target_log2 == -20);
  CHECK(s.protocol.code.seed == 7);
  CHECK(s.protocol.epsilon == 5e-5);

  const Scenario mix = load_scenario(kData + "/strong_bob_alist.json");
  CHECK(mix.protocol.code.alist_path == kData + "/gallager4096.alist");
  CHECK(mix.noise.variance() > 0);

  // round trip through the serialized form
  const Scenario back = parse_scenario(to_json(s).dump());
  CHECK(back.channel.a_E == s.channel.a_E);
  CHECK(back.protocol.l == s.protocol.l);
}

TEST_CASE("scenario errors carry line numbers") {
  std::string bad = kScenario;
  bad.replace(bad.find("\"a_E\": 1.4"), 10, "\"a_E\": 0.0");
  CHECK(message_of(bad).find("line 3") != std::string::npos);
  CHECK(message_of(bad).find("a_E") != std::string::npos);

  std::string unknown = kScenario;
  unknown.replace(unknown.find("\"m2\": 32"), 8, "\"m3\": 32");
  CHECK(message_of(unknown).find("line 5") != std::string::npos);
  CHECK(message_of(unknown).find("m3") != std::string::npos);

  std::string typed = kScenario;
  typed.replace(typed.find("\"n\": 8192"), 9, "\"n\": \"x\"");
  CHECK(message_of(typed).find("line 5") != std::string::npos);

  CHECK(message_of("{\n  \"seed\": 1,\n  \"channel\": {\n}").find("line") != std::string::npos);
  CHECK(message_of("{\"seed\": 1}").find("channel") != std::string::npos);

  std::string variant = kScenario;
  variant.replace(variant.find("\"gaussian\""), 10, "\"cauchy\"");
  CHECK(message_of(variant).find("line 4") != std::string::npos);
}

TEST_CASE("sample CSV") {
  std::istringstream good("a,b\n1,2\n-0.5,3e-1\n");
  const Samples s = read_samples_csv(good);
  CHECK(s.a.size() == 2);
  CHECK(s.b(1) == 0.3);

  std::istringstream header("x,y\n1,2\n");
  CHECK_THROWS_AS(read_samples_csv(header), ConfigError);
  std::istringstream broken("a,b\n1,2\n3,oops\n");
  try {
    read_samples_csv(broken);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  Vector a(3), b(3);
  a << 0.1, -2.0, 1.0 / 3.0;
  b << 5.0, 1e-300, -7.25;
  std::stringstream ss;
  write_samples_csv(ss, a, b);
  const Samples back = read_samples_csv(ss);
  CHECK(back.a == a);
  CHECK(back.b == b);
}

TEST_CASE("key digest") {
  // digest of the hex text, here "" and "a"
  CHECK(key_digest(BitString(0)) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(key_digest(BitString::from_bits({1, 0, 1, 0})) ==
        "ca978112ca1bbdcafac231b39a23dc4da786eff8147c4e72b9807785afee48bb");
}

TEST_CASE("simulate: determinism and exit codes") {
  const fs::path d1 = scratch("sim1"), d2 = scratch("sim2");
  const std::string scen = kData + "/strong_bob.json";
  const Run r1 = run("simulate --scenario " + scen + " --runs 2 --out " + d1.string());
  const Run r2 = run("simulate --scenario " + scen + " --runs 2 --out " + d2.string());
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  const std::string summary = slurp(d1 / "summary.csv");
  CHECK(summary.rfind("seed,status,key_len,d_bound_log2,iprime_bound_log2\n", 0) == 0);
  CHECK(summary == slurp(d2 / "summary.csv"));
  CHECK(slurp(d1 / "run_1.json") == slurp(d2 / "run_1.json"));
  CHECK(slurp(d1 / "run_2.json") == slurp(d2 / "run_2.json"));

  const auto record = nlohmann::json::parse(slurp(d1 / "run_1.json"));
  CHECK(record["status"] == "success");
  CHECK_FALSE(record["key"].contains("alice"));
  CHECK(record["key"]["alice_sha256"] == record["key"]["bob_sha256"]);

  const fs::path d3 = scratch("keygen");
  CHECK(run("keygen --scenario " + scen + " --runs 1 --out " + d3.string()).code == 0);
  CHECK(nlohmann::json::parse(slurp(d3 / "run_1.json"))["key"].contains("alice"));

  CHECK(run("simulate --scenario " + kData + "/typical.json --runs 1").code == 1);
  CHECK(run("simulate --runs 1").code == 2);
  CHECK(run("frobnicate").code == 2);

  const fs::path bad = scratch("bad") / "bad.json";
  std::string text = kScenario;
  text.replace(text.find("\"a_E\": 1.4"), 10, "\"a_E\": 0.0");
  std::ofstream(bad) << text;
  const Run invalid = run("simulate --scenario " + bad.string());
  CHECK(invalid.code == 2);
  CHECK(invalid.err.find("a_E") != std::string::npos);
}

TEST_CASE("curves") {
  const Run rate = run("rate-curve --x-min 0 --x-max 1 --steps 16");
  CHECK(rate.code == 0);
  std::istringstream in(rate.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,rate,mi_ab,mi_eb");
  int rows = 0;
  double prev = 1;
  while (std::getline(in, line)) {
    double x, r, ab, eb;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &r, &ab, &eb) == 4);
    CHECK(r <= prev + 1e-12);
    if (std::abs(x - 0.2) < 1e-12) CHECK(std::abs(r - 0.108) <= 0.001);
    if (std::abs(x - 2.0 / 3.0) < 1e-12) CHECK(std::abs(r) <= 0.001);
    prev = r;
    ++rows;
  }
  CHECK(rows == 16);

  const fs::path out = scratch("bound") / "bound.csv";
  const Run bound = run("bound-curve --s-min 0.001 --s-max 0.5 --steps 201 --out " + out.string());
  CHECK(bound.code == 0);
  std::ifstream csv(out);
  std::getline(csv, line);
  CHECK(line == "s,log2_bound");
  std::vector<double> s, v;
  while (std::getline(csv, line)) {
    double a, b;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &a, &b) == 2);
    s.push_back(a);
    v.push_back(b);
  }
  REQUIRE(v.size() == 201);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i - 1] + v[i + 1] - 2 * v[i] >= -1e-3 * std::abs(v[i]));

  const Run near_zero = run("bound-curve --s-min 1e-8 --s-max 2e-8 --steps 2");
  REQUIRE(near_zero.code == 0);
  double s0, v0;
  REQUIRE(std::sscanf(near_zero.out.substr(near_zero.out.find('\n') + 1).c_str(), "%lf,%lf", &s0, &v0) == 2);
  CHECK(v0 == doctest::Approx(std::log2(3.0)).epsilon(1e-3));
  CHECK(bound.err.find("argmin") != std::string::npos);
}

TEST_CASE("sample and estimate") {
  const fs::path dir = scratch("estimate");
  const fs::path csv = dir / "samples.csv";
  CHECK(run("sample --scenario " + kData + "/typical.json --rounds 100000 --seed 3 --out " + csv.string()).code == 0);
  const Run est = run("estimate --samples " + csv.string() + " --scenario " + kData + "/typical.json");
  REQUIRE(est.code == 0);
  const auto report = nlohmann::json::parse(est.out);
  const double c = report["c_hat"];
  const double lo = report["c_interval"][0], hi = report["c_interval"][1];
  CHECK(lo <= std::sqrt(2.0));
  CHECK(std::sqrt(2.0) <= hi);
  CHECK(std::abs(c - std::sqrt(2.0)) < 0.05);
  CHECK(report.contains("ks_error_bound"));
  CHECK(report["branch"] == "prime");

  CHECK(run("estimate --samples " + csv.string() + " --epsilon 0.5").code == 2);

  const fs::path flat = dir / "flat.csv";
  std::ofstream(flat) << "a,b\n1,2\n-1,2\n0.5,2\n-0.3,2\n";
  const Run constant = run("estimate --samples " + flat.string());
  REQUIRE(constant.code == 0);
  const auto rep = nlohmann::json::parse(constant.out);
  CHECK(rep["v_hat"] == 0.0);
  CHECK(rep["c_hat"] == 0.0);
  CHECK(rep["branch"] == "double_prime");

  const fs::path broken = dir / "broken.csv";
  std::ofstream(broken) << "a,b\n1,2\n1\n";
  CHECK(run("estimate --samples " + broken.string()).code == 2);
}
