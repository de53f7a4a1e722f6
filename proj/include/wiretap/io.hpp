#ifndef WIRETAP_IO_HPP
#define WIRETAP_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wiretap/gaussmodel.hpp"
#include "wiretap/protocol.hpp"

namespace wiretap {

/// Bad scenario or input file; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Samples {
  Vector a;
  Vector b;
};

/// CSV with header `a,b`.
Samples read_samples_csv(std::istream& in);
Samples read_samples_csv(const std::string& path);
void write_samples_csv(std::ostream& out, const Vector& a, const Vector& b);

struct Scenario {
  ChannelParams channel;
  NoiseSpec noise = NoiseSpec::gaussian(0);
  ProtocolConfig protocol;
  std::uint64_t seed = 0;
};

/// Parses and validates a scenario document. Unknown keys and type errors
/// are reported with the line they occur on. A relative code_path is
/// resolved against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = "");
Scenario load_scenario(const std::string& path);

/// Lowercase hex SHA-256 of the key's hex serialization.
std::string key_digest(const BitString& key);

nlohmann::ordered_json to_json(const Scenario& scenario);
nlohmann::ordered_json to_json(const SecurityCertificate& cert);
nlohmann::ordered_json run_record(const Scenario& scenario, std::uint64_t run_seed, const ProtocolOutcome& outcome,
                                  bool emit_keys);

}  // namespace wiretap

#endif  // WIRETAP_IO_HPP
