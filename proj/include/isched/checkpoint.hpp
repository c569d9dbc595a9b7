#ifndef ISCHED_CHECKPOINT_HPP_
#define ISCHED_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "isched/qnet.hpp"
#include "isched/selection.hpp"

namespace isched {

/// Textual tensor container: a JSON manifest (format version, network kind,
/// layer shapes, seed, free-form config echo) followed by every tensor as
/// hexadecimal floating-point strings, so values round-trip bitwise.
struct Checkpoint {
  std::string kind;  // "qnet" or "selector"
  std::uint64_t seed = 0;
  NetConfig config;
  std::map<std::string, std::string> notes;
  std::vector<std::pair<std::string, nn::Matrix>> tensors;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_qnet(const std::string& path, const QNetworkParams& params, std::uint64_t seed,
               const std::map<std::string, std::string>& notes = {});
QNetworkParams load_qnet(const std::string& path);

void save_selector(const std::string& path, const SelectorParams& params, std::uint64_t seed,
                   const std::map<std::string, std::string>& notes = {});
SelectorParams load_selector(const std::string& path);

}  // namespace isched

#endif  // ISCHED_CHECKPOINT_HPP_
