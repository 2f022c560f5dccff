#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "segfuse/types.hpp"

namespace segfuse::io {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint32_t kFormatVersion = 1;

// Binary layouts (all integers and floats little-endian):
//   .pmap  "PMAP" u32 version u32 H u32 W u16 |C|  then H*W*|C| float32, class fastest
//   .lmap  "LMAP" u32 version u32 H u32 W u16 |C|  then H*W u16 ids, 65535 = unlabeled
//   .fmap  "FMAP" u32 version u32 H u32 W u16 d    then H*W*d float64, dim fastest
inline constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 2;

struct ProbMapReadOptions {
  /// Treat the body as raw logits and apply a per-pixel softmax.
  bool renormalize = false;
};

ProbMap read_probmap(std::span<const std::uint8_t> bytes, ProbMapReadOptions options = {});
Bytes write_probmap(const ProbMap& map);

LabelMap read_labelmap(std::span<const std::uint8_t> bytes);
Bytes write_labelmap(const LabelMap& map);

FeatureMap read_featuremap(std::span<const std::uint8_t> bytes);
Bytes write_featuremap(const FeatureMap& map);

/// Four-byte magic of a serialized map, or empty if too short.
std::string_view sniff_magic(std::span<const std::uint8_t> bytes);

// JSON and CSV text formats.
nlohmann::json policy_to_json(const FusionPolicy& policy);
FusionPolicy policy_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const IoUReport& report);
IoUReport report_from_json(const nlohmann::json& j);

/// CSV with header "class,teacher,rho"; undefined cells have an empty rho field.
std::string certainty_to_csv(const CertaintyTable& table);
CertaintyTable certainty_from_csv(std::string_view text);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

// Filesystem helpers.
Bytes read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

ProbMap load_probmap(const std::filesystem::path& path, ProbMapReadOptions options = {});
LabelMap load_labelmap(const std::filesystem::path& path);
FeatureMap load_featuremap(const std::filesystem::path& path);

}  // namespace segfuse::io
