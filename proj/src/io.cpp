#include "segfuse/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "segfuse/error.hpp"

namespace segfuse::io {

namespace {

class Writer {
 public:
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xff));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void reserve(std::size_t n) { out_.reserve(n); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("unexpected end of data");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Header {
  Extent extent;
  std::size_t inner;
};

Header read_header(Reader& r, std::span<const std::uint8_t> bytes, std::string_view magic,
                   std::size_t element_bytes, bool per_pixel_inner) {
  if (bytes.size() < kHeaderSize) throw FormatError("file shorter than header");
  if (sniff_magic(bytes) != magic) {
    throw FormatError("bad magic: expected " + std::string(magic));
  }
  r.u32();  // magic, already checked
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(version));
  }
  const std::uint64_t h = r.u32();
  const std::uint64_t w = r.u32();
  const std::uint64_t inner = r.u16();
  if (h == 0 || w == 0) throw FormatError("zero height or width");
  if (per_pixel_inner && inner == 0) throw FormatError("zero inner dimension");

  // H, W < 2^32 and inner, element_bytes small, so only the final products can overflow.
  const std::uint64_t px = h * w;
  const std::uint64_t per_px = (per_pixel_inner ? inner : 1) * element_bytes;
  if (px > std::numeric_limits<std::uint64_t>::max() / per_px ||
      px * per_px > std::numeric_limits<std::size_t>::max()) {
    throw FormatError("dimension overflow");
  }
  if (r.remaining() != px * per_px) {
    throw FormatError("body length " + std::to_string(r.remaining()) + " does not match header (" +
                      std::to_string(px * per_px) + " bytes expected)");
  }
  return Header{Extent{static_cast<std::size_t>(h), static_cast<std::size_t>(w)},
                static_cast<std::size_t>(inner)};
}

void write_header(Writer& w, std::string_view magic, Extent extent, std::size_t inner) {
  if (extent.height > UINT32_MAX || extent.width > UINT32_MAX || inner > UINT16_MAX) {
    throw ValidationError("dimensions exceed the serialized header range");
  }
  w.magic(magic);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(extent.height));
  w.u32(static_cast<std::uint32_t>(extent.width));
  w.u16(static_cast<std::uint16_t>(inner));
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty() || s == "nan" || s == "NaN") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("invalid number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("invalid index '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view sniff_magic(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return {};
  return std::string_view(reinterpret_cast<const char*>(bytes.data()), 4);
}

ProbMap read_probmap(std::span<const std::uint8_t> bytes, ProbMapReadOptions options) {
  Reader r(bytes);
  const Header h = read_header(r, bytes, "PMAP", 4, true);
  std::vector<float> values(h.extent.pixels() * h.inner);
  for (float& v : values) v = r.f32();
  if (options.renormalize) return ProbMap::from_logits(h.extent, h.inner, values);
  return ProbMap(h.extent, h.inner, std::move(values));
}

Bytes write_probmap(const ProbMap& map) {
  Writer w;
  w.reserve(kHeaderSize + map.values().size() * 4);
  write_header(w, "PMAP", map.extent(), map.classes());
  for (float v : map.values()) w.f32(v);
  return w.take();
}

LabelMap read_labelmap(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes, "LMAP", 2, false);
  std::vector<std::uint16_t> values(h.extent.pixels());
  for (auto& v : values) v = r.u16();
  return LabelMap(h.extent, h.inner, std::move(values));
}

Bytes write_labelmap(const LabelMap& map) {
  Writer w;
  w.reserve(kHeaderSize + map.pixels() * 2);
  write_header(w, "LMAP", map.extent(), map.classes());
  for (auto v : map.values()) w.u16(v);
  return w.take();
}

FeatureMap read_featuremap(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes, "FMAP", 8, true);
  std::vector<double> values(h.extent.pixels() * h.inner);
  for (double& v : values) v = r.f64();
  return FeatureMap(h.extent, h.inner, std::move(values));
}

Bytes write_featuremap(const FeatureMap& map) {
  Writer w;
  w.reserve(kHeaderSize + map.values().size() * 8);
  write_header(w, "FMAP", map.extent(), map.dims());
  for (double v : map.values()) w.f64(v);
  return w.take();
}

nlohmann::json policy_to_json(const FusionPolicy& policy) {
  nlohmann::json assignment = nlohmann::json::array();
  for (auto t : policy.assignment()) assignment.push_back(t);
  return {{"classes", policy.classes()}, {"teachers", policy.teachers()}, {"assignment", assignment}};
}

FusionPolicy policy_from_json(const nlohmann::json& j) {
  try {
    const auto classes = j.at("classes").get<std::size_t>();
    const auto teachers = j.at("teachers").get<std::size_t>();
    auto assignment = j.at("assignment").get<std::vector<std::size_t>>();
    if (assignment.size() != classes) {
      throw FormatError("policy: assignment length does not match \"classes\"");
    }
    return FusionPolicy(teachers, std::move(assignment));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("policy json: ") + e.what());
  }
}

nlohmann::json report_to_json(const IoUReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& v : report.per_class()) {
    per_class.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  }
  return {{"classes", report.classes()},
          {"per_class", per_class},
          {"miou", report.miou() ? nlohmann::json(*report.miou()) : nlohmann::json(nullptr)}};
}

IoUReport report_from_json(const nlohmann::json& j) {
  try {
    const auto& arr = j.at("per_class");
    std::vector<std::optional<double>> per_class;
    for (const auto& v : arr) {
      per_class.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
    if (j.contains("classes") && j.at("classes").get<std::size_t>() != per_class.size()) {
      throw FormatError("iou report: \"classes\" does not match per_class length");
    }
    IoUReport report(std::move(per_class));
    if (j.contains("miou") && !j.at("miou").is_null()) {
      const double stated = j.at("miou").get<double>();
      if (!report.miou() || std::abs(*report.miou() - stated) > 1e-12) {
        throw FormatError("iou report: miou is not the mean of defined per-class entries");
      }
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("iou report json: ") + e.what());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

std::string certainty_to_csv(const CertaintyTable& table) {
  std::string out = "class,teacher,rho\n";
  for (std::size_t c = 0; c < table.classes(); ++c) {
    for (std::size_t t = 0; t < table.teachers(); ++t) {
      out += std::to_string(c) + "," + std::to_string(t) + ",";
      if (const auto& v = table.at(c, t)) out += format_double(*v);
      out += "\n";
    }
  }
  return out;
}

CertaintyTable certainty_from_csv(std::string_view text) {
  struct Row {
    std::size_t c, t;
    std::optional<double> rho;
  };
  std::vector<Row> rows;
  std::size_t classes = 0, teachers = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim_cr(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != "class,teacher,rho") throw FormatError("certainty csv: bad header");
      header = false;
      continue;
    }
    const auto a = line.find(',');
    const auto b = a == std::string_view::npos ? a : line.find(',', a + 1);
    if (b == std::string_view::npos) throw FormatError("certainty csv: expected 3 fields");
    Row row{parse_index(line.substr(0, a)), parse_index(line.substr(a + 1, b - a - 1)),
            parse_double(line.substr(b + 1))};
    classes = std::max(classes, row.c + 1);
    teachers = std::max(teachers, row.t + 1);
    rows.push_back(row);
  }
  if (header) throw FormatError("certainty csv: missing header");
  if (rows.empty()) throw FormatError("certainty csv: no rows");
  if (rows.size() != classes * teachers) {
    throw FormatError("certainty csv: table is not a complete class x teacher grid");
  }
  std::vector<std::optional<double>> cells(classes * teachers);
  std::vector<bool> seen(classes * teachers, false);
  for (const auto& row : rows) {
    const auto i = row.c * teachers + row.t;
    if (seen[i]) throw FormatError("certainty csv: duplicate cell");
    seen[i] = true;
    cells[i] = row.rho;
  }
  return CertaintyTable(classes, teachers, std::move(cells));
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

std::string read_text(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ProbMap load_probmap(const std::filesystem::path& path, ProbMapReadOptions options) {
  return read_probmap(read_file(path), options);
}

LabelMap load_labelmap(const std::filesystem::path& path) { return read_labelmap(read_file(path)); }

FeatureMap load_featuremap(const std::filesystem::path& path) {
  return read_featuremap(read_file(path));
}

}  // namespace segfuse::io
