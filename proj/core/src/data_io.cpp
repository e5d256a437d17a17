#include "causalbait/data_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "causalbait/errors.hpp"
#include "causalbait/rng.hpp"

namespace causalbait {

namespace {

using ojson = nlohmann::ordered_json;

constexpr char kMagic[4] = {'C', 'B', 'F', 'V'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& buf, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FileError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileError("write failed for " + p.string());
}

ojson record_label_json(const PostRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["y"] = r.y;
  if (r.scenario) j["scenario"] = *r.scenario;
  if (r.meta) {
    j["meta"] = ojson{{"forwards_per_hour", r.meta->forwards_per_hour},
                      {"viewing_seconds", r.meta->viewing_seconds},
                      {"likes", r.meta->likes}};
  }
  return j;
}

SocialMetadata parse_meta(const ojson& m, const std::string& id) {
  if (!m.is_object()) throw DataError("meta of " + id + " is not an object");
  SocialMetadata out;
  try {
    const auto& fwd = m.at("forwards_per_hour");
    const auto& view = m.at("viewing_seconds");
    const auto& likes = m.at("likes");
    if (!fwd.is_number_unsigned() && !(fwd.is_number_integer() && fwd.get<long long>() >= 0))
      throw DataError("forwards_per_hour of " + id + " must be a non-negative integer");
    if (!likes.is_number_unsigned() && !(likes.is_number_integer() && likes.get<long long>() >= 0))
      throw DataError("likes of " + id + " must be a non-negative integer");
    if (!view.is_number() || view.get<double>() < 0.0 || !std::isfinite(view.get<double>()))
      throw DataError("viewing_seconds of " + id + " must be a non-negative number");
    out.forwards_per_hour = fwd.get<std::uint64_t>();
    out.viewing_seconds = view.get<double>();
    out.likes = likes.get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("meta of " + id + ": " + e.what());
  }
  return out;
}

}  // namespace

FeatureManifest FeatureManifest::single(std::size_t d, const std::string& name) {
  FeatureManifest m;
  m.family_spans.push_back({name, 0, d});
  return m;
}

void FeatureManifest::validate(std::size_t d) const {
  std::size_t pos = 0;
  for (const auto& s : family_spans) {
    if (s.start != pos)
      throw FormatError("manifest span '" + s.name + "' starts at " + std::to_string(s.start) + ", expected " +
                        std::to_string(pos));
    pos += s.length;
  }
  if (pos != d) throw FormatError("manifest spans cover " + std::to_string(pos) + " dims, dataset has " + std::to_string(d));
}

const FamilySpan* FeatureManifest::find(const std::string& name) const {
  for (const auto& s : family_spans)
    if (s.name == name) return &s;
  return nullptr;
}

Matrix Dataset::features() const {
  Matrix x(records.size(), d);
  for (std::size_t i = 0; i < records.size(); ++i) std::copy(records[i].x.begin(), records[i].x.end(), x.row(i));
  return x;
}

std::vector<float> Dataset::labels() const {
  std::vector<float> y(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) y[i] = static_cast<float>(records[i].y);
  return y;
}

void Dataset::validate() const {
  manifest.validate(d);
  std::unordered_set<std::string> ids;
  for (const auto& r : records) {
    if (r.x.size() != d)
      throw DataError("record " + r.id + " has " + std::to_string(r.x.size()) + " features, expected " + std::to_string(d));
    for (float v : r.x)
      if (!std::isfinite(v)) throw DataError("record " + r.id + " has a non-finite feature");
    if (r.y != 0 && r.y != 1) throw LabelError("record " + r.id + " has label " + std::to_string(r.y));
    if (!ids.insert(r.id).second) throw DataError("duplicate id " + r.id);
  }
}

std::string manifest_to_json(const FeatureManifest& m) {
  ojson j;
  j["version"] = m.version;
  j["families"] = ojson::array();
  for (const auto& s : m.family_spans) j["families"].push_back({{"name", s.name}, {"start", s.start}, {"length", s.length}});
  return j.dump();
}

FeatureManifest manifest_from_json(const std::string& text) {
  FeatureManifest m;
  try {
    auto j = ojson::parse(text);
    m.version = j.at("version").get<std::uint32_t>();
    m.family_spans.clear();
    for (const auto& f : j.at("families"))
      m.family_spans.push_back({f.at("name").get<std::string>(), f.at("start").get<std::size_t>(),
                                f.at("length").get<std::size_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return m;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& features_path,
                   const std::filesystem::path& labels_path) {
  ds.validate();
  if (ds.records.size() > UINT32_MAX || ds.d > UINT32_MAX) throw DataError("dataset too large for the feature format");
  std::string bin(kMagic, 4);
  put_u32(bin, kFeatureFormatVersion);
  put_u32(bin, static_cast<std::uint32_t>(ds.records.size()));
  put_u32(bin, static_cast<std::uint32_t>(ds.d));
  bin.reserve(bin.size() + ds.records.size() * ds.d * 4 + 256);
  for (const auto& r : ds.records)
    for (float v : r.x) put_u32(bin, std::bit_cast<std::uint32_t>(v));
  const std::string manifest = manifest_to_json(ds.manifest);
  put_u32(bin, static_cast<std::uint32_t>(manifest.size()));
  bin += manifest;
  write_file(features_path, bin);

  std::string labels;
  for (const auto& r : ds.records) labels += record_label_json(r).dump() + "\n";
  write_file(labels_path, labels);
}

Dataset load_dataset(const std::filesystem::path& features_path, const std::filesystem::path& labels_path) {
  const std::string buf = read_file(features_path);
  if (buf.size() < 4 || buf.compare(0, 4, kMagic, 4) != 0) throw FormatError(features_path.string() + ": bad magic");
  if (buf.size() < 16) throw TruncationError(features_path.string() + ": header truncated");
  const std::uint32_t version = get_u32(buf, 4);
  if (version != kFeatureFormatVersion) throw FormatError("unsupported feature format version " + std::to_string(version));
  const std::uint64_t n = get_u32(buf, 8);
  const std::uint64_t d = get_u32(buf, 12);
  const std::uint64_t payload_end = 16 + n * d * 4;
  if (buf.size() < payload_end + 4)
    throw TruncationError(features_path.string() + ": n=" + std::to_string(n) + ", d=" + std::to_string(d) +
                          " needs more bytes than the file holds");
  const std::uint64_t json_len = get_u32(buf, payload_end);
  if (buf.size() != payload_end + 4 + json_len)
    throw TruncationError(features_path.string() + ": manifest length does not match file size");

  Dataset ds;
  ds.d = d;
  ds.manifest = manifest_from_json(buf.substr(payload_end + 4, json_len));
  ds.manifest.validate(d);
  ds.records.resize(n);
  std::size_t off = 16;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto& x = ds.records[i].x;
    x.resize(d);
    for (std::uint64_t j = 0; j < d; ++j, off += 4) {
      x[j] = std::bit_cast<float>(get_u32(buf, off));
      if (!std::isfinite(x[j]))
        throw DataError("non-finite feature at row " + std::to_string(i) + ", column " + std::to_string(j));
    }
  }

  std::istringstream labels(read_file(labels_path));
  std::string line;
  std::size_t row = 0;
  while (std::getline(labels, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= n) throw AlignmentError("labels file has more lines than the " + std::to_string(n) + " feature rows");
    auto& rec = ds.records[row];
    try {
      auto j = ojson::parse(line);
      rec.id = j.at("id").get<std::string>();
      const auto& y = j.at("y");
      if (!y.is_number_integer() || (y.get<long long>() != 0 && y.get<long long>() != 1))
        throw LabelError("label of " + rec.id + " must be 0 or 1");
      rec.y = y.get<int>();
      if (j.contains("scenario") && !j["scenario"].is_null()) rec.scenario = j["scenario"].get<int>();
      if (j.contains("meta") && !j["meta"].is_null()) rec.meta = parse_meta(j["meta"], rec.id);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("labels line " + std::to_string(row + 1) + ": " + e.what());
    }
    ++row;
  }
  if (row != n)
    throw AlignmentError("labels file has " + std::to_string(row) + " lines for " + std::to_string(n) + " feature rows");
  ds.validate();
  return ds;
}

std::tuple<Dataset, Dataset, Dataset> split_dataset(const Dataset& ds, SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train <= 0.0 || ratios.val <= 0.0 || ratios.test <= 0.0)
    throw ConfigError("split ratios must all be positive");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  const std::size_t n = ds.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.val));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test));
  const std::size_t n_train = n - n_val - n_test;

  auto perm = Rng::derive(seed, Stream::Split).permutation(n);
  Dataset parts[3];
  for (auto& p : parts) {
    p.d = ds.d;
    p.manifest = ds.manifest;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int part = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
    parts[part].records.push_back(ds.records[perm[i]]);
  }
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

Dataset oversample(const Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.records[i].y == 1 ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) throw BalanceError("oversampling needs both classes present");
  Dataset out = ds;
  const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& pool = by_class[minority];
  const std::size_t need = by_class[1 - minority].size() - pool.size();
  Rng rng = Rng::derive(seed, Stream::Oversample);
  for (std::size_t k = 0; k < need; ++k) {
    PostRecord dup = ds.records[pool[rng.below(pool.size())]];
    dup.id += "#dup" + std::to_string(k);
    out.records.push_back(std::move(dup));
  }
  return out;
}

}  // namespace causalbait
