#include <bit>
#include <fstream>
#include <iterator>

#include "causalbait/errors.hpp"
#include "causalbait/trainer.hpp"
#include "config_json.hpp"

namespace causalbait {

namespace {

using ojson = nlohmann::ordered_json;

constexpr char kMagic[4] = {'C', 'B', 'M', 'B'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& buf, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  return v;
}

// Tensors in payload order, with the names recorded in the header.
std::vector<std::pair<std::string, const Matrix*>> tensors_of(const ModelBundle& b, Matrix& mask_raw) {
  std::vector<std::pair<std::string, const Matrix*>> out;
  mask_raw = Matrix::row_vector(b.mask.raw);
  out.emplace_back("mask.raw", &mask_raw);
  auto add_mlp = [&](const std::string& prefix, const MlpParams& net) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      out.emplace_back(prefix + ".W" + std::to_string(l), &net.weights[l].value);
      out.emplace_back(prefix + ".b" + std::to_string(l), &net.biases[l].value);
    }
  };
  for (std::size_t s = 0; s < b.scenario.models.size(); ++s) add_mlp("scenario" + std::to_string(s), b.scenario.models[s]);
  add_mlp("gate", b.gate.params);
  add_mlp("classifier", b.classifier);
  return out;
}

std::vector<Matrix*> slots_of(ModelBundle& b, Matrix& mask_raw) {
  std::vector<Matrix*> out{&mask_raw};
  auto add_mlp = [&](MlpParams& net) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      out.push_back(&net.weights[l].value);
      out.push_back(&net.biases[l].value);
    }
  };
  for (auto& m : b.scenario.models) add_mlp(m);
  add_mlp(b.gate.params);
  add_mlp(b.classifier);
  return out;
}

}  // namespace

void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
  Matrix mask_raw;
  const auto tensors = tensors_of(b, mask_raw);
  ojson h;
  h["config"] = detail::train_config_json(b.config);
  h["manifest"] = ojson::parse(manifest_to_json(b.manifest));
  h["mask"] = {{"mode", to_string(b.mask.mode)}, {"regularizer", to_string(b.mask.regularizer)}};
  ojson scen;
  scen["num_scenarios"] = b.scenario.num_scenarios;
  scen["fit_calls"] = b.scenario.fit_calls;
  scen["model_sizes"] = b.scenario.models.empty() ? std::vector<std::size_t>{} : b.scenario.models.front().sizes;
  scen["num_models"] = b.scenario.models.size();
  scen["assignment"] = b.scenario.assignment;
  scen["ids"] = b.scenario_ids;
  scen["moved_rate_history"] = b.scenario.moved_rate_history;
  h["scenario"] = scen;
  h["gate"] = {{"k_fraction", b.gate.k_fraction},
               {"temperature", b.gate.temperature},
               {"sizes", b.gate.params.sizes},
               {"enabled", b.gate_enabled}};
  h["classifier"] = {{"sizes", b.classifier.sizes}};
  h["tensors"] = ojson::array();
  for (const auto& [name, m] : tensors) h["tensors"].push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});

  const std::string header = h.dump();
  std::string bin(kMagic, 4);
  put_u32(bin, kBundleFormatVersion);
  put_u32(bin, static_cast<std::uint32_t>(header.size()));
  bin += header;
  for (const auto& [name, m] : tensors)
    for (float v : m->storage()) put_u32(bin, std::bit_cast<std::uint32_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out.write(bin.data(), static_cast<std::streamsize>(bin.size()));
  if (!out) throw FileError("write failed for " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  const std::string buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (buf.size() < 4 || buf.compare(0, 4, kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
  if (buf.size() < 12) throw TruncationError(path.string() + ": header truncated");
  const std::uint32_t version = get_u32(buf, 4);
  if (version != kBundleFormatVersion) throw FormatError("unsupported bundle version " + std::to_string(version));
  const std::size_t header_len = get_u32(buf, 8);
  if (buf.size() < 12 + header_len) throw TruncationError(path.string() + ": header truncated");

  ModelBundle b;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> declared;
  try {
    const auto h = ojson::parse(buf.substr(12, header_len));
    detail::read_train_config(h.at("config"), b.config, "bundle config");
    b.manifest = manifest_from_json(h.at("manifest").dump());
    b.mask.mode = parse_mask_mode(h.at("mask").at("mode").get<std::string>());
    b.mask.regularizer = parse_mask_regularizer(h.at("mask").at("regularizer").get<std::string>());
    const auto& scen = h.at("scenario");
    b.scenario.num_scenarios = scen.at("num_scenarios").get<std::size_t>();
    b.scenario.fit_calls = scen.at("fit_calls").get<std::size_t>();
    b.scenario.assignment = scen.at("assignment").get<std::vector<int>>();
    b.scenario_ids = scen.at("ids").get<std::vector<std::string>>();
    b.scenario.moved_rate_history = scen.at("moved_rate_history").get<std::vector<double>>();
    const auto model_sizes = scen.at("model_sizes").get<std::vector<std::size_t>>();
    const auto num_models = scen.at("num_models").get<std::size_t>();
    for (std::size_t s = 0; s < num_models; ++s) b.scenario.models.push_back(zero_mlp<float>(model_sizes));
    const auto& gate = h.at("gate");
    b.gate.k_fraction = gate.at("k_fraction").get<double>();
    b.gate.temperature = gate.at("temperature").get<double>();
    b.gate.params = zero_mlp<float>(gate.at("sizes").get<std::vector<std::size_t>>());
    b.gate_enabled = gate.at("enabled").get<bool>();
    b.classifier = zero_mlp<float>(h.at("classifier").at("sizes").get<std::vector<std::size_t>>());
    for (const auto& t : h.at("tensors"))
      declared.emplace_back(t.at("name").get<std::string>(), t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const std::size_t d = b.manifest.family_spans.empty() ? 0 : b.manifest.family_spans.back().start + b.manifest.family_spans.back().length;

  b.mask.raw.assign(d, 0.0f);
  Matrix mask_raw(1, d);
  Matrix probe;
  const auto expected = tensors_of(b, probe);
  auto slots = slots_of(b, mask_raw);
  if (declared.size() != slots.size()) throw FormatError(path.string() + ": tensor count does not match the header");
  std::size_t off = 12 + header_len;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& [name, rows, cols] = declared[i];
    if (name != expected[i].first || rows != slots[i]->rows() || cols != slots[i]->cols())
      throw FormatError(path.string() + ": tensor '" + name + "' does not match the declared architecture");
    if (buf.size() < off + rows * cols * 4) throw TruncationError(path.string() + ": payload truncated at " + name);
    for (std::size_t k = 0; k < rows * cols; ++k, off += 4) (*slots[i])[k] = std::bit_cast<float>(get_u32(buf, off));
  }
  if (off != buf.size()) throw FormatError(path.string() + ": trailing bytes after the payload");
  b.mask.raw = mask_raw.storage();
  if (b.classifier.input_size() != 2 * d || b.gate.dim() != d)
    throw FormatError(path.string() + ": component dimensions are inconsistent");
  return b;
}

}  // namespace causalbait
