#include "specgrid/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "specgrid/io.hpp"

namespace specgrid {
namespace {

constexpr const char* kMagic = "DGCKPT1";

RawTensor weight_blob(const ConvLayer<float>::Matrix& w) {
  RawTensor t{static_cast<std::uint32_t>(w.rows()), static_cast<std::uint32_t>(w.cols() / 9), 9, {}};
  t.values.resize(w.size());
  // Row-major (out, in, k) matches the in-memory row layout [in][ky][kx].
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(t.values.data(), w.rows(),
                                                                                    w.cols()) = w;
  return t;
}

RawTensor bias_blob(const ConvLayer<float>::Vector& b) {
  return RawTensor{1, 1, static_cast<std::uint32_t>(b.size()), std::vector<float>(b.data(), b.data() + b.size())};
}

void add_params(std::vector<std::pair<std::string, RawTensor>>& blobs, const DgnetParams<float>& p,
                const std::string& prefix) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string base = prefix + "layer" + std::to_string(i);
    blobs.emplace_back(base + ".weight", weight_blob(p.layers[i].weight));
    if (p.layers[i].has_bias()) blobs.emplace_back(base + ".bias", bias_blob(p.layers[i].bias));
  }
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<Index> split_indices(const std::string& s) {
  std::vector<Index> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoll(item));
  }
  return out;
}

void fill_params(DgnetParams<float>& p, const std::map<std::string, RawTensor>& blobs, const std::string& prefix) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto& layer = p.layers[i];
    const std::string base = prefix + "layer" + std::to_string(i);
    auto w = blobs.find(base + ".weight");
    if (w == blobs.end()) throw FormatError("checkpoint: missing blob " + base + ".weight");
    const RawTensor& t = w->second;
    if (t.channels != layer.weight.rows() || static_cast<Index>(t.height) * 9 != layer.weight.cols() || t.width != 9) {
      throw FormatError("checkpoint: shape mismatch for " + base + ".weight");
    }
    layer.weight = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        t.values.data(), layer.weight.rows(), layer.weight.cols());
    if (layer.has_bias()) {
      auto b = blobs.find(base + ".bias");
      if (b == blobs.end()) throw FormatError("checkpoint: missing blob " + base + ".bias");
      if (static_cast<Index>(b->second.values.size()) != layer.bias.size()) {
        throw FormatError("checkpoint: shape mismatch for " + base + ".bias");
      }
      layer.bias = Eigen::Map<const ConvLayer<float>::Vector>(b->second.values.data(), layer.bias.size());
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const DgnetConfig& c = ck.params.config;
  std::vector<std::pair<std::string, RawTensor>> blobs;
  add_params(blobs, ck.params, "");
  if (ck.adam) {
    add_params(blobs, ck.adam->first_moment, "adam.m.");
    add_params(blobs, ck.adam->second_moment, "adam.v.");
  }

  std::vector<std::string> payloads;
  for (const auto& [name, tensor] : blobs) {
    std::ostringstream os(std::ios::binary);
    write_raw_f32(os, tensor);
    payloads.push_back(std::move(os).str());
  }

  std::ostringstream header;
  header << kMagic << "\n";
  header << "bin_size = " << c.bin_size << "\n";
  header << "luma_bins = " << c.luma_bins << "\n";
  header << "downscale_channels = " << join(c.downscale_channels) << "\n";
  header << "trunk_depth = " << c.trunk_depth << "\n";
  header << "epoch = " << ck.epoch << "\n";
  if (ck.adam) header << "adam_step = " << ck.adam->step << "\n";
  header << "blobs = " << blobs.size() << "\n";
  std::size_t offset = 0;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    header << blobs[i].first << " " << offset << " " << payloads[i].size() << "\n";
    offset += payloads[i].size();
  }
  header << "data\n";

  // Write to a sibling file and rename so an interrupted save never leaves a
  // truncated checkpoint behind.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const auto& p : payloads) out.write(p.data(), static_cast<std::streamsize>(p.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError("checkpoint: bad magic in " + path.string());

  std::map<std::string, std::string> keys;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> index;
  while (std::getline(in, line)) {
    if (line == "data") break;
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) {
      keys[line.substr(0, eq)] = line.substr(eq + 3);
      continue;
    }
    std::istringstream ls(line);
    std::string name;
    std::size_t off = 0, bytes = 0;
    if (!(ls >> name >> off >> bytes)) throw FormatError("checkpoint: malformed index line '" + line + "'");
    index.emplace_back(name, off, bytes);
  }
  if (line != "data") throw FormatError("checkpoint: missing data section");
  auto need = [&](const char* key) -> const std::string& {
    auto it = keys.find(key);
    if (it == keys.end()) throw FormatError(std::string("checkpoint: missing key ") + key);
    return it->second;
  };
  if (std::stoull(need("blobs")) != index.size()) throw FormatError("checkpoint: blob count mismatch");

  const std::streampos data_start = in.tellg();
  std::map<std::string, RawTensor> blobs;
  for (const auto& [name, off, bytes] : index) {
    in.seekg(data_start + static_cast<std::streamoff>(off));
    RawTensor t = read_raw_f32(in);
    if (16 + 4 * t.values.size() != bytes) throw FormatError("checkpoint: blob size mismatch for " + name);
    blobs.emplace(name, std::move(t));
  }

  Checkpoint ck;
  DgnetConfig config;
  try {
    config.bin_size = std::stoll(need("bin_size"));
    config.luma_bins = std::stoll(need("luma_bins"));
    config.downscale_channels = split_indices(need("downscale_channels"));
    config.trunk_depth = std::stoll(need("trunk_depth"));
    ck.epoch = std::stoi(need("epoch"));
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("checkpoint: malformed numeric field: ") + e.what());
  }
  try {
    config.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  ck.params = zero_params<float>(config);
  fill_params(ck.params, blobs, "");
  if (keys.count("adam_step")) {
    AdamState<float> adam = AdamState<float>::fresh(ck.params);
    adam.step = std::stoll(keys["adam_step"]);
    fill_params(adam.first_moment, blobs, "adam.m.");
    fill_params(adam.second_moment, blobs, "adam.v.");
    ck.adam = std::move(adam);
  }
  return ck;
}

}  // namespace specgrid
