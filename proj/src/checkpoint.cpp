#include "jf/checkpoint.hpp"

#include <fstream>

namespace jf {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "jfckpt-1";

void blobAppend(std::vector<float>& blob, const MlpParams& p) {
  for (size_t l = 0; l < p.weights.size(); ++l) {
    const auto& w = p.weights[l];
    for (long r = 0; r < w.rows(); ++r) {
      for (long c = 0; c < w.cols(); ++c) blob.push_back(w(r, c));
    }
    for (long i = 0; i < p.biases[l].size(); ++i) blob.push_back(p.biases[l](i));
  }
  for (size_t l = 0; l < p.gnScale.size(); ++l) {
    for (long i = 0; i < p.gnScale[l].size(); ++i) blob.push_back(p.gnScale[l](i));
    for (long i = 0; i < p.gnOffset[l].size(); ++i) blob.push_back(p.gnOffset[l](i));
  }
}

void blobRead(const std::vector<float>& blob, MlpParams& p) {
  size_t i = 0;
  for (size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l];
    for (long r = 0; r < w.rows(); ++r) {
      for (long c = 0; c < w.cols(); ++c) w(r, c) = blob[i++];
    }
    for (long b = 0; b < p.biases[l].size(); ++b) p.biases[l](b) = blob[i++];
  }
  for (size_t l = 0; l < p.gnScale.size(); ++l) {
    for (long s = 0; s < p.gnScale[l].size(); ++s) p.gnScale[l](s) = blob[i++];
    for (long o = 0; o < p.gnOffset[l].size(); ++o) p.gnOffset[l](o) = blob[i++];
  }
}

}  // namespace

void saveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::vector<float> blob;
  blob.reserve(ckpt.params.paramCount());
  blobAppend(blob, ckpt.params);

  json layerSizes = json::array();
  for (int s : ckpt.params.layerSizes()) layerSizes.push_back(s);
  const json header = {{"format", kFormat},
                       {"model", ckpt.model},
                       {"layerSizes", layerSizes},
                       {"groups", ckpt.params.groups},
                       {"zLength", ckpt.zLength},
                       {"wksSamples", ckpt.features.wksSamples},
                       {"eigenCount", ckpt.features.eigenCount},
                       {"sigmaFactor", ckpt.features.sigmaFactor},
                       {"mode", ckpt.mode},
                       {"seed", ckpt.seed},
                       {"paramCount", blob.size()},
                       {"trainConfig", ckpt.trainConfig}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot write " + path.string());
  const uint64_t headerLen = text.size();
  out.write(reinterpret_cast<const char*>(&headerLen), sizeof(headerLen));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) throw Error::io("write failed for " + path.string());
}

Checkpoint loadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path.string());
  uint64_t headerLen = 0;
  in.read(reinterpret_cast<char*>(&headerLen), sizeof(headerLen));
  if (!in || headerLen == 0 || headerLen > (1u << 24)) {
    throw Error::io("checkpoint " + path.string() + ": bad header length");
  }
  std::string text(headerLen, '\0');
  in.read(text.data(), static_cast<std::streamsize>(headerLen));
  json header = json::parse(text, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != kFormat) {
    throw Error::io("checkpoint " + path.string() + ": not a " + std::string(kFormat) + " file");
  }

  Checkpoint ckpt;
  ckpt.model = header.at("model").get<std::string>();
  ckpt.zLength = header.at("zLength").get<int>();
  ckpt.features.wksSamples = header.at("wksSamples").get<int>();
  ckpt.features.eigenCount = header.at("eigenCount").get<int>();
  ckpt.features.sigmaFactor = header.at("sigmaFactor").get<double>();
  ckpt.mode = header.at("mode").get<std::string>();
  ckpt.seed = header.at("seed").get<uint64_t>();
  ckpt.trainConfig = header.at("trainConfig");

  const auto sizes = header.at("layerSizes").get<std::vector<int>>();
  if (sizes.size() < 3) throw Error::io("checkpoint " + path.string() + ": bad layer sizes");
  const int layers = static_cast<int>(sizes.size()) - 1;
  ckpt.params = MlpParams::shaped(sizes.front(), sizes[1], sizes.back(), layers,
                                  header.at("groups").get<int>());
  // Non-uniform hidden widths are not produced by this codebase; verify.
  for (size_t i = 1; i + 1 < sizes.size(); ++i) {
    if (sizes[i] != sizes[1]) {
      throw Error::io("checkpoint " + path.string() + ": non-uniform hidden widths");
    }
  }

  const size_t count = header.at("paramCount").get<size_t>();
  if (count != static_cast<size_t>(ckpt.params.paramCount())) {
    throw Error::io("checkpoint " + path.string() + ": parameter count mismatch");
  }
  std::vector<float> blob(count);
  in.read(reinterpret_cast<char*>(blob.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw Error::io("checkpoint " + path.string() + ": truncated parameter blob");
  blobRead(blob, ckpt.params);
  return ckpt;
}

}  // namespace jf
