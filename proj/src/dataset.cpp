#include "jf/dataset.hpp"

#include "jf/obj_io.hpp"

#include <fstream>

namespace jf {

using nlohmann::json;

void writeSampleFile(const std::filesystem::path& path, const TrainingSample& sample, int dims) {
  if (sample.psi.cols() != dims) throw Error::validation("sample dimension mismatch");
  const json header = {{"format", "jfsample-1"},
                       {"meshId", sample.meshId},
                       {"vertexCount", sample.psi.rows()},
                       {"dims", dims},
                       {"zLength", sample.code.size()}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot write " + path.string());
  const uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  // Row-major ground truth, then the code.
  std::vector<double> buf;
  buf.reserve(sample.psi.size() + sample.code.size());
  for (long r = 0; r < sample.psi.rows(); ++r) {
    for (int c = 0; c < dims; ++c) buf.push_back(sample.psi(r, c));
  }
  for (long i = 0; i < sample.code.size(); ++i) buf.push_back(sample.code(i));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) throw Error::io("write failed for " + path.string());
}

TrainingSample readSampleFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path.string());
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1u << 20)) {
    throw Error::io("sample " + path.string() + ": bad header");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  json header = json::parse(text, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "jfsample-1") {
    throw Error::io("sample " + path.string() + ": not a jfsample-1 file");
  }
  TrainingSample s;
  s.meshId = header.at("meshId").get<int>();
  const long v = header.at("vertexCount").get<long>();
  const int dims = header.at("dims").get<int>();
  const long zLen = header.at("zLength").get<long>();
  std::vector<double> buf(v * dims + zLen);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in) throw Error::io("sample " + path.string() + ": truncated payload");
  s.psi.resize(v, dims);
  for (long r = 0; r < v; ++r) {
    for (int c = 0; c < dims; ++c) s.psi(r, c) = buf[r * dims + c];
  }
  s.code = Eigen::Map<const VecX>(buf.data() + v * dims, zLen);
  return s;
}

Dataset loadDataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error::io("cannot open " + (dir / "manifest.json").string());
  json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != "jfdataset-1") {
    throw Error::io((dir / "manifest.json").string() + " is not a jfdataset-1 manifest");
  }

  Dataset ds;
  ds.mode = manifest.at("mode").get<std::string>();
  ds.seed = manifest.at("seed").get<uint64_t>();
  ds.configEcho = manifest.value("config", json::object());

  for (const auto& entry : manifest.at("meshes")) {
    const auto objPath = dir / entry.at("obj").get<std::string>();
    auto mesh = std::make_shared<Mesh>(loadObj(objPath));
    const auto cachePath = dir / entry.at("cache").get<std::string>();
    ds.caches.push_back(loadCache(cachePath, mesh));
    ds.meshes.push_back(std::move(mesh));
  }

  for (const auto& entry : manifest.at("samples")) {
    TrainingSample s = readSampleFile(dir / entry.at("file").get<std::string>());
    if (s.meshId != entry.at("meshId").get<int>()) {
      throw Error::io("sample meshId disagrees with manifest");
    }
    if (s.meshId < 0 || s.meshId >= static_cast<int>(ds.meshes.size())) {
      throw Error::io("sample references unknown mesh " + std::to_string(s.meshId));
    }
    if (s.psi.rows() != ds.meshes[s.meshId]->numVertices()) {
      throw Error::validation("sample ground truth has wrong vertex count");
    }
    ds.samples.push_back(std::move(s));
  }
  if (!ds.samples.empty()) {
    const long zLen = ds.samples.front().code.size();
    for (const auto& s : ds.samples) {
      if (s.code.size() != zLen) throw Error::validation("dataset has mixed code lengths");
    }
  }
  return ds;
}

SplitIndices splitDataset(int sampleCount, uint64_t seed, double trainFraction, int trainCount) {
  Rng rng = Rng::forStream(seed, 0x5eedull);
  std::vector<int> order = rng.permutation(sampleCount);
  int nTrain = trainCount >= 0
                   ? trainCount
                   : static_cast<int>(std::lround(trainFraction * sampleCount));
  nTrain = std::max(1, std::min(sampleCount - 1, nTrain));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + nTrain);
  split.test.assign(order.begin() + nTrain, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace jf
