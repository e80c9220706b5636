#include "jf/cache_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace jf {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "jfcache-1";

void writeRaw(std::ofstream& out, const void* data, size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

struct Section {
  std::string name;
  std::vector<double> data;
};

void appendSection(std::vector<Section>& sections, std::string name, std::vector<double> data) {
  sections.push_back({std::move(name), std::move(data)});
}

std::vector<double> toDoubles(const int* p, long n) {
  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) out[i] = static_cast<double>(p[i]);
  return out;
}

json headerFor(const OperatorCache& cache, const std::vector<Section>& sections,
               const std::string& sourceHash, const std::string& payloadHash) {
  json sectionTable = json::array();
  for (const auto& s : sections) {
    sectionTable.push_back({{"name", s.name}, {"count", s.data.size()}});
  }
  return json{{"format", kFormat},
              {"vertexCount", cache.mesh->numVertices()},
              {"triangleCount", cache.mesh->numTriangles()},
              {"pinVertex", cache.pinVertex},
              {"spectrumCount", cache.spectrum ? cache.spectrum->count() : 0},
              {"sourceHash", sourceHash},
              {"payloadHash", payloadHash},
              {"sections", sectionTable}};
}

json readHeader(std::ifstream& in, const std::filesystem::path& path) {
  uint64_t headerLen = 0;
  in.read(reinterpret_cast<char*>(&headerLen), sizeof(headerLen));
  if (!in || headerLen == 0 || headerLen > (1u << 24)) {
    throw Error::io("cache " + path.string() + ": bad header length");
  }
  std::string text(headerLen, '\0');
  in.read(text.data(), static_cast<std::streamsize>(headerLen));
  if (!in) throw Error::io("cache " + path.string() + ": truncated header");
  json header = json::parse(text, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != kFormat) {
    throw Error::io("cache " + path.string() + ": not a " + std::string(kFormat) + " file");
  }
  return header;
}

uint64_t fnvUpdate(uint64_t h, const void* data, size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

void saveCache(const std::filesystem::path& path, const OperatorCache& cache,
               const std::string& sourceHash) {
  const Mesh& mesh = cache.meshRef();
  const int T = mesh.numTriangles();

  std::vector<Section> sections;
  {
    std::vector<double> frames(static_cast<size_t>(T) * 6);
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < 2; ++c) {
        for (int r = 0; r < 3; ++r) frames[t * 6 + c * 3 + r] = cache.frames.frames[t](r, c);
      }
    }
    appendSection(sections, "frames", std::move(frames));
  }
  {
    SpMatRM g = cache.grad;
    g.makeCompressed();
    appendSection(sections, "gradRowPtr", toDoubles(g.outerIndexPtr(), g.rows() + 1));
    appendSection(sections, "gradColIdx", toDoubles(g.innerIndexPtr(), g.nonZeros()));
    appendSection(sections, "gradVals",
                  std::vector<double>(g.valuePtr(), g.valuePtr() + g.nonZeros()));
  }
  appendSection(sections, "massDiag",
                std::vector<double>(cache.massDiag.data(),
                                    cache.massDiag.data() + cache.massDiag.size()));
  {
    SpMatRM L = cache.laplacian;
    L.makeCompressed();
    appendSection(sections, "lapRowPtr", toDoubles(L.outerIndexPtr(), L.rows() + 1));
    appendSection(sections, "lapColIdx", toDoubles(L.innerIndexPtr(), L.nonZeros()));
    appendSection(sections, "lapVals",
                  std::vector<double>(L.valuePtr(), L.valuePtr() + L.nonZeros()));
  }
  if (cache.spectrum) {
    const auto& s = *cache.spectrum;
    appendSection(sections, "spectrumEvals",
                  std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.count()));
    appendSection(sections, "spectrumEvecs",
                  std::vector<double>(s.eigenvectors.data(),
                                      s.eigenvectors.data() + s.eigenvectors.size()));
  }

  uint64_t payloadHash = 0xcbf29ce484222325ull;
  for (const auto& s : sections) {
    payloadHash = fnvUpdate(payloadHash, s.data.data(), s.data.size() * sizeof(double));
  }

  const std::string headerText =
      headerFor(cache, sections, sourceHash, toHex(payloadHash)).dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error::io("cannot write " + path.string());
  const uint64_t headerLen = headerText.size();
  writeRaw(out, &headerLen, sizeof(headerLen));
  writeRaw(out, headerText.data(), headerText.size());
  for (const auto& s : sections) {
    writeRaw(out, s.data.data(), s.data.size() * sizeof(double));
  }
  if (!out) throw Error::io("write failed for " + path.string());
}

CacheInfo peekCache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path.string());
  const json header = readHeader(in, path);
  CacheInfo info;
  info.vertexCount = header.at("vertexCount").get<int>();
  info.triangleCount = header.at("triangleCount").get<int>();
  info.pinVertex = header.at("pinVertex").get<int>();
  info.spectrumCount = header.at("spectrumCount").get<int>();
  info.sourceHash = header.at("sourceHash").get<std::string>();
  return info;
}

OperatorCache loadCache(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path.string());
  const json header = readHeader(in, path);

  const int V = header.at("vertexCount").get<int>();
  const int T = header.at("triangleCount").get<int>();
  if (V != mesh->numVertices() || T != mesh->numTriangles()) {
    throw Error::validation("cache " + path.string() + " was built for a different mesh (" +
                            std::to_string(V) + " vertices, " + std::to_string(T) +
                            " triangles)");
  }

  std::map<std::string, std::vector<double>> sections;
  uint64_t payloadHash = 0xcbf29ce484222325ull;
  for (const auto& entry : header.at("sections")) {
    const std::string name = entry.at("name").get<std::string>();
    const size_t count = entry.at("count").get<size_t>();
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error::io("cache " + path.string() + ": truncated section " + name);
    payloadHash = fnvUpdate(payloadHash, data.data(), count * sizeof(double));
    sections.emplace(name, std::move(data));
  }
  if (toHex(payloadHash) != header.at("payloadHash").get<std::string>()) {
    throw Error::io("cache " + path.string() + ": payload checksum mismatch (corrupt file)");
  }

  auto need = [&](const std::string& name) -> std::vector<double>& {
    auto it = sections.find(name);
    if (it == sections.end()) {
      throw Error::io("cache " + path.string() + ": missing section " + name);
    }
    return it->second;
  };

  OperatorCache cache;
  cache.mesh = std::move(mesh);
  cache.pinVertex = header.at("pinVertex").get<int>();

  const auto& framesRaw = need("frames");
  cache.frames.frames.resize(T);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < 2; ++c) {
      for (int r = 0; r < 3; ++r) cache.frames.frames[t](r, c) = framesRaw[t * 6 + c * 3 + r];
    }
  }

  auto buildSparseRM = [&](const std::string& prefix, int rows, int cols) {
    const auto& rowPtr = need(prefix + "RowPtr");
    const auto& colIdx = need(prefix + "ColIdx");
    const auto& vals = need(prefix + "Vals");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(vals.size());
    for (int r = 0; r < rows; ++r) {
      const long begin = static_cast<long>(rowPtr[r]);
      const long end = static_cast<long>(rowPtr[r + 1]);
      for (long i = begin; i < end; ++i) {
        trips.emplace_back(r, static_cast<int>(colIdx[i]), vals[i]);
      }
    }
    SpMatRM m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  };

  cache.grad = buildSparseRM("grad", 2 * T, V);
  cache.laplacian = SpMat(buildSparseRM("lap", V, V));
  const auto& mass = need("massDiag");
  cache.massDiag = Eigen::Map<const VecX>(mass.data(), static_cast<long>(mass.size()));

  const int k = header.at("spectrumCount").get<int>();
  if (k > 0) {
    auto spec = std::make_shared<SpectralData>();
    const auto& evals = need("spectrumEvals");
    const auto& evecs = need("spectrumEvecs");
    spec->eigenvalues = Eigen::Map<const VecX>(evals.data(), k);
    spec->eigenvectors = Eigen::Map<const MatX>(evecs.data(), V, k);
    cache.spectrum = std::move(spec);
  }

  cache.solver = std::make_shared<PinnedSolver>(cache.laplacian, cache.pinVertex);
  return cache;
}

std::string hashFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return toHex(fnv1a64(bytes.data(), bytes.size()));
}

}  // namespace jf
