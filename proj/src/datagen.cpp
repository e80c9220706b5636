#include "jf/datagen.hpp"

#include "jf/arap.hpp"
#include "jf/obj_io.hpp"
#include "jf/uvgen.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace jf {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> farthestPointHandles(const Mesh& mesh, int count) {
  if (count < 2 || count > mesh.numVertices()) {
    throw Error::validation("handle count out of range");
  }
  const VecX com = centerOfMass(mesh, mesh.vertices);
  int start = 0;
  double best = -1.0;
  for (int j = 0; j < mesh.numVertices(); ++j) {
    const double d = (mesh.vertices.row(j).transpose() - com).norm();
    if (d > best) {
      best = d;
      start = j;
    }
  }
  std::vector<int> handles{start};
  VecX minDist = graphDistances(mesh, start);
  while (static_cast<int>(handles.size()) < count) {
    int next = 0;
    double far = -1.0;
    for (int j = 0; j < mesh.numVertices(); ++j) {
      if (minDist(j) > far) {
        far = minDist(j);
        next = j;
      }
    }
    handles.push_back(next);
    minDist = minDist.cwiseMin(graphDistances(mesh, next));
  }
  std::sort(handles.begin(), handles.end());
  return handles;
}

namespace {

struct MeshFiles {
  std::string obj;
  std::string cache;
};

MeshFiles storeMesh(const fs::path& dir, int meshId, const Mesh& mesh,
                    const OperatorCache& cache) {
  char name[64];
  std::snprintf(name, sizeof(name), "meshes/mesh_%06d", meshId);
  MeshFiles files{std::string(name) + ".obj", std::string(name) + ".jfc"};
  saveObj(dir / files.obj, mesh.vertices, mesh.triangles);
  saveCache(dir / files.cache, cache, hashFile(dir / files.obj));
  return files;
}

std::string sampleName(int i) {
  char name[64];
  std::snprintf(name, sizeof(name), "sample_%06d.bin", i);
  return name;
}

OperatorCache cacheWithSpectrum(std::shared_ptr<const Mesh> mesh, const FeatureConfig& features) {
  OperatorCache cache = buildOperatorCache(std::move(mesh));
  if (features.wksSamples > 0) {
    cache.spectrum = std::make_shared<SpectralData>(
        computeSpectrum(cache.laplacian, cache.meshRef().vertexMass, features.eigenCount));
  }
  return cache;
}

struct Rejection {
  int sample = 0;
  int attempt = 0;
  std::string reason;
};

GenerateReport generateArap(const RunConfig& config, Exec exec, const fs::path& dir) {
  auto mesh = std::make_shared<Mesh>(loadObj(config.meshPath));
  OperatorCache cache = cacheWithSpectrum(mesh, config.features);
  const auto meshFiles = storeMesh(dir, 0, *mesh, cache);

  std::vector<int> handles = config.arap.handles;
  if (handles.empty()) handles = farthestPointHandles(*mesh, config.arap.handleCount);
  ArapSolver solver(mesh, handles);

  const VecX com = centerOfMass(*mesh, mesh->vertices);
  const double maxAngle = config.arap.maxAngleDeg * std::numbers::pi / 180.0;
  const double maxShift = config.arap.maxShiftFrac * mesh->bboxDiag;
  const int H = static_cast<int>(handles.size());

  std::vector<TrainingSample> samples(config.samples);
  forEachIndex(exec, config.samples, [&](long i) {
    Rng rng = Rng::forStream(config.seed, static_cast<uint64_t>(i));
    MatX targets(H, 3);
    for (int h = 0; h < H; ++h) {
      const Vec3 rest = mesh->vertices.row(handles[h]);
      const Vec3 axis = rng.unitVector();
      const double angle = rng.uniform(0.0, maxAngle);
      const Vec3 shift = rng.unitVector() * rng.uniform(0.0, maxShift);
      const Mat3 rot = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
      targets.row(h) = (rot * (rest - com) + com + shift).transpose();
    }
    auto result = solver.deform(targets, config.arap.iters, config.arap.tol);
    samples[i].meshId = 0;
    samples[i].psi = std::move(result.positions);
    VecX code(3 * H);
    for (int h = 0; h < H; ++h) code.segment<3>(3 * h) = targets.row(h).transpose();
    samples[i].code = std::move(code);
  });

  json sampleTable = json::array();
  for (int i = 0; i < config.samples; ++i) {
    const std::string file = sampleName(i);
    writeSampleFile(dir / file, samples[i], 3);
    sampleTable.push_back({{"file", file}, {"meshId", 0}});
  }

  json configEcho = toJson(config);
  configEcho["arap"]["handles"] = handles;  // resolved selection
  const json manifest = {{"format", "jfdataset-1"},
                         {"mode", "arap"},
                         {"seed", config.seed},
                         {"config", configEcho},
                         {"meshes", json::array({{{"obj", meshFiles.obj},
                                                  {"cache", meshFiles.cache}}})},
                         {"samples", sampleTable},
                         {"rejections", json::array()}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error::io("cannot write manifest");
  return {config.samples, 0};
}

struct UvSample {
  Mesh patch;
  OperatorCache cache;
  MatX uv;
  VecX code;
  std::vector<Rejection> rejections;
};

GenerateReport generateUv(const RunConfig& config, Exec exec, const fs::path& dir) {
  if (config.corpusPaths.empty()) {
    throw Error::validation("uv mode needs at least one corpus mesh");
  }
  std::vector<Mesh> corpus;
  for (const auto& p : config.corpusPaths) corpus.push_back(loadObj(p));

  std::vector<UvSample> samples(config.samples);
  forEachIndex(exec, config.samples, [&](long i) {
    Rng rng = Rng::forStream(config.seed, static_cast<uint64_t>(i));
    UvSample& out = samples[i];
    for (int attempt = 0; attempt < config.uv.maxAttempts; ++attempt) {
      const Mesh& base = corpus[i % corpus.size()];
      const int seedVertex = rng.uniformInt(base.numVertices());
      const double radius =
          rng.uniform(config.uv.radiusMinFrac, config.uv.radiusMaxFrac) * base.bboxDiag;
      try {
        PatchResult patch = extractDiskPatch(base, seedVertex, radius);
        OperatorCache cache =
            cacheWithSpectrum(std::make_shared<Mesh>(patch.mesh), config.features);
        MatX init = tutteEmbed(patch.mesh);
        auto param = arapParameterize(cache, init, config.uv.paramIters, config.uv.paramTol);
        auto report = distortionReport(cache, param.uv, MapMode::Uv2d, Exec::Serial);
        if (report.countFlips > 0) {
          throw Error::numeric("parameterization has " + std::to_string(report.countFlips) +
                               " flipped triangles");
        }
        // Align the UV rigidly to the patch's xy coordinates.
        auto rigid = procrustes2d(param.uv, patch.mesh.vertices.leftCols(2));
        out.uv = applyRigid2d(rigid, param.uv);

        // Pooled WKS descriptor: mean and max over centroid signatures.
        const MatX features =
            centroidFeatures(patch.mesh, cache.spectrum.get(), config.features, Exec::Serial);
        const int w = config.features.wksSamples;
        const MatX wks = features.rightCols(w);
        VecX code(2 * w);
        code.head(w) = wks.colwise().mean().transpose();
        code.tail(w) = wks.colwise().maxCoeff().transpose();
        out.code = code;
        out.patch = std::move(patch.mesh);
        out.cache = std::move(cache);
        return;
      } catch (const Error& e) {
        out.rejections.push_back({static_cast<int>(i), attempt, e.what()});
      }
    }
    throw Error::numeric("sample " + std::to_string(i) + ": no valid patch after " +
                         std::to_string(config.uv.maxAttempts) + " attempts");
  });

  json meshTable = json::array();
  json sampleTable = json::array();
  json rejectionTable = json::array();
  int rejectionEvents = 0;
  for (int i = 0; i < config.samples; ++i) {
    const auto files = storeMesh(dir, i, samples[i].patch, samples[i].cache);
    meshTable.push_back({{"obj", files.obj}, {"cache", files.cache}});
    TrainingSample s;
    s.meshId = i;
    s.psi = samples[i].uv;
    s.code = samples[i].code;
    const std::string file = sampleName(i);
    writeSampleFile(dir / file, s, 2);
    sampleTable.push_back({{"file", file}, {"meshId", i}});
    for (const auto& r : samples[i].rejections) {
      rejectionTable.push_back(
          {{"sample", r.sample}, {"attempt", r.attempt}, {"reason", r.reason}});
      ++rejectionEvents;
    }
  }

  const json manifest = {{"format", "jfdataset-1"}, {"mode", "uv"},
                         {"seed", config.seed},     {"config", toJson(config)},
                         {"meshes", meshTable},     {"samples", sampleTable},
                         {"rejections", rejectionTable}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error::io("cannot write manifest");
  return {config.samples, rejectionEvents};
}

}  // namespace

GenerateReport generateDataset(const RunConfig& config, Exec exec) {
  if (config.outDir.empty()) throw Error::validation("outDir is required");
  const fs::path dir(config.outDir);
  fs::create_directories(dir / "meshes");
  if (config.mode == "arap") return generateArap(config, exec, dir);
  return generateUv(config, exec, dir);
}

}  // namespace jf
