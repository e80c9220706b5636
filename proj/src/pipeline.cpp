#include "jf/pipeline.hpp"

#include "jf/adam.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace jf {

using nlohmann::json;

ModelKind modelKindFromName(const std::string& name) {
  if (name == "field") return ModelKind::Field;
  if (name == "displacement") return ModelKind::Displacement;
  if (name == "global_tensor") return ModelKind::GlobalTensor;
  throw Error::validation("unknown model kind '" + name + "'");
}

std::string modelName(ModelKind kind) {
  switch (kind) {
    case ModelKind::Field: return "field";
    case ModelKind::Displacement: return "displacement";
    case ModelKind::GlobalTensor: return "global_tensor";
  }
  return "field";
}

ModelInputs buildModelInputs(ModelKind kind, const OperatorCache& cache,
                             const FeatureConfig& features, Exec exec) {
  ModelInputs inputs;
  if (kind == ModelKind::GlobalTensor) {
    inputs.identityStack = computeJacobians(cache, cache.meshRef().vertices);
    return inputs;
  }
  std::shared_ptr<const SpectralData> spectrum = cache.spectrum;
  if (features.wksSamples > 0 && !spectrum) {
    spectrum = std::make_shared<SpectralData>(
        computeSpectrum(cache.laplacian, cache.meshRef().vertexMass, features.eigenCount));
  }
  inputs.features = kind == ModelKind::Field
                        ? centroidFeatures(cache.meshRef(), spectrum.get(), features, exec)
                        : vertexFeatures(cache.meshRef(), spectrum.get(), features, exec);
  return inputs;
}

namespace {

// Stack layout of the raw global-tensor output: six values per triangle,
// row-major over the 2 x 3 transposed-jacobian block.
JacobianStack globalStackFromRaw(const MatX& raw, const JacobianStack& identityStack) {
  const long T2 = identityStack.rows();
  JacobianStack stack = identityStack;
  for (long t = 0; t < T2 / 2; ++t) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) stack(2 * t + r, c) += raw(6 * t + 3 * r + c, 0);
    }
  }
  return stack;
}

MatX centeredBy(const Mesh& mesh, const MatX& positions) {
  const VecX com = (positions.transpose() * mesh.vertexMass) / mesh.vertexMass.sum();
  return positions.rowwise() - com.transpose();
}

}  // namespace

InferResult inferModel(ModelKind kind, const MlpParams& params, const OperatorCache& cache,
                       const ModelInputs& inputs, const VecX& z, int dims, Exec exec) {
  if (dims != 2 && dims != 3) throw Error::validation("dims must be 2 or 3");
  const Mesh& mesh = cache.meshRef();
  InferResult out;
  switch (kind) {
    case ModelKind::Field: {
      const auto field = predictExtrinsic(params, z, inputs.features, exec);
      const JacobianStack full = restrictField(field, cache.frames, exec);
      out.stack = dims == 3 ? full : JacobianStack(full.leftCols(2));
      out.phi = poissonSolve(cache, out.stack);
      break;
    }
    case ModelKind::Displacement: {
      if (dims != 3) throw Error::validation("displacement baseline is 3D only");
      const MatX raw = mlpForwardBatchRaw(params, z, inputs.features, exec);  // 3 x V
      out.phi = mesh.vertices + raw.transpose();
      break;
    }
    case ModelKind::GlobalTensor: {
      const MatX raw = mlpForwardBatchRaw(params, z, MatX(), exec);  // 6T x 1
      const JacobianStack full = globalStackFromRaw(raw, inputs.identityStack);
      out.stack = dims == 3 ? full : JacobianStack(full.leftCols(2));
      out.phi = poissonSolve(cache, out.stack);
      break;
    }
  }
  return out;
}

LossBreakdown computeLoss(const OperatorCache& cache, const VertexMap& phi,
                          const JacobianStack& stack, const VertexMap& psi,
                          const JacobianStack& gtStack) {
  const Mesh& mesh = cache.meshRef();
  if (phi.rows() != mesh.numVertices() || psi.rows() != mesh.numVertices() ||
      phi.cols() != psi.cols()) {
    throw Error::validation("loss: map shapes do not match the mesh");
  }
  const MatX dPhi = centeredBy(mesh, phi) - centeredBy(mesh, psi);
  LossBreakdown loss;
  for (int j = 0; j < mesh.numVertices(); ++j) {
    loss.lVertex += mesh.vertexMass(j) * dPhi.row(j).squaredNorm();
  }
  if (stack.size() > 0) {
    if (stack.rows() != gtStack.rows() || stack.cols() != gtStack.cols()) {
      throw Error::validation("loss: jacobian stack shapes do not match");
    }
    for (long r = 0; r < stack.rows(); ++r) {
      loss.lJacobian += cache.massDiag(r) * (stack.row(r) - gtStack.row(r)).squaredNorm();
    }
  }
  loss.lTotal = 10.0 * loss.lVertex + loss.lJacobian;
  return loss;
}

MlpGrads backwardModel(ModelKind kind, const MlpParams& params, const OperatorCache& cache,
                       const ModelInputs& inputs, const VecX& z, const InferResult& fwd,
                       const VertexMap& psi, const JacobianStack& gtStack, Exec exec) {
  const Mesh& mesh = cache.meshRef();
  const int d = static_cast<int>(fwd.phi.cols());
  const MatX diff = centeredBy(mesh, fwd.phi) - centeredBy(mesh, psi);
  // d lTotal / d phi; the centering correction vanishes because the weighted
  // mean of the centered difference is zero.
  const MatX dPhi = 20.0 * mesh.vertexMass.asDiagonal() * diff;

  if (kind == ModelKind::Displacement) {
    return mlpBackwardBatch(params, z, inputs.features, MatX(dPhi.transpose()), exec);
  }

  JacobianStack dStack = poissonAdjoint(cache, dPhi);
  dStack += 2.0 * cache.massDiag.asDiagonal() * (fwd.stack - gtStack);
  MatX dStack3 = MatX::Zero(dStack.rows(), 3);
  dStack3.leftCols(d) = dStack;

  if (kind == ModelKind::Field) {
    const auto dField = restrictAdjoint(dStack3, cache.frames, exec);
    const long T = static_cast<long>(dField.size());
    MatX upstream(9, T);
    for (long t = 0; t < T; ++t) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) upstream(3 * r + c, t) = dField[t](r, c);
      }
    }
    return mlpBackwardBatch(params, z, inputs.features, upstream, exec);
  }

  // Global tensor: route the stack gradient to the raw output slots.
  const long T = dStack3.rows() / 2;
  MatX upstream(6 * T, 1);
  for (long t = 0; t < T; ++t) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) upstream(6 * t + 3 * r + c, 0) = dStack3(2 * t + r, c);
    }
  }
  return mlpBackwardBatch(params, z, MatX(), upstream, exec);
}

namespace {

std::vector<std::vector<int>> makeBatches(const std::vector<int>& trainIdx, const Dataset& ds,
                                          int batchSize, Rng& rng) {
  std::map<int, std::vector<int>> byMesh;
  for (int idx : trainIdx) byMesh[ds.samples[idx].meshId].push_back(idx);
  std::vector<std::vector<int>> batches;
  for (auto& [meshId, list] : byMesh) {
    // Shuffle within the mesh group, then chop into batches that reuse one
    // factorization.
    std::vector<int> order = rng.permutation(static_cast<int>(list.size()));
    for (size_t start = 0; start < list.size(); start += batchSize) {
      std::vector<int> batch;
      for (size_t i = start; i < std::min(list.size(), start + batchSize); ++i) {
        batch.push_back(list[order[i]]);
      }
      batches.push_back(std::move(batch));
    }
  }
  const std::vector<int> batchOrder = rng.permutation(static_cast<int>(batches.size()));
  std::vector<std::vector<int>> shuffled;
  shuffled.reserve(batches.size());
  for (int i : batchOrder) shuffled.push_back(std::move(batches[i]));
  return shuffled;
}

}  // namespace

TrainOutcome trainModel(const Dataset& dataset, const RunConfig& config, ModelKind kind,
                        const std::filesystem::path& outDir, Exec exec) {
  if (dataset.samples.empty()) throw Error::validation("dataset has no samples");
  const int dims = dataset.dims();
  if (kind == ModelKind::GlobalTensor && dataset.meshes.size() != 1) {
    throw Error::validation(
        "the global-tensor baseline is tied to one triangulation and refuses multi-mesh "
        "datasets");
  }
  if (kind == ModelKind::Displacement && dims != 3) {
    throw Error::validation("displacement baseline is 3D only");
  }

  std::filesystem::create_directories(outDir);

  // Per-mesh precomputation (features, identity stacks).
  std::vector<ModelInputs> inputs;
  inputs.reserve(dataset.caches.size());
  for (const auto& cache : dataset.caches) {
    inputs.push_back(buildModelInputs(kind, cache, config.features, exec));
  }

  const int zLen = static_cast<int>(dataset.samples.front().code.size());
  int inputWidth = zLen;
  int outputWidth = 9;
  if (kind == ModelKind::Field) {
    inputWidth += static_cast<int>(inputs.front().features.cols());
  } else if (kind == ModelKind::Displacement) {
    inputWidth += static_cast<int>(inputs.front().features.cols());
    outputWidth = 3;
  } else {
    outputWidth = 6 * dataset.meshes.front()->numTriangles();
  }

  Rng initRng = Rng::forStream(config.seed, 0x9a7a11ull);
  MlpParams params = MlpParams::heInit(inputWidth, config.mlp.hidden, outputWidth,
                                       config.mlp.layers, config.mlp.groups, initRng);
  AdamState adam = AdamState::init(params, config.train.learningRate);

  // Ground-truth jacobian stacks, fixed per sample.
  std::vector<JacobianStack> gtStacks(dataset.samples.size());
  if (kind != ModelKind::Displacement) {
    for (size_t i = 0; i < dataset.samples.size(); ++i) {
      gtStacks[i] =
          computeJacobians(dataset.caches[dataset.samples[i].meshId], dataset.samples[i].psi);
    }
  }

  const auto split = splitDataset(static_cast<int>(dataset.samples.size()), config.seed,
                                  config.train.trainFraction, config.train.trainCount);
  std::vector<int> trainIdx = split.train;
  int epochs = config.train.epochs;
  if (config.train.overfit) {
    trainIdx = {split.train.front()};
    epochs = config.train.overfitSteps;
  }

  std::ofstream lossLog(outDir / "loss_log.jsonl");
  std::ofstream trainLog(outDir / "train_log.jsonl");
  if (!lossLog || !trainLog) throw Error::io("cannot open training logs in " + outDir.string());

  TrainOutcome outcome;
  std::vector<double> epochLoss;
  std::vector<double> smoothed;
  int lastEvent = -1;
  bool dropped = false;
  const auto wallStart = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng epochRng = Rng::forStream(config.seed, 0xe90c5ull + static_cast<uint64_t>(epoch));
    const auto batches = makeBatches(trainIdx, dataset, config.train.batchSize, epochRng);

    double sumV = 0.0, sumJ = 0.0, sumT = 0.0;
    long counted = 0;
    for (const auto& batch : batches) {
      MlpGrads acc = zeroGradsLike(params, zLen);
      for (int idx : batch) {
        const auto& sample = dataset.samples[idx];
        const auto& cache = dataset.caches[sample.meshId];
        const auto& in = inputs[sample.meshId];
        const InferResult fwd =
            inferModel(kind, params, cache, in, sample.code, dims, exec);
        const LossBreakdown loss =
            computeLoss(cache, fwd.phi, fwd.stack, sample.psi, gtStacks[idx]);
        sumV += loss.lVertex;
        sumJ += loss.lJacobian;
        sumT += loss.lTotal;
        ++counted;
        accumulateGrads(acc, backwardModel(kind, params, cache, in, sample.code, fwd,
                                           sample.psi, gtStacks[idx], exec));
      }
      scaleGrads(acc, 1.0 / static_cast<double>(batch.size()));
      adamStep(params, acc.params, adam);
    }

    const double meanV = sumV / counted;
    const double meanJ = sumJ / counted;
    const double meanT = sumT / counted;
    epochLoss.push_back(meanT);
    if (epoch == 0) outcome.firstLoss = meanT;
    outcome.lastLoss = meanT;

    const int window = std::max(1, config.train.plateauWindow);
    double ma = 0.0;
    const int lo = std::max(0, epoch - window + 1);
    for (int e = lo; e <= epoch; ++e) ma += epochLoss[e];
    ma /= (epoch - lo + 1);
    smoothed.push_back(ma);

    const json record = {{"epoch", epoch},
                         {"lr", adam.learningRate},
                         {"lVertex", meanV},
                         {"lJacobian", meanJ},
                         {"lTotal", meanT}};
    lossLog << record.dump() << "\n";
    json timed = record;
    timed["wallSeconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wallStart).count();
    trainLog << timed.dump() << "\n";

    outcome.epochsRun = epoch + 1;
    if (config.train.plateauEnabled && epoch >= config.train.plateauPatience &&
        epoch - lastEvent >= config.train.plateauPatience) {
      const double before = smoothed[epoch - config.train.plateauPatience];
      if (ma > (1.0 - 0.01) * before) {
        if (!dropped) {
          adam.learningRate = config.train.droppedLearningRate;
          dropped = true;
          lastEvent = epoch;
        } else {
          break;  // plateaued again at the low rate
        }
      }
    }
  }

  Checkpoint ckpt;
  ckpt.model = modelName(kind);
  ckpt.params = params;
  ckpt.zLength = zLen;
  ckpt.features = config.features;
  ckpt.mode = dims == 2 ? "2d" : "3d";
  ckpt.seed = config.seed;
  ckpt.trainConfig = toJson(config);
  outcome.checkpoint = ckpt;
  outcome.checkpointPath = outDir / "checkpoint.jfk";
  saveCheckpoint(outcome.checkpointPath, ckpt);
  outcome.lossLogPath = outDir / "loss_log.jsonl";
  outcome.trainLogPath = outDir / "train_log.jsonl";
  return outcome;
}

EvalResult evaluateModel(const Dataset& dataset, const std::vector<int>& sampleIndices,
                         const Checkpoint& ckpt, Exec exec) {
  const ModelKind kind = modelKindFromName(ckpt.model);
  const int dims = dataset.dims();
  if ((ckpt.mode == "2d") != (dims == 2)) {
    throw Error::validation("checkpoint mode does not match the dataset mode");
  }

  std::map<int, ModelInputs> inputsByMesh;
  EvalResult result;
  std::vector<DistortionReport> reports;
  double sumN = 0.0;
  long countedN = 0;

  for (int idx : sampleIndices) {
    if (idx < 0 || idx >= static_cast<int>(dataset.samples.size())) {
      throw Error::validation("sample index out of range");
    }
    const auto& sample = dataset.samples[idx];
    const auto& cache = dataset.caches[sample.meshId];
    auto it = inputsByMesh.find(sample.meshId);
    if (it == inputsByMesh.end()) {
      it = inputsByMesh.emplace(sample.meshId, buildModelInputs(kind, cache, ckpt.features, exec))
               .first;
    }
    const InferResult fwd = inferModel(kind, ckpt.params, cache, it->second, sample.code, dims, exec);
    const Mesh& mesh = cache.meshRef();

    const auto np = normalizePositions(fwd.phi, mesh.triangles);
    const auto ng = normalizePositions(sample.psi, mesh.triangles);

    SampleEval se;
    se.sample = idx;
    se.l2v = 100.0 * (np.positions - ng.positions).rowwise().norm().mean();
    const JacobianStack jp = computeJacobians(cache, np.positions);
    const JacobianStack jg = computeJacobians(cache, ng.positions);
    double j2 = 0.0;
    for (int t = 0; t < mesh.numTriangles(); ++t) {
      j2 += (jp.middleRows<2>(2 * t) - jg.middleRows<2>(2 * t)).norm();
    }
    se.l2j = 10.0 * j2 / mesh.numTriangles();

    if (dims == 3) {
      double angleSum = 0.0;
      long angles = 0;
      for (int t = 0; t < mesh.numTriangles(); ++t) {
        const Vec3 a0 = fwd.phi.row(mesh.triangles(t, 0));
        const Vec3 a1 = fwd.phi.row(mesh.triangles(t, 1));
        const Vec3 a2 = fwd.phi.row(mesh.triangles(t, 2));
        const Vec3 b0 = sample.psi.row(mesh.triangles(t, 0));
        const Vec3 b1 = sample.psi.row(mesh.triangles(t, 1));
        const Vec3 b2 = sample.psi.row(mesh.triangles(t, 2));
        const Vec3 na = (a1 - a0).cross(a2 - a0);
        const Vec3 nb = (b1 - b0).cross(b2 - b0);
        if (na.norm() < 1e-18 || nb.norm() < 1e-18) continue;
        const double angle =
            std::atan2(na.cross(nb).norm(), na.dot(nb)) * 180.0 / std::numbers::pi;
        angleSum += angle;
        ++angles;
      }
      if (angles > 0) {
        se.l2n = angleSum / angles;
        sumN += *se.l2n;
        ++countedN;
      }
    } else {
      const auto report = distortionReport(cache, fwd.phi, MapMode::Uv2d, exec);
      se.flips = report.countFlips;
      se.highDistortion = report.countHighDistortion;
      reports.push_back(report);
    }
    result.perSample.push_back(se);
  }

  if (result.perSample.empty()) throw Error::validation("no samples to evaluate");
  for (const auto& se : result.perSample) {
    result.l2v += se.l2v;
    result.l2j += se.l2j;
  }
  result.l2v /= result.perSample.size();
  result.l2j /= result.perSample.size();
  if (countedN > 0) result.l2n = sumN / countedN;
  if (!reports.empty()) result.distortion = summarizeDistortion(reports);
  return result;
}

json evalToJson(const EvalResult& result) {
  json per = json::array();
  for (const auto& se : result.perSample) {
    json entry = {{"sample", se.sample}, {"l2v", se.l2v}, {"l2j", se.l2j}};
    if (se.l2n) entry["l2n"] = *se.l2n;
    entry["flips"] = se.flips;
    entry["highDistortion"] = se.highDistortion;
    per.push_back(entry);
  }
  json out = {{"l2v", result.l2v}, {"l2j", result.l2j}, {"perSample", per}};
  if (result.l2n) out["l2n"] = *result.l2n;
  if (result.distortion) {
    out["distortion"] = {{"avgD10", result.distortion->avgD10},
                         {"medD10", result.distortion->medD10},
                         {"avgFlips", result.distortion->avgFlips},
                         {"pctMeshesWithFlips", result.distortion->pctMeshesWithFlips}};
  }
  return out;
}

InferResult inferOnMesh(const Checkpoint& ckpt, const OperatorCache& cache, const VecX& z,
                        Exec exec) {
  if (z.size() != ckpt.zLength) {
    throw Error::validation("code length " + std::to_string(z.size()) +
                            " does not match the checkpoint (" + std::to_string(ckpt.zLength) +
                            ")");
  }
  const ModelKind kind = modelKindFromName(ckpt.model);
  const ModelInputs inputs = buildModelInputs(kind, cache, ckpt.features, exec);
  const int dims = ckpt.mode == "2d" ? 2 : 3;
  return inferModel(kind, ckpt.params, cache, inputs, z, dims, exec);
}

}  // namespace jf
