#pragma once

#include "jf/checkpoint.hpp"
#include "jf/dataset.hpp"
#include "jf/fields.hpp"
#include "jf/poisson.hpp"

#include <filesystem>
#include <optional>

namespace jf {

// field: per-triangle 3x3 predictions restricted to tangent spaces and
// integrated by the Poisson layer. displacement: per-vertex offsets from the
// same MLP shell (no gradient-domain step). global_tensor: one z-only MLP
// emitting the whole jacobian stack of a fixed mesh.
enum class ModelKind { Field, Displacement, GlobalTensor };

ModelKind modelKindFromName(const std::string& name);
std::string modelName(ModelKind kind);

// Per-mesh inputs precomputed once (Algorithm-style preprocessing product).
struct ModelInputs {
  MatX features;              // centroid rows (field), vertex rows (displacement)
  JacobianStack identityStack;  // jacobians of the identity embedding (global_tensor offset)
};

ModelInputs buildModelInputs(ModelKind kind, const OperatorCache& cache,
                             const FeatureConfig& features, Exec exec = Exec::Parallel);

struct InferResult {
  VertexMap phi;        // V x d
  JacobianStack stack;  // 2T x d candidate jacobians fed to the solve; empty for displacement
};

// dims = 3, or 2 in UV mode (restriction still happens in 3D; the stack's
// z column is dropped at the solve boundary).
InferResult inferModel(ModelKind kind, const MlpParams& params, const OperatorCache& cache,
                       const ModelInputs& inputs, const VecX& z, int dims,
                       Exec exec = Exec::Parallel);

struct LossBreakdown {
  double lVertex = 0.0;
  double lJacobian = 0.0;
  double lTotal = 0.0;  // 10 * lVertex + lJacobian, same floating path
};

// stack and gtStack are 2T x d (pass empty matrices for the displacement
// model, whose loss has no jacobian term). Both maps are mass-centered with
// source-mesh masses before the vertex term.
LossBreakdown computeLoss(const OperatorCache& cache, const VertexMap& phi,
                          const JacobianStack& stack, const VertexMap& psi,
                          const JacobianStack& gtStack);

// Full backward pass for one sample: loss gradients through the Poisson
// adjoint (vertex term) plus the direct jacobian-term gradient, then the
// restriction adjoint and the network backward. Returns parameter gradients.
MlpGrads backwardModel(ModelKind kind, const MlpParams& params, const OperatorCache& cache,
                       const ModelInputs& inputs, const VecX& z, const InferResult& fwd,
                       const VertexMap& psi, const JacobianStack& gtStack,
                       Exec exec = Exec::Parallel);

struct TrainOutcome {
  Checkpoint checkpoint;
  std::filesystem::path checkpointPath;
  std::filesystem::path lossLogPath;   // deterministic per-epoch record
  std::filesystem::path trainLogPath;  // same plus wall-clock seconds
  int epochsRun = 0;
  double firstLoss = 0.0;
  double lastLoss = 0.0;
};

// Adam over shuffled per-mesh batches with the plateau learning-rate drop.
// Writes checkpoint.jfk, loss_log.jsonl and train_log.jsonl into outDir.
TrainOutcome trainModel(const Dataset& dataset, const RunConfig& config, ModelKind kind,
                        const std::filesystem::path& outDir, Exec exec = Exec::Parallel);

struct SampleEval {
  int sample = 0;
  double l2v = 0.0;
  double l2j = 0.0;
  std::optional<double> l2n;  // absent in UV mode
  long flips = 0;
  long highDistortion = 0;
};

struct EvalResult {
  double l2v = 0.0;  // mean vertex L2 after unit-sphere normalization, x100
  double l2j = 0.0;  // mean jacobian L2 of the normalized maps, x10
  std::optional<double> l2n;  // mean face-normal angle, degrees (3D only)
  std::vector<SampleEval> perSample;
  std::optional<DistortionSummary> distortion;  // UV mode
};

EvalResult evaluateModel(const Dataset& dataset, const std::vector<int>& sampleIndices,
                         const Checkpoint& ckpt, Exec exec = Exec::Parallel);

nlohmann::json evalToJson(const EvalResult& result);

// Feature/infer helper for a standalone mesh (CLI inference path). Computes
// the spectrum on demand when the checkpoint's features need it.
InferResult inferOnMesh(const Checkpoint& ckpt, const OperatorCache& cache, const VecX& z,
                        Exec exec = Exec::Parallel);

}  // namespace jf
