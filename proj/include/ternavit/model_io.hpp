#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ternavit/model.hpp"

namespace ternavit {

inline constexpr char kContainerMagic[4] = {'B', 'M', 'V', 'C'};
inline constexpr std::uint32_t kContainerVersion = 1;

enum class TensorRole : std::uint32_t {
  PatchEmbed = 0,
  PosEmbed,
  ClassToken,
  Norm1Gain,
  Norm1Bias,
  AttnQ,
  AttnK,
  AttnV,
  AttnO,
  Norm2Gain,
  Norm2Bias,
  FfnIn,
  FfnOut,
  FinalNormGain,
  FinalNormBias,
  HeadWeight,
  HeadBias,
};

inline constexpr std::uint32_t kNoLayer = 0xffffffffu;

struct SectionInfo {
  std::string name;
  TensorRole role = TensorRole::PatchEmbed;
  std::uint32_t layer = kNoLayer;
  Precision precision = Precision::F32;
  std::vector<std::uint64_t> dims;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

struct ContainerInfo {
  std::uint32_t version = 0;
  ModelConfig config;
  std::vector<SectionInfo> sections;
  std::uint64_t payload_bytes = 0;
  std::uint64_t file_bytes = 0;
};

// Applies the config's quantization plan: linears whose role is in
// cfg.ternary_roles go through absmean quantization and packing, with beta
// rounded to its 16-bit stored value so the runtime scale equals the stored
// one; everything else is rounded to the dense precision. Rejects NaN weights.
ModelWeights convert_weights(const ModelWeights& src, const ModelConfig& cfg);

// Replaces packed linears with their unpacked ternary runtime form; the two
// forms produce bitwise-identical forwards.
ModelWeights unpack_linears(const ModelWeights& w);

void save_container(const std::string& path, const ModelWeights& w, const ModelConfig& cfg);

struct LoadedModel {
  ModelWeights weights;
  ModelConfig config;
};

// Full validation at load time: magic, version, section table bounds and
// overlap, required tensor set, dims, and ternary bit patterns.
LoadedModel load_container(const std::string& path);

// Header and section table only; payload is not read.
ContainerInfo inspect_container(const std::string& path);

// Assembles dense weights from a directory of FTEN files named after the
// container sections (e.g. "layers.0.attn.wq.ften"). Any absent tensor is a
// missing-tensor error.
ModelWeights weights_from_ften_dir(const std::string& dir, const ModelConfig& cfg);

// Writes every tensor of a dense model as FTEN files into dir.
void export_ften_dir(const std::string& dir, const ModelWeights& w, const ModelConfig& cfg);

}  // namespace ternavit
