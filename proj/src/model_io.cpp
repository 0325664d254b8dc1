#include "ternavit/model_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <utility>

#include "ternavit/binio.hpp"
#include "ternavit/tensor_io.hpp"

namespace ternavit {

namespace {

enum class SlotKind { Matrix, Vector, Linear };

template <typename W>
struct SlotRef {
  std::string name;
  TensorRole role;
  std::uint32_t layer;
  SlotKind kind;
  std::vector<std::uint64_t> dims;  // matrices/linears: [in, out]; vectors: [len]
  decltype(&std::declval<W&>().patch_embed) mat = nullptr;
  decltype(&std::declval<W&>().class_token) vec = nullptr;
  decltype(&std::declval<W&>().layers[0].attn.wq) lin = nullptr;
};

template <typename W>
std::vector<SlotRef<W>> enumerate_slots(W& w, const ModelConfig& cfg) {
  const std::uint64_t e = cfg.embed_dim;
  const std::uint64_t kv = cfg.kv_width();
  const std::uint64_t eff = cfg.ffn_dim();
  std::vector<SlotRef<W>> slots;
  slots.push_back({"patch_embed", TensorRole::PatchEmbed, kNoLayer, SlotKind::Matrix,
                   {cfg.patch_dim(), e}, &w.patch_embed, nullptr, nullptr});
  slots.push_back({"pos_embed", TensorRole::PosEmbed, kNoLayer, SlotKind::Matrix,
                   {cfg.tokens(), e}, &w.pos_embed, nullptr, nullptr});
  slots.push_back({"class_token", TensorRole::ClassToken, kNoLayer, SlotKind::Vector, {e},
                   nullptr, &w.class_token, nullptr});
  for (std::uint32_t l = 0; l < cfg.layers; ++l) {
    auto& layer = w.layers[l];
    const std::string base = "layers." + std::to_string(l) + ".";
    slots.push_back({base + "norm1.gain", TensorRole::Norm1Gain, l, SlotKind::Vector, {e},
                     nullptr, &layer.norm1_gain, nullptr});
    slots.push_back({base + "norm1.bias", TensorRole::Norm1Bias, l, SlotKind::Vector, {e},
                     nullptr, &layer.norm1_bias, nullptr});
    slots.push_back({base + "attn.wq", TensorRole::AttnQ, l, SlotKind::Linear, {e, e}, nullptr,
                     nullptr, &layer.attn.wq});
    slots.push_back({base + "attn.wk", TensorRole::AttnK, l, SlotKind::Linear, {e, kv}, nullptr,
                     nullptr, &layer.attn.wk});
    slots.push_back({base + "attn.wv", TensorRole::AttnV, l, SlotKind::Linear, {e, kv}, nullptr,
                     nullptr, &layer.attn.wv});
    slots.push_back({base + "attn.wo", TensorRole::AttnO, l, SlotKind::Linear, {e, e}, nullptr,
                     nullptr, &layer.attn.wo});
    slots.push_back({base + "norm2.gain", TensorRole::Norm2Gain, l, SlotKind::Vector, {e},
                     nullptr, &layer.norm2_gain, nullptr});
    slots.push_back({base + "norm2.bias", TensorRole::Norm2Bias, l, SlotKind::Vector, {e},
                     nullptr, &layer.norm2_bias, nullptr});
    slots.push_back({base + "ffn.in", TensorRole::FfnIn, l, SlotKind::Linear, {e, eff}, nullptr,
                     nullptr, &layer.ffn_in});
    slots.push_back({base + "ffn.out", TensorRole::FfnOut, l, SlotKind::Linear, {eff, e},
                     nullptr, nullptr, &layer.ffn_out});
  }
  slots.push_back({"final_norm.gain", TensorRole::FinalNormGain, kNoLayer, SlotKind::Vector, {e},
                   nullptr, &w.final_norm_gain, nullptr});
  slots.push_back({"final_norm.bias", TensorRole::FinalNormBias, kNoLayer, SlotKind::Vector, {e},
                   nullptr, &w.final_norm_bias, nullptr});
  slots.push_back({"head.weight", TensorRole::HeadWeight, kNoLayer, SlotKind::Matrix,
                   {e, cfg.num_classes}, &w.head, nullptr, nullptr});
  slots.push_back({"head.bias", TensorRole::HeadBias, kNoLayer, SlotKind::Vector,
                   {cfg.num_classes}, nullptr, &w.head_bias, nullptr});
  return slots;
}

bool role_is_ternary(TensorRole role, unsigned ternary_roles) {
  switch (role) {
    case TensorRole::FfnIn:
    case TensorRole::FfnOut:
      return ternary_roles & kTernaryFfn;
    case TensorRole::AttnQ:
    case TensorRole::AttnK:
    case TensorRole::AttnV:
      return ternary_roles & kTernaryAttnQkv;
    case TensorRole::AttnO:
      return ternary_roles & kTernaryAttnOut;
    default:
      return false;
  }
}

std::uint64_t numel_of(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return n;
}

std::uint64_t section_payload_length(Precision p, const std::vector<std::uint64_t>& dims) {
  if (p == Precision::TernaryPacked) {
    if (dims.size() != 2)
      fail(ErrorCode::CorruptData, "ternary sections must be two-dimensional");
    // dims are [k_in, n_out]; + 2 bytes for the stored beta.
    return packed_weight_bytes(dims[1], dims[0]) + 2;
  }
  return numel_of(dims) * (p == Precision::F32 ? 4 : 2);
}

void write_dense(std::ostream& os, const float* p, std::size_t n, Precision prec) {
  if (prec == Precision::F32) {
    binio::put_bytes(os, p, n * 4);
  } else {
    for (std::size_t i = 0; i < n; ++i) binio::put_u16(os, binio::f32_to_bf16(p[i]));
  }
}

std::vector<float> read_dense(std::istream& is, std::size_t n, Precision prec) {
  std::vector<float> out(n);
  if (prec == Precision::F32) {
    binio::get_bytes(is, out.data(), n * 4);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = binio::bf16_to_f32(binio::get_u16(is));
  }
  return out;
}

void round_dense(FloatMatrix& m) {
  for (float& v : m.data) v = binio::round_to_bf16(v);
}

void round_dense(FloatVector& v) {
  for (float& x : v.data) x = binio::round_to_bf16(x);
}

struct ParsedHeader {
  ContainerInfo info;
  std::uint64_t header_bytes = 0;
};

ParsedHeader read_header(std::istream& is, const std::string& path) {
  char magic[4];
  binio::get_bytes(is, magic, 4);
  if (std::memcmp(magic, kContainerMagic, 4) != 0)
    fail(ErrorCode::BadMagic, path + ": not a model container (bad magic)");
  ParsedHeader h;
  h.info.version = binio::get_u32(is);
  if (h.info.version != kContainerVersion)
    fail(ErrorCode::VersionMismatch,
         path + ": unsupported container version " + std::to_string(h.info.version));
  ModelConfig& cfg = h.info.config;
  cfg.layers = binio::get_u32(is);
  cfg.heads = binio::get_u32(is);
  cfg.embed_dim = binio::get_u32(is);
  cfg.ffn_mult = binio::get_u32(is);
  cfg.patch_size = binio::get_u32(is);
  cfg.image_size = binio::get_u32(is);
  cfg.in_channels = binio::get_u32(is);
  cfg.num_classes = binio::get_u32(is);
  const std::uint32_t mode = binio::get_u32(is);
  if (mode > 1) fail(ErrorCode::CorruptData, path + ": invalid attention mode tag");
  cfg.attn_mode = mode == 1 ? AttentionMode::MQA : AttentionMode::MHSA;
  cfg.ternary_roles = binio::get_u32(is);
  const std::uint32_t dense = binio::get_u32(is);
  if (dense > 1) fail(ErrorCode::UnknownPrecision, path + ": invalid dense precision tag");
  cfg.dense_precision = static_cast<Precision>(dense);
  cfg.quant_eps = binio::get_f32(is);
  cfg.norm_mean.resize(cfg.in_channels);
  cfg.norm_std.resize(cfg.in_channels);
  for (auto& v : cfg.norm_mean) v = binio::get_f32(is);
  for (auto& v : cfg.norm_std) v = binio::get_f32(is);
  cfg.validate();

  const std::uint32_t section_count = binio::get_u32(is);
  if (section_count > 100000) fail(ErrorCode::CorruptData, path + ": implausible section count");
  h.info.sections.resize(section_count);
  for (auto& s : h.info.sections) {
    const std::uint32_t name_len = binio::get_u32(is);
    if (name_len == 0 || name_len > 4096)
      fail(ErrorCode::CorruptData, path + ": implausible section name length");
    s.name.resize(name_len);
    binio::get_bytes(is, s.name.data(), name_len);
    const std::uint32_t role = binio::get_u32(is);
    if (role > static_cast<std::uint32_t>(TensorRole::HeadBias))
      fail(ErrorCode::CorruptData, path + ": unknown tensor role tag");
    s.role = static_cast<TensorRole>(role);
    s.layer = binio::get_u32(is);
    const std::uint32_t prec = binio::get_u32(is);
    if (prec > 2) fail(ErrorCode::UnknownPrecision, path + ": unknown precision tag");
    s.precision = static_cast<Precision>(prec);
    const std::uint32_t ndims = binio::get_u32(is);
    if (ndims == 0 || ndims > 4) fail(ErrorCode::CorruptData, path + ": implausible ndims");
    s.dims.resize(ndims);
    for (auto& d : s.dims) d = binio::get_u64(is);
    s.offset = binio::get_u64(is);
    s.length = binio::get_u64(is);
    h.info.payload_bytes += s.length;
  }
  h.header_bytes = static_cast<std::uint64_t>(is.tellg());
  return h;
}

void check_section_layout(const ContainerInfo& info, std::uint64_t header_bytes,
                          std::uint64_t file_bytes, const std::string& path) {
  std::vector<const SectionInfo*> by_offset;
  by_offset.reserve(info.sections.size());
  for (const auto& s : info.sections) {
    if (s.length != section_payload_length(s.precision, s.dims))
      fail(ErrorCode::CorruptData, path + ": section '" + s.name + "' length does not match dims");
    if (s.offset < header_bytes)
      fail(ErrorCode::SectionOverlap, path + ": section '" + s.name + "' overlaps the header");
    if (s.offset + s.length > file_bytes)
      fail(ErrorCode::CorruptData,
           path + ": section '" + s.name + "' extends past end of file (truncated?)");
    by_offset.push_back(&s);
  }
  std::sort(by_offset.begin(), by_offset.end(),
            [](const SectionInfo* a, const SectionInfo* b) { return a->offset < b->offset; });
  for (std::size_t i = 1; i < by_offset.size(); ++i) {
    if (by_offset[i - 1]->offset + by_offset[i - 1]->length > by_offset[i]->offset)
      fail(ErrorCode::SectionOverlap, path + ": sections '" + by_offset[i - 1]->name + "' and '" +
                                          by_offset[i]->name + "' overlap");
  }
}

PackedWeightTiles read_packed_section(std::istream& is, const SectionInfo& s,
                                      const std::string& path) {
  PackedWeightTiles p;
  p.k_in = static_cast<std::size_t>(s.dims[0]);
  p.n_out = static_cast<std::size_t>(s.dims[1]);
  p.words.resize(p.expected_words());
  binio::get_bytes(is, p.words.data(), p.words.size() * 4);
  p.beta = binio::bf16_to_f32(binio::get_u16(is));
  for (std::uint32_t w : p.words)
    if ((w & (w >> 1) & 0x55555555u) != 0)
      fail(ErrorCode::CorruptData,
           path + ": section '" + s.name + "' contains a reserved 2-bit code pattern");
  return p;
}

}  // namespace

ModelWeights convert_weights(const ModelWeights& src, const ModelConfig& cfg) {
  cfg.validate();
  if (src.layers.size() != cfg.layers)
    fail(ErrorCode::DimensionMismatch, "convert_weights: layer count mismatch");
  ModelWeights out = src;
  auto slots = enumerate_slots(out, cfg);
  const bool to_bf16 = cfg.dense_precision == Precision::Bf16;
  for (auto& slot : slots) {
    if (slot.kind == SlotKind::Linear) {
      Linear& lin = *slot.lin;
      if (lin.is_dense()) {
        const FloatMatrix& dense = lin.dense();
        if (dense.rows != slot.dims[0] || dense.cols != slot.dims[1])
          fail(ErrorCode::DimensionMismatch, "convert_weights: '" + slot.name + "' shape mismatch");
        if (!all_finite(dense))
          fail(ErrorCode::NonFinite, "convert_weights: '" + slot.name + "' has non-finite values");
        if (role_is_ternary(slot.role, cfg.ternary_roles)) {
          TernaryWeightMatrix t = absmean_quantize(dense, cfg.quant_eps);
          t.beta = binio::round_to_bf16(t.beta);  // scales live at 16-bit precision
          lin = Linear(pack_ternary(t));
        } else if (to_bf16) {
          FloatMatrix rounded = dense;
          round_dense(rounded);
          lin = Linear(std::move(rounded));
        }
      }
      // Already-quantized linears pass through unchanged.
    } else if (to_bf16) {
      if (slot.mat) round_dense(*slot.mat);
      if (slot.vec) round_dense(*slot.vec);
    }
  }
  return out;
}

ModelWeights unpack_linears(const ModelWeights& w) {
  ModelWeights out = w;
  auto visit_layer = [](Linear& lin) {
    if (const auto* p = std::get_if<PackedWeightTiles>(&lin.weights))
      lin = Linear(unpack_ternary(*p));
  };
  for (auto& layer : out.layers) {
    visit_layer(layer.attn.wq);
    visit_layer(layer.attn.wk);
    visit_layer(layer.attn.wv);
    visit_layer(layer.attn.wo);
    visit_layer(layer.ffn_in);
    visit_layer(layer.ffn_out);
  }
  return out;
}

void save_container(const std::string& path, const ModelWeights& w, const ModelConfig& cfg) {
  cfg.validate();
  if (w.layers.size() != cfg.layers)
    fail(ErrorCode::DimensionMismatch, "save_container: layer count mismatch");

  auto slots = enumerate_slots(w, cfg);

  struct PendingSection {
    SectionInfo info;
    const FloatMatrix* mat = nullptr;
    const FloatVector* vec = nullptr;
    const Linear* lin = nullptr;
    PackedWeightTiles packed_tmp;  // used when a ternary linear is not packed yet
    bool use_tmp = false;
  };
  std::vector<PendingSection> sections;
  sections.reserve(slots.size());

  for (const auto& slot : slots) {
    PendingSection ps;
    ps.info.name = slot.name;
    ps.info.role = slot.role;
    ps.info.layer = slot.layer;
    ps.info.dims = slot.dims;
    if (slot.kind == SlotKind::Linear) {
      const Linear& lin = *slot.lin;
      if (lin.in_dim() != slot.dims[0] || lin.out_dim() != slot.dims[1])
        fail(ErrorCode::DimensionMismatch, "save_container: '" + slot.name + "' shape mismatch");
      if (lin.is_dense()) {
        ps.info.precision = cfg.dense_precision;
        ps.lin = &lin;
      } else {
        ps.info.precision = Precision::TernaryPacked;
        if (const auto* t = std::get_if<TernaryWeightMatrix>(&lin.weights)) {
          ps.packed_tmp = pack_ternary(*t);
          ps.use_tmp = true;
        } else {
          ps.lin = &lin;
        }
      }
    } else {
      ps.info.precision = cfg.dense_precision;
      if (slot.mat) {
        if (slot.mat->rows != slot.dims[0] || slot.mat->cols != slot.dims[1])
          fail(ErrorCode::DimensionMismatch, "save_container: '" + slot.name + "' shape mismatch");
        ps.mat = slot.mat;
      } else {
        if (slot.vec->len() != slot.dims[0])
          fail(ErrorCode::DimensionMismatch, "save_container: '" + slot.name + "' shape mismatch");
        ps.vec = slot.vec;
      }
    }
    ps.info.length = section_payload_length(ps.info.precision, ps.info.dims);
    sections.push_back(std::move(ps));
  }

  // Header size is fixed once names and dims are known; offsets follow.
  std::uint64_t header_bytes = 4 + 4 + 11 * 4 + 4 + 8ull * cfg.in_channels + 4;
  for (const auto& ps : sections)
    header_bytes += 4 + ps.info.name.size() + 4 + 4 + 4 + 4 + 8ull * ps.info.dims.size() + 16;
  std::uint64_t offset = header_bytes;
  for (auto& ps : sections) {
    ps.info.offset = offset;
    offset += ps.info.length;
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoFailure, "save_container: cannot open " + path);
  binio::put_bytes(os, kContainerMagic, 4);
  binio::put_u32(os, kContainerVersion);
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.layers));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.heads));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.embed_dim));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.ffn_mult));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.patch_size));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.image_size));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.in_channels));
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.num_classes));
  binio::put_u32(os, cfg.attn_mode == AttentionMode::MQA ? 1 : 0);
  binio::put_u32(os, cfg.ternary_roles);
  binio::put_u32(os, static_cast<std::uint32_t>(cfg.dense_precision));
  binio::put_f32(os, cfg.quant_eps);
  for (std::size_t c = 0; c < cfg.in_channels; ++c) binio::put_f32(os, cfg.channel_mean(c));
  for (std::size_t c = 0; c < cfg.in_channels; ++c) binio::put_f32(os, cfg.channel_std(c));
  binio::put_u32(os, static_cast<std::uint32_t>(sections.size()));
  for (const auto& ps : sections) {
    binio::put_u32(os, static_cast<std::uint32_t>(ps.info.name.size()));
    binio::put_bytes(os, ps.info.name.data(), ps.info.name.size());
    binio::put_u32(os, static_cast<std::uint32_t>(ps.info.role));
    binio::put_u32(os, ps.info.layer);
    binio::put_u32(os, static_cast<std::uint32_t>(ps.info.precision));
    binio::put_u32(os, static_cast<std::uint32_t>(ps.info.dims.size()));
    for (std::uint64_t d : ps.info.dims) binio::put_u64(os, d);
    binio::put_u64(os, ps.info.offset);
    binio::put_u64(os, ps.info.length);
  }
  if (static_cast<std::uint64_t>(os.tellp()) != header_bytes)
    fail(ErrorCode::IoFailure, "save_container: header size accounting bug");

  for (const auto& ps : sections) {
    if (ps.info.precision == Precision::TernaryPacked) {
      const PackedWeightTiles& p =
          ps.use_tmp ? ps.packed_tmp : std::get<PackedWeightTiles>(ps.lin->weights);
      binio::put_bytes(os, p.words.data(), p.words.size() * 4);
      binio::put_u16(os, binio::f32_to_bf16(p.beta));
    } else if (ps.lin) {
      const FloatMatrix& m = ps.lin->dense();
      write_dense(os, m.data.data(), m.size(), ps.info.precision);
    } else if (ps.mat) {
      write_dense(os, ps.mat->data.data(), ps.mat->size(), ps.info.precision);
    } else {
      write_dense(os, ps.vec->data.data(), ps.vec->len(), ps.info.precision);
    }
  }
  if (!os) fail(ErrorCode::IoFailure, "save_container: write failed");
}

LoadedModel load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "load_container: cannot open " + path);
  is.seekg(0, std::ios::end);
  const std::uint64_t file_bytes = static_cast<std::uint64_t>(is.tellg());
  is.seekg(0);
  ParsedHeader h = read_header(is, path);
  check_section_layout(h.info, h.header_bytes, file_bytes, path);

  LoadedModel model;
  model.config = h.info.config;
  model.weights.layers.resize(model.config.layers);
  auto slots = enumerate_slots(model.weights, model.config);

  std::vector<bool> seen(slots.size(), false);
  for (const auto& s : h.info.sections) {
    std::size_t idx = slots.size();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].name == s.name) {
        idx = i;
        break;
      }
    }
    if (idx == slots.size())
      fail(ErrorCode::CorruptData, path + ": unexpected tensor '" + s.name + "'");
    if (seen[idx]) fail(ErrorCode::DuplicateTensor, path + ": duplicate tensor '" + s.name + "'");
    seen[idx] = true;
    auto& slot = slots[idx];
    if (s.dims != slot.dims)
      fail(ErrorCode::CorruptData, path + ": tensor '" + s.name + "' has unexpected dims");
    if (s.precision == Precision::TernaryPacked && slot.kind != SlotKind::Linear)
      fail(ErrorCode::CorruptData, path + ": tensor '" + s.name + "' cannot be ternary");

    is.seekg(static_cast<std::streamoff>(s.offset));
    if (slot.kind == SlotKind::Linear) {
      if (s.precision == Precision::TernaryPacked) {
        *slot.lin = Linear(read_packed_section(is, s, path));
      } else {
        FloatMatrix m(static_cast<std::size_t>(s.dims[0]), static_cast<std::size_t>(s.dims[1]));
        m.data = read_dense(is, m.size(), s.precision);
        *slot.lin = Linear(std::move(m));
      }
    } else if (slot.kind == SlotKind::Matrix) {
      FloatMatrix m(static_cast<std::size_t>(s.dims[0]), static_cast<std::size_t>(s.dims[1]));
      m.data = read_dense(is, m.size(), s.precision);
      *slot.mat = std::move(m);
    } else {
      FloatVector v;
      v.data = read_dense(is, static_cast<std::size_t>(s.dims[0]), s.precision);
      *slot.vec = std::move(v);
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (!seen[i])
      fail(ErrorCode::MissingTensor, path + ": missing tensor '" + slots[i].name + "'");
  return model;
}

ContainerInfo inspect_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "inspect_container: cannot open " + path);
  is.seekg(0, std::ios::end);
  const std::uint64_t file_bytes = static_cast<std::uint64_t>(is.tellg());
  is.seekg(0);
  ParsedHeader h = read_header(is, path);
  h.info.file_bytes = file_bytes;
  check_section_layout(h.info, h.header_bytes, file_bytes, path);
  return h.info;
}

ModelWeights weights_from_ften_dir(const std::string& dir, const ModelConfig& cfg) {
  cfg.validate();
  ModelWeights w;
  w.layers.resize(cfg.layers);
  auto slots = enumerate_slots(w, cfg);
  for (auto& slot : slots) {
    const std::string path = dir + "/" + slot.name + ".ften";
    if (!std::ifstream(path).good())
      fail(ErrorCode::MissingTensor, "missing tensor '" + slot.name + "' (" + path + ")");
    const TensorFile t = read_ften(path);
    if (slot.kind == SlotKind::Vector) {
      if (t.dims.size() != 1 || t.dims[0] != slot.dims[0])
        fail(ErrorCode::DimensionMismatch, "tensor '" + slot.name + "' has unexpected dims");
      *slot.vec = vector_from(t);
    } else {
      if (t.dims != slot.dims)
        fail(ErrorCode::DimensionMismatch, "tensor '" + slot.name + "' has unexpected dims");
      FloatMatrix m = matrix_from(t);
      if (slot.kind == SlotKind::Matrix)
        *slot.mat = std::move(m);
      else
        *slot.lin = Linear(std::move(m));
    }
  }
  return w;
}

void export_ften_dir(const std::string& dir, const ModelWeights& w, const ModelConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(dir);
  auto slots = enumerate_slots(w, cfg);
  for (const auto& slot : slots) {
    const std::string path = dir + "/" + slot.name + ".ften";
    if (slot.kind == SlotKind::Vector) {
      write_ften(path, to_tensor_file(*slot.vec));
    } else if (slot.kind == SlotKind::Matrix) {
      write_ften(path, to_tensor_file(*slot.mat));
    } else {
      if (!slot.lin->is_dense())
        fail(ErrorCode::InvalidArgument,
             "export_ften_dir: '" + slot.name + "' is quantized; only dense models export");
      write_ften(path, to_tensor_file(slot.lin->dense()));
    }
  }
}

}  // namespace ternavit
