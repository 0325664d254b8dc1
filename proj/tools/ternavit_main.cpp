#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ternavit/bench.hpp"
#include "ternavit/distill.hpp"
#include "ternavit/image.hpp"
#include "ternavit/model_io.hpp"
#include "ternavit/parallel.hpp"
#include "ternavit/tensor_io.hpp"
#include "ternavit/verify.hpp"

namespace tv = ternavit;

namespace {

struct ConfigFlags {
  std::size_t layers = 3, heads = 8, embed_dim = 512, ffn_mult = 4;
  std::size_t patch = 16, image_size = 224, channels = 3, classes = 9;
  std::string attn_mode = "mqa";
  std::string ternary_set = "ffn";
  std::string precision = "f32";
  float eps = tv::kDefaultQuantEps;

  void attach(CLI::App* cmd) {
    cmd->add_option("--layers", layers, "transformer layers");
    cmd->add_option("--heads", heads, "attention heads");
    cmd->add_option("--embed-dim", embed_dim, "embedding width");
    cmd->add_option("--ffn-mult", ffn_mult, "FFN expansion factor");
    cmd->add_option("--patch", patch, "patch size in pixels");
    cmd->add_option("--image-size", image_size, "input image side in pixels");
    cmd->add_option("--channels", channels, "input channels");
    cmd->add_option("--classes", classes, "output classes");
    cmd->add_option("--attn-mode", attn_mode, "attention mode: mqa or mhsa");
    cmd->add_option("--ternary-set", ternary_set,
                    "comma list of ternary layer roles: ffn,attn_qkv,attn_out or none");
    cmd->add_option("--precision", precision, "dense storage precision: f32 or bf16");
    cmd->add_option("--eps", eps, "quantization epsilon");
  }

  tv::ModelConfig to_config() const {
    tv::ModelConfig cfg;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.embed_dim = embed_dim;
    cfg.ffn_mult = ffn_mult;
    cfg.patch_size = patch;
    cfg.image_size = image_size;
    cfg.in_channels = channels;
    cfg.num_classes = classes;
    cfg.quant_eps = eps;
    if (attn_mode == "mqa")
      cfg.attn_mode = tv::AttentionMode::MQA;
    else if (attn_mode == "mhsa")
      cfg.attn_mode = tv::AttentionMode::MHSA;
    else
      tv::fail(tv::ErrorCode::InvalidArgument, "unknown attention mode: " + attn_mode);
    cfg.ternary_roles = parse_ternary_set(ternary_set);
    cfg.dense_precision = parse_precision(precision);
    cfg.validate();
    return cfg;
  }

  static unsigned parse_ternary_set(const std::string& set) {
    if (set == "none" || set.empty()) return 0;
    unsigned roles = 0;
    std::stringstream ss(set);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "ffn")
        roles |= tv::kTernaryFfn;
      else if (item == "attn_qkv")
        roles |= tv::kTernaryAttnQkv;
      else if (item == "attn_out")
        roles |= tv::kTernaryAttnOut;
      else
        tv::fail(tv::ErrorCode::InvalidArgument, "unknown ternary role: " + item);
    }
    return roles;
  }

  static tv::Precision parse_precision(const std::string& p) {
    if (p == "f32") return tv::Precision::F32;
    if (p == "bf16") return tv::Precision::Bf16;
    tv::fail(tv::ErrorCode::UnknownPrecision, "unknown precision: " + p);
  }
};

const char* precision_name(tv::Precision p) {
  switch (p) {
    case tv::Precision::F32:
      return "f32";
    case tv::Precision::Bf16:
      return "bf16";
    case tv::Precision::TernaryPacked:
      return "ternary-packed";
  }
  return "?";
}

std::string ternary_set_name(unsigned roles) {
  if (roles == 0) return "none";
  std::string out;
  if (roles & tv::kTernaryFfn) out += "ffn,";
  if (roles & tv::kTernaryAttnQkv) out += "attn_qkv,";
  if (roles & tv::kTernaryAttnOut) out += "attn_out,";
  out.pop_back();
  return out;
}

void print_size_summary(const tv::ModelConfig& cfg) {
  const tv::ParamCounts counts = tv::param_count(cfg);
  const std::size_t bytes = tv::model_size_bytes(cfg, tv::default_precision_map(cfg));
  std::printf("parameters: %.3f M (patch %zu, pos %zu, attn %zu, ffn %zu, norms %zu, head %zu)\n",
              counts.total / 1e6, counts.patch_embed, counts.pos_embed, counts.attention,
              counts.ffn, counts.norms, counts.head);
  std::printf("stored size: %.2f MB (%zu bytes), ternary set: %s, dense precision: %s\n",
              bytes / 1e6, bytes, ternary_set_name(cfg.ternary_roles).c_str(),
              precision_name(cfg.dense_precision));
}

int run_convert(const std::string& in, const std::string& out, const ConfigFlags& flags,
                bool have_cfg_flags) {
  tv::ModelConfig cfg;
  tv::ModelWeights weights;
  if (std::filesystem::is_directory(in)) {
    cfg = flags.to_config();
    weights = tv::weights_from_ften_dir(in, cfg);
  } else {
    const tv::LoadedModel loaded = tv::load_container(in);
    cfg = loaded.config;
    weights = loaded.weights;
    if (have_cfg_flags) {
      cfg.ternary_roles = ConfigFlags::parse_ternary_set(flags.ternary_set);
      cfg.dense_precision = ConfigFlags::parse_precision(flags.precision);
      cfg.quant_eps = flags.eps;
    }
  }
  const tv::ModelWeights converted = tv::convert_weights(weights, cfg);
  tv::save_container(out, converted, cfg);
  std::printf("wrote %s\n", out.c_str());
  print_size_summary(cfg);
  const std::uint64_t file_bytes = std::filesystem::file_size(out);
  std::printf("container file: %.2f MB (%llu bytes)\n", file_bytes / 1e6,
              static_cast<unsigned long long>(file_bytes));
  return 0;
}

int run_inspect(const std::string& path) {
  const tv::ContainerInfo info = tv::inspect_container(path);
  const tv::ModelConfig& cfg = info.config;
  std::printf("container version %u\n", info.version);
  std::printf("config: layers=%zu heads=%zu embed_dim=%zu ffn_mult=%zu patch=%zu image=%zu "
              "channels=%zu classes=%zu\n",
              cfg.layers, cfg.heads, cfg.embed_dim, cfg.ffn_mult, cfg.patch_size, cfg.image_size,
              cfg.in_channels, cfg.num_classes);
  std::printf("attention: %s  ternary set: %s  dense precision: %s  quant eps: %g\n",
              cfg.attn_mode == tv::AttentionMode::MQA ? "mqa" : "mhsa",
              ternary_set_name(cfg.ternary_roles).c_str(), precision_name(cfg.dense_precision),
              cfg.quant_eps);
  std::printf("normalization:");
  for (std::size_t c = 0; c < cfg.in_channels; ++c)
    std::printf(" ch%zu mean=%.4f std=%.4f", c, cfg.channel_mean(c), cfg.channel_std(c));
  std::printf("\n%-24s %-14s %-14s %12s %12s\n", "section", "precision", "dims", "offset",
              "bytes");
  for (const auto& s : info.sections) {
    std::string dims;
    for (std::size_t i = 0; i < s.dims.size(); ++i)
      dims += (i ? "x" : "") + std::to_string(s.dims[i]);
    std::printf("%-24s %-14s %-14s %12llu %12llu\n", s.name.c_str(),
                precision_name(s.precision), dims.c_str(),
                static_cast<unsigned long long>(s.offset),
                static_cast<unsigned long long>(s.length));
  }
  std::printf("payload bytes: %llu   file bytes: %llu\n",
              static_cast<unsigned long long>(info.payload_bytes),
              static_cast<unsigned long long>(info.file_bytes));
  return 0;
}

int print_results(const std::string& suite, const std::vector<tv::CheckResult>& results) {
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s%s%s\n", r.pass ? "PASS" : "FAIL", suite.c_str(), r.name.c_str(),
                r.detail.empty() ? "" : " -- ", r.detail.c_str());
    if (!r.pass) ++failures;
  }
  return failures;
}

int run_verify(const std::vector<std::string>& suites, std::uint64_t seed, int iters,
               const std::string& fixture_dir, int label, double temperature) {
  int failures = 0;
  for (const std::string& suite : suites) {
    if (suite == "quantize")
      failures += print_results(suite, tv::verify_quantize(seed, iters));
    else if (suite == "pack")
      failures += print_results(suite, tv::verify_packing(seed, iters));
    else if (suite == "gemm")
      failures += print_results(suite, tv::verify_gemm(seed, iters));
    else if (suite == "attention")
      failures += print_results(suite, tv::verify_attention(seed, std::max(iters / 10, 100)));
    else if (suite == "model")
      failures += print_results(suite, tv::verify_model(seed, std::max(iters / 50, 20)));
    else if (suite == "distill")
      failures += print_results(suite, tv::verify_distill(seed, iters));
    else
      tv::fail(tv::ErrorCode::InvalidArgument, "unknown suite: " + suite);
  }

  if (!fixture_dir.empty()) {
    const std::string student = fixture_dir + "/student_logits.ften";
    const std::string teacher = fixture_dir + "/teacher_logits.ften";
    const tv::FloatVector s = tv::vector_from(tv::read_ften(student));
    const tv::FloatVector t = tv::vector_from(tv::read_ften(teacher));
    const double ce = tv::cross_entropy(s, static_cast<std::size_t>(label));
    const double kd = tv::kd_divergence(s, t, temperature);
    double feat = 0.0;
    const std::string sf = fixture_dir + "/student_feat.ften";
    if (std::filesystem::exists(sf)) {
      const tv::FloatMatrix sm = tv::matrix_from(tv::read_ften(sf));
      const tv::FloatMatrix tm =
          tv::matrix_from(tv::read_ften(fixture_dir + "/teacher_feat.ften"));
      const tv::FloatMatrix pm =
          tv::matrix_from(tv::read_ften(fixture_dir + "/projection.ften"));
      feat = tv::feature_loss(sm, tm, {pm});
    }
    const double total = tv::total_loss(ce, kd, feat, {1.0, 1.0, 1.0, temperature});
    std::printf("[PASS] distill-fixture: CE=%.6f KD=%.6f feat=%.6f total=%.6f\n", ce, kd, feat,
                total);
  }

  std::printf("%s\n", failures == 0 ? "verify: all properties passed"
                                    : "verify: FAILURES detected");
  return failures == 0 ? 0 : 1;
}

int run_bench(const std::string& workload, int repeats, std::uint64_t seed,
              const std::string& model_path) {
  tv::BenchOptions opts;
  opts.repeats = repeats;
  opts.seed = seed;
  std::vector<tv::BenchRow> rows;
  const bool all = workload == "all";
  if (all || workload == "ffn-kn") {
    const auto r = tv::bench_gemm_workload("ffn-kn", 197, 512, 2048, opts);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (all || workload == "ffn-nk") {
    const auto r = tv::bench_gemm_workload("ffn-nk", 197, 2048, 512, opts);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (all || workload == "full-model") {
    tv::ModelConfig cfg;
    if (!model_path.empty()) cfg = tv::inspect_container(model_path).config;
    const auto r = tv::bench_full_model(cfg, opts);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (rows.empty())
    tv::fail(tv::ErrorCode::InvalidArgument, "unknown workload: " + workload);
  tv::write_bench_csv(std::cout, rows);
  return 0;
}

int run_classify(const std::string& model_path, const std::string& image_path,
                 const std::string& labels_path) {
  const tv::LoadedModel model = tv::load_container(model_path);
  const tv::Image raw = tv::load_image(image_path, model.config.in_channels);
  if (raw.height != model.config.image_size || raw.width != model.config.image_size ||
      raw.channels != model.config.in_channels)
    tv::fail(tv::ErrorCode::DimensionMismatch,
             "image does not match the model's input geometry");
  const tv::Image input = tv::standardize(raw, model.config);
  const tv::FloatVector logits = tv::forward(input, model.weights, model.config);

  tv::FloatMatrix row(1, logits.len());
  row.data = logits.data;
  const tv::FloatMatrix probs = tv::softmax_rows(row);

  std::vector<std::string> labels;
  if (!labels_path.empty()) {
    std::ifstream ls(labels_path);
    if (!ls) tv::fail(tv::ErrorCode::IoFailure, "cannot open labels file " + labels_path);
    std::string line;
    while (std::getline(ls, line))
      if (!line.empty()) labels.push_back(line);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.len(); ++j)
    if (probs.at(0, j) > probs.at(0, best)) best = j;
  for (std::size_t j = 0; j < logits.len(); ++j) {
    const std::string name = j < labels.size() ? labels[j] : "class " + std::to_string(j);
    std::printf("%-20s logit %+9.5f prob %.5f%s\n", name.c_str(), logits[j], probs.at(0, j),
                j == best ? "  <- argmax" : "");
  }
  return 0;
}

int run_demo_model(const std::string& out, std::uint64_t seed, const ConfigFlags& flags,
                   const std::string& export_dir, const std::string& image_out) {
  const tv::ModelConfig cfg = flags.to_config();
  const tv::ModelWeights weights = tv::random_weights(cfg, seed);
  if (!export_dir.empty()) {
    tv::export_ften_dir(export_dir, weights, cfg);
    std::printf("exported FTEN tensor set to %s\n", export_dir.c_str());
  }
  if (!image_out.empty()) {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    tv::TensorFile t;
    t.dims = {cfg.image_size, cfg.image_size, cfg.in_channels};
    t.values.resize(cfg.image_size * cfg.image_size * cfg.in_channels);
    for (float& v : t.values) v = dist(rng);
    tv::write_ften(image_out, t);
    std::printf("wrote synthetic FTEN image %s\n", image_out.c_str());
  }
  if (!out.empty()) {
    tv::save_container(out, weights, cfg);
    std::printf("wrote dense model %s (convert it to pack the ternary layers)\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ternavit: ternary-quantized (W2A8) vision transformer inference engine"};
  app.require_subcommand(1);

  // convert
  auto* convert = app.add_subcommand("convert", "quantize and pack a dense model container "
                                                "or an FTEN tensor-set directory");
  std::string conv_in, conv_out;
  ConfigFlags conv_flags;
  convert->add_option("--in", conv_in, "input .bmvc or FTEN directory")->required();
  convert->add_option("--out", conv_out, "output .bmvc path")->required();
  conv_flags.attach(convert);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "pretty-print a model container header");
  std::string inspect_path;
  inspect->add_option("path", inspect_path, "container path")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "run the module property suites");
  std::vector<std::string> suites;
  std::uint64_t verify_seed = 42;
  int verify_iters = 1000;
  std::string fixture_dir;
  int fixture_label = 0;
  double fixture_temp = 1.0;
  verify->add_option("suites", suites,
                     "suites: quantize pack gemm attention model distill (default: all)");
  verify->add_option("--seed", verify_seed, "random seed");
  verify->add_option("--iters", verify_iters, "randomized iterations per suite");
  verify->add_option("--fixture-dir", fixture_dir,
                     "distill fixture directory with student/teacher FTEN tensors");
  verify->add_option("--label", fixture_label, "true class for the fixture CE term");
  verify->add_option("--temperature", fixture_temp, "fixture KD temperature");

  // bench
  auto* bench = app.add_subcommand("bench", "kernel and model timing, CSV on stdout");
  std::string workload = "all";
  int repeats = 30;
  std::uint64_t bench_seed = 17;
  std::string bench_model;
  bench->add_option("--workload", workload, "ffn-kn | ffn-nk | full-model | all");
  bench->add_option("--repeats", repeats, "timing repeats (median reported)");
  bench->add_option("--seed", bench_seed, "random seed for synthetic weights");
  bench->add_option("--model", bench_model, "container supplying the full-model config");

  // classify
  auto* classify = app.add_subcommand("classify", "run one image through a model");
  std::string cls_model, cls_image, cls_labels;
  classify->add_option("--model", cls_model, "model container")->required();
  classify->add_option("--image", cls_image, "PNG or FTEN image")->required();
  classify->add_option("--labels", cls_labels, "newline-separated class names");

  // demo-model
  auto* demo = app.add_subcommand("demo-model",
                                  "write a synthetic dense model for conversion and benching");
  std::string demo_out, demo_export, demo_image;
  std::uint64_t demo_seed = 7;
  ConfigFlags demo_flags;
  demo->add_option("--out", demo_out, "output dense .bmvc path");
  demo->add_option("--export-ften", demo_export, "also export the FTEN tensor set here");
  demo->add_option("--export-image", demo_image, "write a synthetic FTEN test image here");
  demo->add_option("--seed", demo_seed, "weight seed");
  demo_flags.attach(demo);

  CLI11_PARSE(app, argc, argv);

  try {
    if (convert->parsed()) {
      const bool have_flags = convert->count("--ternary-set") || convert->count("--precision") ||
                              convert->count("--eps");
      return run_convert(conv_in, conv_out, conv_flags, have_flags);
    }
    if (inspect->parsed()) return run_inspect(inspect_path);
    if (verify->parsed()) {
      if (suites.empty())
        suites = {"quantize", "pack", "gemm", "attention", "model", "distill"};
      return run_verify(suites, verify_seed, verify_iters, fixture_dir, fixture_label,
                        fixture_temp);
    }
    if (bench->parsed()) return run_bench(workload, repeats, bench_seed, bench_model);
    if (classify->parsed()) return run_classify(cls_model, cls_image, cls_labels);
    if (demo->parsed())
      return run_demo_model(demo_out, demo_seed, demo_flags, demo_export, demo_image);
  } catch (const tv::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
