#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssan/matrix.hpp"
#include "ssan/tape.hpp"

namespace ssan {

/// Negative-side slope of every Leaky ReLU in the networks.
inline constexpr double kLeakySlope = 0.01;

struct ModelShapes {
  std::size_t d_s = 0;       // source feature width
  std::size_t d_t = 0;       // target feature width
  std::size_t h = 256;       // encoder hidden width
  std::size_t d_common = 256;  // shared embedding width
  std::size_t K = 0;         // class count
};

struct InitSpec {
  std::uint64_t seed = 0;
};

/// The four networks. Two two-layer encoders (source d_s->h->d_common,
/// target d_t->h->d_common, Leaky ReLU after each layer), a single-layer
/// shared classifier (d_common->K, raw logits) and a single-layer domain
/// discriminator (d_common->1, logistic output).
///
/// Parameters live in a name-keyed map: es.w1 es.b1 es.w2 es.b2, et.w1
/// et.b1 et.w2 et.b2, cls.w cls.b, disc.w disc.b.
struct SsanModel {
  ModelShapes shapes;
  ParamMap params;
};

/// Weights drawn uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
/// Weight matrices are filled in a fixed documented order (es.w1, es.w2,
/// et.w1, et.w2, cls.w, disc.w) from one generator, so the same seed
/// always yields the same bytes.
SsanModel init_model(const ModelShapes& shapes, const InitSpec& init);

// ---- plain forwards (evaluation path; same kernels as the tape path) ----
Matrix encode_source(const SsanModel& m, const Matrix& X);   // f_S
Matrix encode_target(const SsanModel& m, const Matrix& X);   // f_T
Matrix classify(const SsanModel& m, const Matrix& Z);        // logits
Matrix discriminate(const SsanModel& m, const Matrix& Z);    // in (0,1)

/// Per-class argmax predictions from logits rows.
std::vector<int> predict_labels(const Matrix& logits);

// ---- tape forwards (training path) ----
/// Node handles for every parameter after registering them on a tape.
struct TapeModel {
  Tape::NodeId es_w1, es_b1, es_w2, es_b2;
  Tape::NodeId et_w1, et_b1, et_w2, et_b2;
  Tape::NodeId cls_w, cls_b;
  Tape::NodeId disc_w, disc_b;
};

TapeModel put_on_tape(Tape& t, const SsanModel& m);
TapeModel put_on_tape(Tape& t, const ParamMap& params);
Tape::NodeId encode_source(Tape& t, const TapeModel& tm, Tape::NodeId x);
Tape::NodeId encode_target(Tape& t, const TapeModel& tm, Tape::NodeId x);
Tape::NodeId classify(Tape& t, const TapeModel& tm, Tape::NodeId z);
Tape::NodeId discriminate(Tape& t, const TapeModel& tm, Tape::NodeId z);

/// Parameter-name partitions for the two minimax players.
const std::vector<std::string>& encoder_classifier_param_names();
const std::vector<std::string>& discriminator_param_names();

/// Plain-text checkpoint ("ssan-model v1"), 17-significant-digit values;
/// save followed by load restores parameters bit-exactly.
void save_model(const SsanModel& m, const std::string& path);
SsanModel load_model(const std::string& path);

}  // namespace ssan
