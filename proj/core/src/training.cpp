#include "ssan/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssan/errors.hpp"
#include "ssan/eval.hpp"

namespace ssan {

void validate(const TrainConfig& cfg) {
  validate(cfg.weights);
  if (cfg.d_common == 0 || cfg.hidden == 0)
    throw ParameterError("train config: layer widths must be >= 1");
  if (!(cfg.lr > 0.0)) throw ParameterError("train config: lr must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw ParameterError("train config: moment decays must lie in [0,1)");
  if (!(cfg.eps > 0.0)) throw ParameterError("train config: eps must be > 0");
  if (!(cfg.student_temperature > 0.0))
    throw ParameterError("train config: student temperature must be > 0");
}

void adam_step(ParamMap& params, const GradientMap& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end())
      throw ParameterError("adam_step: unknown parameter '" + name + "'");
    Matrix& p = it->second;
    require_same_shape(p, g, "adam_step");
    Matrix& m = state.m.try_emplace(name, Matrix(p.rows(), p.cols())).first->second;
    Matrix& v = state.v.try_emplace(name, Matrix(p.rows(), p.cols())).first->second;
    auto pd = p.data();
    auto gd = g.data();
    auto md = m.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = beta1 * md[i] + (1.0 - beta1) * gd[i];
      vd[i] = beta2 * vd[i] + (1.0 - beta2) * gd[i] * gd[i];
      pd[i] -= lr * (md[i] / bc1) / (std::sqrt(vd[i] / bc2) + eps);
    }
  }
}

GradientMap filter_gradients(const GradientMap& grads,
                             const std::vector<std::string>& keep) {
  GradientMap out;
  for (const auto& name : keep) {
    auto it = grads.find(name);
    if (it != grads.end()) out.emplace(it->first, it->second);
  }
  return out;
}

EpochState run_epoch(SsanModel& model, const HdaView& data,
                     const TrainConfig& cfg, std::size_t epoch,
                     AdamState& main_opt, AdamState& disc_opt) {
  const double alpha = cfg.no_soft ? 0.0 : cfg.weights.alpha;
  const double beta = cfg.no_esa ? 0.0 : cfg.weights.beta;
  const double gamma = cfg.no_adv ? 0.0 : cfg.weights.gamma;
  const double bank_temp = cfg.no_temperature ? 1.0 : cfg.weights.temperature;

  EpochState state;

  // --- per-epoch refresh, all detached from the upcoming tape ---
  Matrix z_s_plain = encode_source(model, data.x_s);
  Matrix z_l_plain = encode_target(model, data.x_l);
  Matrix z_u_plain = encode_target(model, data.x_u);
  state.bank = compute_soft_labels(classify(model, z_s_plain), data.y_s, data.K,
                                   bank_temp, epoch);
  state.gs_centroids =
      supervised_centroids(z_s_plain, data.y_s, z_l_plain, data.y_l, data.K);
  Matrix logits_u_plain = classify(model, z_u_plain);
  state.assignment = cfg.no_gs
                         ? nn_only_assignment(logits_u_plain)
                         : refine_pseudo_labels(logits_u_plain, z_u_plain,
                                                state.gs_centroids);
  state.selected_count = state.assignment.selected_count();

  // --- one tape for both players; gradients taken at the same point ---
  Tape t;
  TapeModel tm = put_on_tape(t, model);
  auto x_s = t.constant(data.x_s);
  auto x_l = t.constant(data.x_l);
  auto z_s = encode_source(t, tm, x_s);
  auto z_l = encode_target(t, tm, x_l);
  auto z_u = data.x_u.rows() > 0 ? encode_target(t, tm, t.constant(data.x_u))
                                 : Tape::kNoNode;

  auto l_s = supervised_loss(t, classify(t, tm, z_s), data.y_s);
  auto l_isc = isc_loss(t, classify(t, tm, z_l), data.y_l, state.bank, alpha,
                        cfg.student_temperature);

  auto l_esa = Tape::kNoNode;
  if (beta > 0.0) {
    auto z_t = z_l;
    std::vector<int> y_t = data.y_l;
    const auto sel = state.assignment.selected_indices();
    if (z_u != Tape::kNoNode && !sel.empty()) {
      z_t = t.concat_rows(z_l, t.select_rows(z_u, sel));
      for (std::size_t i : sel) y_t.push_back(state.assignment.assigned[i]);
    }
    l_esa = esa_loss(t, triplet_centroid_nodes(t, z_s, data.y_s, z_t, y_t, data.K));
  }

  auto l_d = Tape::kNoNode;
  if (gamma > 0.0) {
    auto z_tgt = z_u != Tape::kNoNode ? t.concat_rows(z_l, z_u) : z_l;
    l_d = domain_loss(t, discriminate(t, tm, z_s), discriminate(t, tm, z_tgt));
  }

  LossWeights w = cfg.weights;
  w.alpha = alpha;
  w.beta = beta;
  w.gamma = gamma;
  auto obj_main =
      total_objective(t, l_s, l_isc, l_esa, l_d, w, Role::EncoderClassifier);

  if (l_d != Tape::kNoNode) {
    auto obj_disc = total_objective(t, Tape::kNoNode, Tape::kNoNode,
                                    Tape::kNoNode, l_d, w, Role::Discriminator);
    GradientMap disc_grads =
        filter_gradients(t.backward(obj_disc), discriminator_param_names());
    adam_step(model.params, disc_grads, disc_opt, cfg.lr, cfg.beta1, cfg.beta2,
              cfg.eps);
  }
  GradientMap main_grads =
      filter_gradients(t.backward(obj_main), encoder_classifier_param_names());
  adam_step(model.params, main_grads, main_opt, cfg.lr, cfg.beta1, cfg.beta2,
            cfg.eps);

  state.l_s = t.scalar(l_s);
  state.l_isc = t.scalar(l_isc);
  state.l_esa = l_esa != Tape::kNoNode ? t.scalar(l_esa) : 0.0;
  state.l_d = l_d != Tape::kNoNode ? t.scalar(l_d) : 0.0;
  return state;
}

namespace {

void fill_truth_diagnostics(EpochState& state, const std::vector<int>& truth) {
  if (truth.empty() || state.assignment.size() != truth.size()) return;
  state.nn_accuracy = accuracy(state.assignment.y_nn, truth);
  std::size_t sel = 0, sel_ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!state.assignment.selected[i]) continue;
    ++sel;
    sel_ok += state.assignment.assigned[i] == truth[i] ? 1 : 0;
  }
  if (sel > 0)
    state.selected_accuracy = static_cast<double>(sel_ok) / static_cast<double>(sel);
}

void finish(TrainResult& result, const HdaDataset& ds) {
  if (ds.x_u.rows() == 0) return;
  result.predictions =
      predict_labels(classify(result.model, encode_target(result.model, ds.x_u)));
  if (ds.has_truth())
    result.final_accuracy = accuracy(result.predictions, ds.y_u_truth);
}

ModelShapes shapes_for(const HdaDataset& ds, const TrainConfig& cfg) {
  if (ds.x_u.rows() > 0 && ds.x_u.cols() != ds.x_l.cols())
    throw DimensionError("train: labeled target " + ds.x_l.shape_str() +
                         " vs unlabeled target " + ds.x_u.shape_str());
  return {ds.x_s.cols(), ds.x_l.cols(), cfg.hidden, cfg.d_common, ds.K};
}

}  // namespace

TrainResult train(const HdaDataset& ds, const TrainConfig& cfg) {
  validate(cfg);
  validate_dataset(ds);

  TrainResult result;
  result.model = init_model(shapes_for(ds, cfg), {cfg.seed});
  AdamState main_opt, disc_opt;
  const HdaView view = ds.view();
  result.history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochState state =
        run_epoch(result.model, view, cfg, epoch, main_opt, disc_opt);
    if (ds.has_truth()) fill_truth_diagnostics(state, ds.y_u_truth);
    result.history.push_back(std::move(state));
  }
  finish(result, ds);
  return result;
}

TrainResult train_baseline(const HdaDataset& ds, const TrainConfig& cfg) {
  validate(cfg);
  validate_dataset(ds);
  static const std::vector<std::string> kBaselineParams{
      "et.w1", "et.b1", "et.w2", "et.b2", "cls.w", "cls.b"};

  TrainResult result;
  result.model = init_model(shapes_for(ds, cfg), {cfg.seed});
  AdamState opt;
  result.history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape t;
    TapeModel tm = put_on_tape(t, result.model);
    auto z_l = encode_target(t, tm, t.constant(ds.x_l));
    auto l_s = supervised_loss(t, classify(t, tm, z_l), ds.y_l);
    GradientMap grads = filter_gradients(t.backward(l_s), kBaselineParams);
    adam_step(result.model.params, grads, opt, cfg.lr, cfg.beta1, cfg.beta2,
              cfg.eps);
    EpochState state;
    state.l_s = t.scalar(l_s);
    result.history.push_back(std::move(state));
  }
  finish(result, ds);
  return result;
}

}  // namespace ssan
