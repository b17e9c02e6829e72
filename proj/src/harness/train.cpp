#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "common/random.hpp"
#include "pireg/harness.hpp"

namespace pireg {

std::vector<int> TrainConfig::ladder() const {
  if (checkpoints.empty()) return {epochs};
  std::vector<int> l = checkpoints;
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());
  return l;
}

void TrainConfig::validate(Eigen::Index n_train) const {
  if (epochs < 1) fail(Errc::invalid_argument, "epochs must be >= 1");
  if (batch_size < 1) fail(Errc::invalid_argument, "batch size must be >= 1");
  if (n_train < 1) fail(Errc::invalid_argument, "training split is empty");
  if (batch_size > n_train)
    fail(Errc::invalid_argument, "batch size " + std::to_string(batch_size) + " exceeds " +
                                     std::to_string(n_train) + " training rows");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(Errc::invalid_argument, "learning rate must be > 0");
  for (int h : hidden)
    if (h < 1) fail(Errc::empty_architecture, "hidden widths must be >= 1");
  for (int c : checkpoints)
    if (c < 1 || c > epochs) fail(Errc::invalid_argument, "ladder entries must be in [1, epochs]");
  if (history_every < 0) fail(Errc::invalid_argument, "history cadence must be >= 0");
  reg.validate();
}

double relative_l2(const Matrix& predicted, const Matrix& target) {
  if (target.size() == 0) fail(Errc::empty_batch, "relative L2 over zero rows");
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    fail(Errc::dimension_mismatch, "prediction and target shapes differ");
  const double denom = target.norm();
  if (denom == 0.0) fail(Errc::zero_denominator, "relative L2 of an all-zero target");
  return (predicted - target).norm() / denom;
}

double relative_l2(const MlpParams& model, const Matrix& X, const Matrix& Y) {
  return relative_l2(predict(model, X), Y);
}

TrialResult train(const TrainConfig& config, const Dataset& ds) {
  ds.validate();
  const Matrix Xtr = ds.inputs(Split::train);
  const Matrix Ytr = ds.targets(Split::train);
  const Matrix Xev = ds.inputs(Split::eval);
  const Matrix Yev = ds.targets(Split::eval);
  const Matrix Xte = ds.inputs(Split::test);
  const Matrix Yte = ds.targets(Split::test);
  config.validate(Xtr.rows());
  if (Xev.rows() == 0) fail(Errc::invalid_argument, "evaluation split is empty");

  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(ds.X.cols()));
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<int>(ds.Y.cols()));

  TrialResult result;
  result.config = config;
  MlpParams params = init_params(sizes, config.activation, config.seed);
  if (config.reg.residual) {
    const auto& r = *config.reg.residual;
    if (config.reg.pi > 0.0 && (r.inputs() != params.inputs() || r.outputs() != params.outputs()))
      fail(Errc::dimension_mismatch, std::string(r.label()) + " residual does not fit the dataset columns");
  }

  detail::Rng shuffle_rng(detail::mix_seed(config.seed, detail::stream_shuffle));
  detail::Rng dropout_rng(detail::mix_seed(config.seed, detail::stream_dropout));
  AdamState adam = AdamState::fresh(params, config.adam);

  const Eigen::Index n = Xtr.rows();
  const Eigen::Index bs = config.batch_size;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::vector<int> ladder = config.ladder();
  const int last = ladder.back() > config.epochs ? ladder.back() : config.epochs;
  const int every = config.history_every > 0 ? config.history_every : std::max(1, last / 100);
  std::size_t next_ladder = 0;

  auto test_metric = [&](const MlpParams& p) {
    return Xte.rows() > 0 ? relative_l2(p, Xte, Yte) : std::numeric_limits<double>::quiet_NaN();
  };

  for (int epoch = 1; epoch <= last; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(shuffle_rng);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    bool finite = true;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index len = std::min(bs, n - start);
      std::vector<Eigen::Index> rows(order.begin() + start, order.begin() + start + len);
      const Matrix Xb = Xtr(rows, Eigen::all);
      const Matrix Yb = Ytr(rows, Eigen::all);

      Tape tape;
      const ParamNodes nodes = bind_params(tape, params);
      std::optional<DropoutMask> mask;
      if (config.reg.dropout_keep) mask = sample_mask(params, *config.reg.dropout_keep, dropout_rng());
      const LossTerms terms = total_loss(params, nodes, Xb, Yb, config.reg, mask ? &*mask : nullptr, tape);
      const double loss = tape.scalar(terms.total);
      if (!std::isfinite(loss)) {
        finite = false;
        break;
      }
      const MlpGradients grads = collect_gradients(tape.backward(terms.total), nodes);
      if (config.optimizer == OptimizerKind::adam)
        adam_step(adam, params, grads, config.learning_rate);
      else
        sgd_step(params, grads, config.learning_rate);
      loss_sum += loss * static_cast<double>(len);
    }
    if (!finite) {
      result.diverged = true;
      result.diverged_at_epoch = epoch;
      break;
    }

    const bool at_ladder = next_ladder < ladder.size() && ladder[next_ladder] == epoch;
    if (epoch == 1 || epoch % every == 0 || epoch == last || at_ladder) {
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = loss_sum / static_cast<double>(n);
      rec.eval_rel_l2 = relative_l2(params, Xev, Yev);
      rec.test_rel_l2 = test_metric(params);
      result.history.push_back(rec);
      if (at_ladder) {
        result.ladder.push_back({epoch, !std::isfinite(rec.eval_rel_l2), rec.eval_rel_l2, rec.test_rel_l2, params});
        ++next_ladder;
      }
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (; next_ladder < ladder.size(); ++next_ladder)
    result.ladder.push_back({ladder[next_ladder], true, nan, nan, params});
  result.checkpoint = params;
  if (result.diverged) {
    result.eval_rel_l2 = nan;
    result.test_rel_l2 = nan;
  } else {
    result.eval_rel_l2 = result.history.back().eval_rel_l2;
    result.test_rel_l2 = result.history.back().test_rel_l2;
  }
  return result;
}

}  // namespace pireg
