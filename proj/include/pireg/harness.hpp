#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pireg/data.hpp"
#include "pireg/optim.hpp"
#include "pireg/regularizers.hpp"

namespace pireg {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::vector<int> hidden = {32, 32, 32, 32};
  Activation activation = Activation::tanh;
  double learning_rate = 1e-3;
  int batch_size = 50;
  int epochs = 1000;
  // Epoch counts at which to snapshot the model (the epochs ladder). Each
  // entry must be in [1, epochs]; empty means {epochs}.
  std::vector<int> checkpoints;
  // Loss/metric history cadence in epochs; 0 picks max(1, epochs / 100).
  int history_every = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  AdamSettings adam;
  RegularizerSpec reg;
  std::uint64_t seed = 1;

  std::vector<int> ladder() const;
  void validate(Eigen::Index n_train) const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean minibatch total loss over the epoch
  double eval_rel_l2 = 0.0;
  double test_rel_l2 = 0.0;
};

struct LadderPoint {
  int epochs = 0;
  bool diverged = false;
  double eval_rel_l2 = 0.0;
  double test_rel_l2 = 0.0;
  MlpParams params;
};

struct TrialResult {
  TrainConfig config;
  bool diverged = false;
  int diverged_at_epoch = 0;
  double eval_rel_l2 = 0.0;
  double test_rel_l2 = 0.0;
  std::vector<EpochRecord> history;
  std::vector<LadderPoint> ladder;
  MlpParams checkpoint;
};

// |pred - y|_2 / |y|_2 jointly over rows and output columns.
double relative_l2(const Matrix& predicted, const Matrix& target);
double relative_l2(const MlpParams& model, const Matrix& X, const Matrix& Y);

// Mini-batch training on the dataset's train split. A non-finite loss stops
// the run and flags the result instead of throwing.
TrialResult train(const TrainConfig& config, const Dataset& ds);

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

enum class Method { none, l2, l1, dropout, pi };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchSpace {
  Range learning_rate{1e-6, 1e-4};
  Range l2{1e-6, 1e-2};
  Range l1{1e-6, 1e-2};
  Range keep{0.9, 0.999};
  Range pi{1e-3, 1e1};
  std::vector<Method> methods;  // which coefficients are tuned
  int n_trials = 100;
  std::vector<int> epochs_ladder;

  void validate() const;
};

struct SelectedModel {
  int epochs = 0;
  std::size_t trial = 0;
  double eval_rel_l2 = 0.0;
  double test_rel_l2 = 0.0;
  MlpParams params;
};

struct SearchResult {
  // In trial-index order. Snapshot parameters are dropped from trials; only
  // the selected models keep theirs.
  std::vector<TrialResult> trials;
  std::vector<SelectedModel> best;  // one per ladder entry
};

// Samples learning rate and coefficients log-uniformly (keep probability
// uniformly), trains every trial once up to the largest ladder entry, and
// selects the lowest eval relative L2 per ladder entry (ties go to the lower
// trial index).
SearchResult random_search(const SearchSpace& space, const TrainConfig& base, const Dataset& ds,
                           std::uint64_t seed, int workers = 1,
                           const std::function<void(std::size_t, const TrialResult&)>& on_trial = {});

// ---------------------------------------------------------------------------
// Derivative accuracy along a line
// ---------------------------------------------------------------------------

struct DerivativeSlice {
  enum class Axis { fixed_t, fixed_x };
  Axis axis = Axis::fixed_t;
  double at = 0.0;
};

struct FieldSample {
  double t = 0.0, x = 0.0;
  double u = 0.0, u_x = 0.0, u_xx = 0.0, u_t = 0.0;
};

class DerivativeReference {
 public:
  virtual ~DerivativeReference() = default;
  virtual std::vector<FieldSample> sample(const DerivativeSlice& slice) const = 0;
};

// Reference values from the spectral solution: u_x and u_xx by spectral
// differentiation of the snapshot, u_t from the equation itself. Slices snap
// to the nearest saved time or grid node.
class BurgersReference final : public DerivativeReference {
 public:
  explicit BurgersReference(BurgersGrid grid);
  std::vector<FieldSample> sample(const DerivativeSlice& slice) const override;
  const BurgersGrid& grid() const { return grid_; }

 private:
  BurgersGrid grid_;
  Matrix u_x_;
  Matrix u_xx_;
};

// Closed-form reference sampled at n equispaced points of [lo, hi] along the
// free coordinate.
class AnalyticReference final : public DerivativeReference {
 public:
  using Fn = std::function<FieldSample(double t, double x)>;
  AnalyticReference(Fn fn, Range t_domain, Range x_domain, int points);
  std::vector<FieldSample> sample(const DerivativeSlice& slice) const override;

 private:
  Fn fn_;
  Range t_domain_, x_domain_;
  int points_;
};

struct DerivativeReport {
  DerivativeSlice slice;
  std::vector<FieldSample> reference;
  std::vector<FieldSample> predicted;
  // Relative L2 along the slice; NaN where the reference is identically 0.
  double rel_u = 0.0, rel_u_x = 0.0, rel_u_xx = 0.0, rel_u_t = 0.0;
};

// Model inputs must be (t, x) with one output.
DerivativeReport derivative_report(const MlpParams& model, const DerivativeReference& reference,
                                   const DerivativeSlice& slice);
std::string derivative_report_csv(const DerivativeReport& report);

}  // namespace pireg
