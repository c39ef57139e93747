#include "losses/losses.hpp"

namespace ds::losses {

void LossConfig::validate() const {
  if (!(bce_clamp_eps > 0.0 && bce_clamp_eps < 0.5)) fail(ErrCode::InvalidArg, "bce_clamp_eps must lie in (0, 0.5)");
  if (!(dice_smooth > 0.0)) fail(ErrCode::InvalidArg, "dice_smooth must be positive");
  if (!(gamma >= 0.0)) fail(ErrCode::InvalidArg, "gamma must be nonnegative");
  if (!(pred_threshold > 0.0 && pred_threshold < 1.0)) fail(ErrCode::InvalidArg, "pred_threshold must lie in (0,1)");
}

void require_binary(const Tensor& target, const char* what) {
  for (double v : target.data)
    if (v != 0.0 && v != 1.0) fail(ErrCode::InvalidArg, std::string(what) + " must be binary (entries 0 or 1)");
}

int seg_loss_node(ad::Graph& g, int pred, const Tensor& target, const LossConfig& cfg) {
  cfg.validate();
  if (g.shape_of(pred) != target.shape)
    fail(ErrCode::Shape, "seg_loss: prediction shape " + shape_str(g.shape_of(pred)) + " vs target " +
                             shape_str(target.shape));
  require_binary(target, "seg_loss target");

  const double eps = cfg.bce_clamp_eps;
  const double s = cfg.dice_smooth;
  double target_sum = 0.0;
  for (double v : target.data) target_sum += v;

  int y = g.constant(target);
  Tensor ones = Tensor::full(target.shape, 1.0);
  Tensor inv(target.shape);
  for (size_t i = 0; i < inv.data.size(); ++i) inv.data[i] = 1.0 - target.data[i];
  int one_minus_y = g.constant(std::move(inv));

  int p = g.clamp(pred, eps, 1.0 - eps);
  int one_minus_p = g.sub(g.constant(ones), p);
  int ll = g.add(g.mul(y, g.log(p)), g.mul(one_minus_y, g.log(one_minus_p)));
  int bce = g.scalar_mul(g.mean(ll), -1.0);

  int num = g.add(g.scalar_mul(g.sum(g.mul(p, y)), 2.0), g.constant(Tensor::scalar(s)));
  int den = g.add(g.sum(p), g.constant(Tensor::scalar(target_sum + s)));
  int dice = g.sub(g.constant(Tensor::scalar(1.0)), g.div(num, den));

  return g.scalar_mul(g.add(bce, dice), 0.5);
}

double seg_loss(const Tensor& pred, const Tensor& target, const LossConfig& cfg) {
  ad::Graph g;
  int p = g.input("pred", pred.shape);
  int node = seg_loss_node(g, p, target, cfg);
  return ad::forward_eval(g, {{"pred", pred}}, node).data[0];
}

int lower_loss_node(ad::Graph& g, const std::vector<std::vector<SampleTerm>>& sources, int eta) {
  if (sources.empty()) fail(ErrCode::InvalidArg, "lower_loss: no data sources");
  std::vector<int> batch_means;
  batch_means.reserve(sources.size());
  for (const auto& batch : sources) {
    if (batch.empty()) fail(ErrCode::InvalidArg, "lower_loss: empty batch");
    int acc = -1;
    for (const auto& term : batch) {
      int weighted = term.alpha_node >= 0 ? g.mul(term.alpha_node, term.loss)
                                          : g.scalar_mul(term.loss, term.alpha_value);
      acc = acc < 0 ? weighted : g.add(acc, weighted);
    }
    batch_means.push_back(g.scalar_mul(acc, 1.0 / static_cast<double>(batch.size())));
  }
  int stacked = batch_means.size() == 1 ? batch_means[0] : g.concat(batch_means);
  if (eta < 0) return g.sum(stacked);
  if (g.shape_of(eta) != Shape{static_cast<int>(sources.size())})
    fail(ErrCode::Shape, "lower_loss: eta shape " + shape_str(g.shape_of(eta)) + " vs J = " +
                             std::to_string(sources.size()));
  return g.sum(g.mul(eta, stacked));
}

int upper_loss_node(ad::Graph& g, const std::vector<int>& val_losses, const std::vector<int>& l1_terms,
                    double gamma) {
  if (val_losses.empty()) fail(ErrCode::InvalidArg, "upper_loss: empty validation set");
  int acc = -1;
  for (int node : val_losses) acc = acc < 0 ? node : g.add(acc, node);
  int val_mean = g.scalar_mul(acc, 1.0 / static_cast<double>(val_losses.size()));
  if (l1_terms.empty() || gamma == 0.0) return val_mean;
  int lacc = -1;
  for (int node : l1_terms) lacc = lacc < 0 ? node : g.add(lacc, node);
  int l1_mean = g.scalar_mul(lacc, gamma / static_cast<double>(l1_terms.size()));
  return g.add(val_mean, l1_mean);
}

int location_l1_node(ad::Graph& g, int zmap) {
  const Shape& s = g.shape_of(zmap);
  return g.scalar_mul(g.l1norm(zmap), 1.0 / static_cast<double>(numel(s)));
}

IouCounts iou_counts(const Tensor& pred, const Tensor& target, double threshold) {
  if (!same_shape(pred, target))
    fail(ErrCode::Shape, "iou: shape mismatch " + shape_str(pred.shape) + " vs " + shape_str(target.shape));
  IouCounts c;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    bool p = pred.data[i] > threshold;
    bool t = target.data[i] == 1.0;
    c.intersection += (p && t) ? 1 : 0;
    c.union_ += (p || t) ? 1 : 0;
  }
  return c;
}

double iou(const Tensor& pred, const Tensor& target, double threshold) {
  IouCounts c = iou_counts(pred, target, threshold);
  if (c.union_ == 0) return 1.0; // correctly predicted defect-free
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

} // namespace ds::losses
