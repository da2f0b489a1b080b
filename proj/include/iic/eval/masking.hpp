#pragma once

#include <string>
#include <vector>

#include "iic/baselines/fcshap.hpp"
#include "iic/baselines/lcbm.hpp"
#include "iic/core/types.hpp"
#include "iic/eval/metrics.hpp"
#include "iic/nn/model.hpp"

namespace iic::eval {

/// Uniform prediction interface over the three classifier families, so the
/// flip metrics and accuracy reports run the same code path for each.
class WindowPredictor {
  public:
    virtual ~WindowPredictor() = default;
    virtual std::vector<double> probs(const core::MultimodalWindow& w) const = 0;
    int predict(const core::MultimodalWindow& w) const;
};

class NnPredictor : public WindowPredictor {
  public:
    explicit NnPredictor(const nn::Model& model) : model_(&model) {}
    std::vector<double> probs(const core::MultimodalWindow& w) const override;

  private:
    const nn::Model* model_;
};

class LcbmPredictor : public WindowPredictor {
  public:
    LcbmPredictor(const baselines::LcbmModel& model, const core::BaselineSet& baselines)
        : model_(&model), baselines_(baselines) {}
    std::vector<double> probs(const core::MultimodalWindow& w) const override;

  private:
    const baselines::LcbmModel* model_;
    core::BaselineSet baselines_;
};

class FcshapPredictor : public WindowPredictor {
  public:
    explicit FcshapPredictor(const baselines::FcshapModel& model) : model_(&model) {}
    std::vector<double> probs(const core::MultimodalWindow& w) const override;

  private:
    const baselines::FcshapModel* model_;
};

/// Suppresses a chosen subset of a method's inputs in that method's own
/// space and re-predicts: components are zero-weighted and reconstructed
/// for the window classifier, features are replaced by their train means
/// for the feature-space methods.
class Masker {
  public:
    virtual ~Masker() = default;
    virtual std::size_t dim() const = 0;
    virtual const std::vector<std::string>& names() const = 0;
    /// mask[i] = true suppresses input i. Returns the predicted class.
    virtual int predict_masked(const core::MultimodalWindow& w,
                               const std::vector<bool>& mask) const = 0;
};

class IicMasker : public Masker {
  public:
    IicMasker(const nn::Model& model, const core::BaselineSet& baselines,
              std::vector<std::string> component_names, decomp::DecompConfig cfg = {});
    std::size_t dim() const override { return names_.size(); }
    const std::vector<std::string>& names() const override { return names_; }
    int predict_masked(const core::MultimodalWindow& w,
                       const std::vector<bool>& mask) const override;

  private:
    const nn::Model* model_;
    core::BaselineSet baselines_;
    std::vector<std::string> names_;
    decomp::DecompConfig cfg_;
};

class LcbmMasker : public Masker {
  public:
    LcbmMasker(const baselines::LcbmModel& model, const core::BaselineSet& baselines)
        : model_(&model), baselines_(baselines) {}
    std::size_t dim() const override { return model_->concept_names.size(); }
    const std::vector<std::string>& names() const override { return model_->concept_names; }
    int predict_masked(const core::MultimodalWindow& w,
                       const std::vector<bool>& mask) const override;

  private:
    const baselines::LcbmModel* model_;
    core::BaselineSet baselines_;
};

class FcshapMasker : public Masker {
  public:
    explicit FcshapMasker(const baselines::FcshapModel& model) : model_(&model) {}
    std::size_t dim() const override { return model_->feature_names.size(); }
    const std::vector<std::string>& names() const override { return model_->feature_names; }
    int predict_masked(const core::MultimodalWindow& w,
                       const std::vector<bool>& mask) const override;

  private:
    const baselines::FcshapModel* model_;
};

/// Accuracy/F1 of a predictor over a labeled dataset.
ClassificationMetrics evaluate_classifier(const WindowPredictor& predictor,
                                          const core::Dataset& ds, int num_classes);

} // namespace iic::eval
