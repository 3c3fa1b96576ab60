#pragma once

#include "churn/classifiers.hpp"
#include "churn/features.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>

namespace churn {

enum class Family { naive_bayes, svm, mlp, random_forest, gradient_boosting };

inline constexpr Family kAllFamilies[] = {Family::naive_bayes, Family::svm, Family::mlp, Family::random_forest,
                                          Family::gradient_boosting};

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

/// SVM and MLP consume standardized features; the other families use raw ones.
bool needs_standardization(Family family);

using Hyperparameters = std::variant<NaiveBayesParams, SvmParams, MlpParams, ForestParams, BoostingParams>;

struct ClassifierSpec {
  Family family = Family::random_forest;
  Hyperparameters hyperparameters = ForestParams{};
  std::uint64_t seed = 0;

  /// Default hyperparameters for `family`.
  static ClassifierSpec defaults(Family family, std::uint64_t seed = 0);
  /// Throws ConfigError on a family/hyperparameter mismatch or out-of-range values.
  void validate() const;
  bool operator==(const ClassifierSpec&) const = default;
};

using FittedState = std::variant<GaussianNaiveBayes, LinearSvm, Mlp, RandomForest, GradientBoosting>;

/// A trained classifier: immutable, and prediction is reentrant.
class ClassifierModel {
 public:
  ClassifierModel(ClassifierSpec spec, FittedState state, Eigen::Index width);

  const ClassifierSpec& spec() const { return spec_; }
  const FittedState& state() const { return state_; }
  Eigen::Index width() const { return width_; }
  /// Present for random_forest only.
  std::optional<double> oob_error() const;

  /// Throws ShapeError when the row width differs from the training width.
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& rows) const;
  /// sign(decision_score), with 0 mapped to +1.
  Eigen::VectorXi predict(const Eigen::MatrixXd& rows) const;

 private:
  ClassifierSpec spec_;
  FittedState state_;
  Eigen::Index width_;
};

/// Requires >= 2 rows, both classes and finite entries.
ClassifierModel fit(const ClassifierSpec& spec, const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels);
ClassifierModel fit(const ClassifierSpec& spec, const FeatureMatrix& matrix);

inline Eigen::VectorXi predict(const ClassifierModel& model, const Eigen::MatrixXd& rows) {
  return model.predict(rows);
}
inline Eigen::VectorXd decision_score(const ClassifierModel& model, const Eigen::MatrixXd& rows) {
  return model.decision_score(rows);
}

/// Fraction of equal entries; 0 for empty input.
double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth);

/// Versioned text format, first line `churn-model 1`.
void save_model(std::ostream& out, const ClassifierModel& model);
ClassifierModel load_model(std::istream& in);

}  // namespace churn
