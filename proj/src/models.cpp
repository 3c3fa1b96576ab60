#include "churn/models.hpp"

#include "text_io.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace churn {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::naive_bayes: return "naive_bayes";
    case Family::svm: return "svm";
    case Family::mlp: return "mlp";
    case Family::random_forest: return "random_forest";
    case Family::gradient_boosting: return "gradient_boosting";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  for (auto f : kAllFamilies)
    if (to_string(f) == text) return f;
  throw ConfigError("unknown classifier family '" + std::string(text) + "'");
}

bool needs_standardization(Family family) { return family == Family::svm || family == Family::mlp; }

ClassifierSpec ClassifierSpec::defaults(Family family, std::uint64_t seed) {
  ClassifierSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case Family::naive_bayes: spec.hyperparameters = NaiveBayesParams{}; break;
    case Family::svm: spec.hyperparameters = SvmParams{}; break;
    case Family::mlp: spec.hyperparameters = MlpParams{}; break;
    case Family::random_forest: spec.hyperparameters = ForestParams{}; break;
    case Family::gradient_boosting: spec.hyperparameters = BoostingParams{}; break;
  }
  return spec;
}

void ClassifierSpec::validate() const {
  if (static_cast<std::size_t>(family) != hyperparameters.index())
    throw ConfigError("hyperparameters do not belong to family " + std::string(to_string(family)));
  const auto fail = [&](const char* what) { throw ConfigError(std::string(to_string(family)) + ": " + what); };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          if (!(p.variance_floor > 0.0)) fail("variance_floor must be positive");
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          if (!(p.l2 > 0.0)) fail("l2 must be positive");
          if (p.iterations < 1) fail("iterations must be at least 1");
          if (!(p.step > 0.0)) fail("step must be positive");
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          if (p.hidden < 1) fail("hidden size must be at least 1");
          if (p.epochs < 1) fail("epochs must be at least 1");
          if (!(p.step > 0.0)) fail("step must be positive");
          if (p.batch_size < 1) fail("batch_size must be at least 1");
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          if (p.trees < 1) fail("trees must be at least 1");
          if (p.features_per_split < 0) fail("features_per_split must be non-negative");
          if (p.max_depth < 0) fail("max_depth must be non-negative");
          if (p.min_leaf < 1) fail("min_leaf must be at least 1");
        } else {
          if (p.rounds < 1) fail("rounds must be at least 1");
          if (p.max_depth < 1) fail("max_depth must be at least 1");
          if (!(p.learning_rate > 0.0)) fail("learning_rate must be positive");
          if (!(p.l2 >= 0.0)) fail("l2 must be non-negative");
        }
      },
      hyperparameters);
}

ClassifierModel::ClassifierModel(ClassifierSpec spec, FittedState state, Eigen::Index width)
    : spec_(std::move(spec)), state_(std::move(state)), width_(width) {}

std::optional<double> ClassifierModel::oob_error() const {
  if (const auto* rf = std::get_if<RandomForest>(&state_)) return rf->oob_error();
  return std::nullopt;
}

Eigen::VectorXd ClassifierModel::decision_score(const Eigen::MatrixXd& rows) const {
  if (rows.rows() == 0) return Eigen::VectorXd(0);
  if (rows.cols() != width_)
    throw ShapeError("model expects " + std::to_string(width_) + " features, got " + std::to_string(rows.cols()));
  return std::visit([&](const auto& m) -> Eigen::VectorXd { return m.decision_score(rows); }, state_);
}

Eigen::VectorXi ClassifierModel::predict(const Eigen::MatrixXd& rows) const {
  const Eigen::VectorXd score = decision_score(rows);
  return (score.array() >= 0.0).select(Eigen::VectorXi::Ones(score.size()), -Eigen::VectorXi::Ones(score.size()));
}

ClassifierModel fit(const ClassifierSpec& spec, const Eigen::MatrixXd& rows, const Eigen::VectorXi& labels) {
  spec.validate();
  if (labels.size() != rows.rows())
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(rows.rows()) + " rows");
  if (rows.rows() < 2) throw DegenerateTrainingError("training needs at least 2 rows");
  if (rows.cols() < 1) throw DegenerateTrainingError("training needs at least 1 feature");
  if (!rows.allFinite()) throw DomainError("training features must be finite");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) pos = true;
    else if (labels[i] == -1) neg = true;
    else throw DomainError("labels must be +1 or -1");
  }
  if (!(pos && neg)) throw DegenerateTrainingError("training data contains a single class");

  FittedState state = std::visit(
      [&](const auto& p) -> FittedState {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) return GaussianNaiveBayes::fit(rows, labels, p);
        else if constexpr (std::is_same_v<P, SvmParams>) return LinearSvm::fit(rows, labels, p);
        else if constexpr (std::is_same_v<P, MlpParams>) return Mlp::fit(rows, labels, p, spec.seed);
        else if constexpr (std::is_same_v<P, ForestParams>) return RandomForest::fit(rows, labels, p, spec.seed);
        else return GradientBoosting::fit(rows, labels, p);
      },
      spec.hyperparameters);
  return ClassifierModel(spec, std::move(state), rows.cols());
}

ClassifierModel fit(const ClassifierSpec& spec, const FeatureMatrix& matrix) {
  return fit(spec, matrix.rows, matrix.labels);
}

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth) {
  if (predicted.size() != truth.size()) throw ShapeError("prediction and truth lengths differ");
  if (truth.size() == 0) return 0.0;
  return static_cast<double>((predicted.array() == truth.array()).count()) / static_cast<double>(truth.size());
}

namespace {

using ParamMap = std::map<std::string, std::string>;

ParamMap to_map(const Hyperparameters& h) {
  ParamMap m;
  const auto d = [](double v) { return io::format_double(v); };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          m["variance_floor"] = d(p.variance_floor);
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          m["l2"] = d(p.l2);
          m["iterations"] = std::to_string(p.iterations);
          m["step"] = d(p.step);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          m["hidden"] = std::to_string(p.hidden);
          m["epochs"] = std::to_string(p.epochs);
          m["step"] = d(p.step);
          m["batch_size"] = std::to_string(p.batch_size);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          m["trees"] = std::to_string(p.trees);
          m["features_per_split"] = std::to_string(p.features_per_split);
          m["max_depth"] = std::to_string(p.max_depth);
          m["min_leaf"] = std::to_string(p.min_leaf);
        } else {
          m["rounds"] = std::to_string(p.rounds);
          m["max_depth"] = std::to_string(p.max_depth);
          m["learning_rate"] = d(p.learning_rate);
          m["l2"] = d(p.l2);
        }
      },
      h);
  return m;
}

Hyperparameters from_map(Family family, const ParamMap& m) {
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = m.find(key);
    if (it == m.end()) throw ParseError(0, std::string("model: missing hyperparameter ") + key);
    return it->second;
  };
  const auto num = [&](const char* key) { return std::stod(get(key)); };
  const auto integer = [&](const char* key) { return std::stoi(get(key)); };
  switch (family) {
    case Family::naive_bayes: return NaiveBayesParams{num("variance_floor")};
    case Family::svm: return SvmParams{num("l2"), integer("iterations"), num("step")};
    case Family::mlp: return MlpParams{integer("hidden"), integer("epochs"), num("step"), integer("batch_size")};
    case Family::random_forest:
      return ForestParams{integer("trees"), integer("features_per_split"), integer("max_depth"), integer("min_leaf")};
    case Family::gradient_boosting:
      return BoostingParams{integer("rounds"), integer("max_depth"), num("learning_rate"), num("l2")};
  }
  throw ParseError(0, "model: unknown family");
}

}  // namespace

void save_model(std::ostream& out, const ClassifierModel& model) {
  const auto& spec = model.spec();
  out << "churn-model 1\n";
  out << "family " << to_string(spec.family) << '\n';
  out << "seed " << spec.seed << '\n';
  out << "width " << model.width() << '\n';
  out << "hyperparameters";
  for (const auto& [k, v] : to_map(spec.hyperparameters)) out << ' ' << k << ' ' << v;
  out << "\nstate\n";
  std::visit([&](const auto& m) { m.save(out); }, model.state());
  out << "end\n";
}

ClassifierModel load_model(std::istream& in) {
  io::expect(in, "churn-model");
  if (io::read<int>(in, "format version") != 1) throw ParseError(0, "model: unsupported format version");
  io::expect(in, "family");
  ClassifierSpec spec;
  try {
    spec.family = parse_family(io::read<std::string>(in, "family"));
  } catch (const ConfigError& e) {
    throw ParseError(0, std::string("model: ") + e.what());
  }
  io::expect(in, "seed");
  spec.seed = io::read<std::uint64_t>(in, "seed");
  io::expect(in, "width");
  const auto width = io::read<Eigen::Index>(in, "width");
  io::expect(in, "hyperparameters");
  ParamMap params;
  for (std::string key = io::read<std::string>(in, "hyperparameter"); key != "state";
       key = io::read<std::string>(in, "hyperparameter"))
    params[key] = io::read<std::string>(in, key);
  spec.hyperparameters = from_map(spec.family, params);

  FittedState state = [&]() -> FittedState {
    switch (spec.family) {
      case Family::naive_bayes: return GaussianNaiveBayes::load(in);
      case Family::svm: return LinearSvm::load(in);
      case Family::mlp: return Mlp::load(in);
      case Family::random_forest: return RandomForest::load(in);
      case Family::gradient_boosting: return GradientBoosting::load(in);
    }
    throw ParseError(0, "model: unknown family");
  }();
  io::expect(in, "end");
  return ClassifierModel(spec, std::move(state), width);
}

}  // namespace churn
