#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/extract.hpp"
#include "ntl/learn.hpp"
#include "ntl/parallel.hpp"
#include "ntl/select.hpp"

namespace ntl {

// ---------------------------------------------------------------------------
// Stratified k-fold
// ---------------------------------------------------------------------------

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// Stratified folds: each class's indices are shuffled once and dealt
// round-robin with a cursor that continues across classes, so per-fold class
// counts differ by at most one and so do total fold sizes. Deterministic per
// seed.
inline std::vector<FoldSplit> kfold_split(std::size_t n, int k, const std::vector<int>& labels,
                                          std::uint64_t seed) {
    if (labels.size() != n) throw Error(ErrorCode::schema_mismatch, "labels length mismatch");
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw Error(ErrorCode::too_few_samples,
                    "need 2 <= k <= n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? class1 : class0).push_back(i);
    if (class0.empty() || class1.empty())
        throw Error(ErrorCode::single_class_target, "stratified folds need both classes");

    Rng rng(derive_seed(seed, "kfold"));
    rng.shuffle(class0);
    rng.shuffle(class1);

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    std::size_t cursor = 0;
    for (const auto* cls : {&class0, &class1})
        for (const std::size_t index : *cls) members[cursor++ % k].push_back(index);

    std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& fold = folds[static_cast<std::size_t>(f)];
        fold.validation = members[static_cast<std::size_t>(f)];
        std::sort(fold.validation.begin(), fold.validation.end());
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            fold.train.insert(fold.train.end(), members[static_cast<std::size_t>(g)].begin(),
                              members[static_cast<std::size_t>(g)].end());
        }
        std::sort(fold.train.begin(), fold.train.end());
    }
    return folds;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CvResult {
    ModelKind kind = ModelKind::decision_tree;
    HyperparameterSet hyperparameters;
    std::vector<double> fold_aucs;
    double mean = 0.0;
    double stddev = 0.0;
};

namespace detail {

inline void finalize_cv(CvResult& result) {
    const double n = static_cast<double>(result.fold_aucs.size());
    result.mean = std::accumulate(result.fold_aucs.begin(), result.fold_aucs.end(), 0.0) / n;
    double var = 0.0;
    for (const double a : result.fold_aucs) var += (a - result.mean) * (a - result.mean);
    result.stddev = std::sqrt(var / n);
}

// One fold: standardize on the training rows only, fit, score the held-out
// rows with the paper's balanced AUC at the model's operating threshold.
inline double run_fold(ModelKind kind, const HyperparameterSet& hp, const DataMatrix& x,
                       const std::vector<int>& y, const FoldSplit& fold,
                       const std::vector<std::size_t>* columns, std::uint64_t fit_seed) {
    DataMatrix x_train = x.select_rows(fold.train);
    DataMatrix x_val = x.select_rows(fold.validation);
    if (columns) {
        x_train = x_train.select_cols(*columns);
        x_val = x_val.select_cols(*columns);
    }
    std::vector<int> y_train, y_val;
    y_train.reserve(fold.train.size());
    y_val.reserve(fold.validation.size());
    for (const auto i : fold.train) y_train.push_back(y[i]);
    for (const auto i : fold.validation) y_val.push_back(y[i]);

    const auto standardizer = fit_standardizer(x_train);
    const auto model =
        train_model(kind, apply_standardizer(standardizer, x_train), y_train, hp, fit_seed);
    const auto scores = score_rows(*model, apply_standardizer(standardizer, x_val));
    return balanced_auc(confusion_at_threshold(scores, y_val, model->default_threshold()));
}

}  // namespace detail

inline CvResult cross_val_score(ModelKind kind, const HyperparameterSet& hp, const DataMatrix& x,
                                const std::vector<int>& y, int k, std::uint64_t seed,
                                int workers = 1) {
    const auto folds = kfold_split(x.rows, k, y, derive_seed(seed, "folds"));
    CvResult result;
    result.kind = kind;
    result.hyperparameters = hp;
    result.fold_aucs.assign(folds.size(), 0.0);

    std::exception_ptr failure;
    std::mutex failure_mutex;
    detail::run_partitioned(folds.size(), workers, [&](std::size_t f) {
        try {
            result.fold_aucs[f] =
                detail::run_fold(kind, hp, x, y, folds[f], nullptr, derive_seed(seed, "fit", f));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    detail::finalize_cv(result);
    return result;
}

// ---------------------------------------------------------------------------
// Randomized hyperparameter search
// ---------------------------------------------------------------------------

struct ParamSpec {
    enum class Kind { uniform_int, uniform_real, log_uniform_real, choice };
    std::string name;
    Kind kind = Kind::uniform_int;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> choices;
};

struct SearchSpace {
    std::vector<ParamSpec> params;
};

inline HyperparameterSet sample_hyperparameters(const SearchSpace& space, Rng& rng) {
    HyperparameterSet hp;
    for (const auto& spec : space.params) {
        double value = 0.0;
        switch (spec.kind) {
            case ParamSpec::Kind::uniform_int:
                value = static_cast<double>(
                    rng.uniform_int(static_cast<std::int64_t>(spec.lo),
                                    static_cast<std::int64_t>(spec.hi)));
                break;
            case ParamSpec::Kind::uniform_real: value = rng.uniform_real(spec.lo, spec.hi); break;
            case ParamSpec::Kind::log_uniform_real:
                value = rng.log_uniform_real(spec.lo, spec.hi);
                break;
            case ParamSpec::Kind::choice:
                value = spec.choices[rng.below(spec.choices.size())];
                break;
        }
        hp.set(spec.name, value);
    }
    return hp;
}

inline SearchSpace default_search_space(ModelKind kind) {
    using K = ParamSpec::Kind;
    SearchSpace space;
    const auto tree_params = [&] {
        space.params.push_back({"max_depth", K::uniform_int, 2, 20, {}});
        space.params.push_back({"min_samples_split", K::uniform_int, 2, 50, {}});
        space.params.push_back({"min_samples_leaf", K::uniform_int, 1, 10, {}});
        space.params.push_back({"max_features_fraction", K::uniform_real, 0.3, 1.0, {}});
    };
    switch (kind) {
        case ModelKind::decision_tree: tree_params(); break;
        case ModelKind::random_forest:
            space.params.push_back({"n_estimators", K::uniform_int, 10, 200, {}});
            tree_params();
            space.params.push_back({"bootstrap", K::choice, 0, 0, {0.0, 1.0}});
            break;
        case ModelKind::gradient_boosted_tree:
            space.params.push_back({"n_estimators", K::uniform_int, 10, 200, {}});
            space.params.push_back({"learning_rate", K::uniform_real, 0.01, 0.3, {}});
            space.params.push_back({"max_depth", K::uniform_int, 2, 6, {}});
            break;
        case ModelKind::linear_svm:
            space.params.push_back({"lambda", K::log_uniform_real, 1e-4, 1.0, {}});
            space.params.push_back({"epochs", K::uniform_int, 10, 200, {}});
            break;
    }
    return space;
}

struct SearchOutcome {
    std::size_t best_index = 0;
    std::vector<CvResult> results;

    const CvResult& best() const { return results[best_index]; }
};

namespace detail {

// Shared engine: evaluates n_iter sampled configurations over the given
// folds. fold_columns, when present, restricts fold f's training and scoring
// to those columns (per-fold feature selection).
inline SearchOutcome search_with_folds(
    ModelKind kind, const SearchSpace& space, const DataMatrix& x, const std::vector<int>& y,
    int n_iter, const std::vector<FoldSplit>& folds, std::uint64_t seed, int workers,
    const std::vector<std::vector<std::size_t>>* fold_columns) {
    if (n_iter < 1) throw Error(ErrorCode::invalid_config, "n_iter must be >= 1");
    if (fold_columns && fold_columns->size() != folds.size())
        throw Error(ErrorCode::schema_mismatch, "fold column masks do not match fold count");

    SearchOutcome outcome;
    outcome.results.resize(static_cast<std::size_t>(n_iter));
    for (int c = 0; c < n_iter; ++c) {
        auto& result = outcome.results[static_cast<std::size_t>(c)];
        result.kind = kind;
        Rng rng(derive_seed(seed, "config", static_cast<std::uint64_t>(c)));
        result.hyperparameters = sample_hyperparameters(space, rng);
        result.fold_aucs.assign(folds.size(), 0.0);
    }

    const std::size_t n_jobs = static_cast<std::size_t>(n_iter) * folds.size();
    std::exception_ptr failure;
    std::mutex failure_mutex;
    detail::run_partitioned(n_jobs, workers, [&](std::size_t job) {
        const std::size_t c = job / folds.size();
        const std::size_t f = job % folds.size();
        try {
            const std::vector<std::size_t>* columns =
                fold_columns ? &(*fold_columns)[f] : nullptr;
            outcome.results[c].fold_aucs[f] =
                detail::run_fold(kind, outcome.results[c].hyperparameters, x, y, folds[f],
                                 columns, derive_seed(seed, "fit", c, f));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    for (auto& result : outcome.results) detail::finalize_cv(result);
    for (std::size_t c = 1; c < outcome.results.size(); ++c)
        if (outcome.results[c].mean > outcome.results[outcome.best_index].mean)
            outcome.best_index = c;
    return outcome;
}

}  // namespace detail

// Samples n_iter configurations from the space and evaluates each with the
// same stratified folds; the winner has the highest mean balanced AUC, ties
// going to the earlier sample. (config, fold) jobs run in parallel; every
// job's seed is derived from its key, so worker count never changes results.
inline SearchOutcome randomized_search(ModelKind kind, const SearchSpace& space,
                                       const DataMatrix& x, const std::vector<int>& y, int n_iter,
                                       int k, std::uint64_t seed, int workers = 1) {
    const auto folds = kfold_split(x.rows, k, y, derive_seed(seed, "folds"));
    return detail::search_with_folds(kind, space, x, y, n_iter, folds, seed, workers, nullptr);
}

// ---------------------------------------------------------------------------
// Feature-set combinations and slicing
// ---------------------------------------------------------------------------

struct FamilySet {
    bool gts = false;
    bool avg = false;
    bool dif = false;

    bool contains(FeatureFamily f) const {
        switch (f) {
            case FeatureFamily::GTS: return gts;
            case FeatureFamily::AVG: return avg;
            case FeatureFamily::DIF: return dif;
        }
        return false;
    }

    std::string label() const {
        std::string out;
        for (const auto& [flag, tag] :
             {std::pair{gts, "gts"}, std::pair{avg, "avg"}, std::pair{dif, "dif"}}) {
            if (!flag) continue;
            if (!out.empty()) out += '+';
            out += tag;
        }
        return out;
    }

    bool operator==(const FamilySet&) const = default;
};

// The seven non-empty family subsets, singletons first, then pairs, then all.
inline std::array<FamilySet, 7> all_family_subsets() {
    return {FamilySet{true, false, false}, FamilySet{false, true, false},
            FamilySet{false, false, true}, FamilySet{true, true, false},
            FamilySet{true, false, true},  FamilySet{false, true, true},
            FamilySet{true, true, true}};
}

enum class Variant { all, retained };

inline const char* variant_name(Variant v) { return v == Variant::all ? "all" : "retained"; }

struct FeatureSetCombination {
    FamilySet families;
    Variant variant = Variant::all;

    std::string label() const {
        return families.label() + ":" + variant_name(variant);
    }
};

inline FeatureMatrix slice_families(const FeatureMatrix& matrix, const FamilySet& families) {
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < matrix.columns.size(); ++c)
        if (families.contains(matrix.columns[c].family)) kept.push_back(c);
    if (kept.empty())
        throw Error(ErrorCode::empty_slice, "no column matches families " + families.label());
    FeatureMatrix out;
    out.customer_ids = matrix.customer_ids;
    for (const auto c : kept) out.columns.push_back(matrix.columns[c]);
    out.data = matrix.data.select_cols(kept);
    return out;
}

// Columns of the requested families in original order; the retained variant
// reruns feature selection on the slice (selection per combination, not
// globally).
inline FeatureMatrix slice_feature_sets(const FeatureMatrix& matrix,
                                        const FeatureSetCombination& combination,
                                        const TargetVector& target, double q, int workers = 1) {
    FeatureMatrix sliced = slice_families(matrix, combination.families);
    if (combination.variant == Variant::all) return sliced;
    return select_features(sliced, target, q, workers).retained;
}

// ---------------------------------------------------------------------------
// Benchmark grid
// ---------------------------------------------------------------------------

struct BenchmarkOptions {
    double q = 0.05;
    int k = 10;
    int n_iter = 100;
    std::uint64_t seed = 7;
    int workers = 1;
    // When set, retained variants select features inside each training fold
    // instead of once on the full data before CV.
    bool strict_selection = false;
};

struct FamilyCounts {
    std::size_t gts = 0;
    std::size_t avg = 0;
    std::size_t dif = 0;

    std::size_t total() const { return gts + avg + dif; }

    void add(FeatureFamily f) {
        switch (f) {
            case FeatureFamily::GTS: ++gts; break;
            case FeatureFamily::AVG: ++avg; break;
            case FeatureFamily::DIF: ++dif; break;
        }
    }
};

inline FamilyCounts count_families(const std::vector<FeatureName>& columns) {
    FamilyCounts counts;
    for (const auto& c : columns) counts.add(c.family);
    return counts;
}

struct BenchmarkCell {
    bool valid = false;  // false renders as "n/a" (empty retention)
    double mean = 0.0;
    double stddev = 0.0;
    HyperparameterSet best_hp;
    std::size_t n_features = 0;
    bool best_classifier = false;   // best classifier for this feature set
    bool best_feature_set = false;  // best feature set for this classifier
    bool best_overall = false;
};

struct BenchmarkReport {
    BenchmarkOptions options;
    int series_length = 0;
    std::size_t n_customers = 0;
    std::array<ModelKind, 4> classifiers{ModelKind::decision_tree, ModelKind::random_forest,
                                         ModelKind::gradient_boosted_tree, ModelKind::linear_svm};
    std::vector<FeatureSetCombination> combinations;       // 14, all/retained interleaved
    std::vector<std::vector<BenchmarkCell>> cells;         // [classifier][combination]
    FamilyCounts feature_counts;                           // full matrix
    FamilyCounts retained_counts;                          // full-matrix selection at q
    std::vector<std::pair<FamilySet, PValueTable>> selection_tables;  // per family subset
};

struct SearchSpaces {
    SearchSpace dt = default_search_space(ModelKind::decision_tree);
    SearchSpace rf = default_search_space(ModelKind::random_forest);
    SearchSpace gbt = default_search_space(ModelKind::gradient_boosted_tree);
    SearchSpace lsvm = default_search_space(ModelKind::linear_svm);

    const SearchSpace& get(ModelKind kind) const {
        switch (kind) {
            case ModelKind::decision_tree: return dt;
            case ModelKind::random_forest: return rf;
            case ModelKind::gradient_boosted_tree: return gbt;
            case ModelKind::linear_svm: return lsvm;
        }
        return dt;
    }
};

// Full grid: 7 family subsets x {all, retained} x 4 classifiers, each cell a
// randomized search. Every job seed derives from (master seed, combination,
// classifier, config, fold); the grid is complete or the call throws.
inline BenchmarkReport run_benchmark(const SeriesDataset& dataset,
                                     const ExtractionConfig& extraction_config,
                                     const SearchSpaces& spaces, const BenchmarkOptions& options) {
    BenchmarkReport report;
    report.options = options;
    report.series_length = dataset.series_length;
    report.n_customers = dataset.size();

    const auto extraction = extract_all(dataset, extraction_config, options.workers);
    const FeatureMatrix& full = extraction.matrix;
    const TargetVector target = dataset.target();
    report.feature_counts = count_families(full.columns);

    const auto global_selection = select_features(full, target, options.q, options.workers);
    report.retained_counts = count_families(global_selection.retained.columns);

    // One fold split shared by every cell of the grid.
    const auto folds = kfold_split(full.n_rows(), options.k, target.labels,
                                   derive_seed(options.seed, "folds"));

    const auto subsets = all_family_subsets();
    for (const auto& families : subsets)
        for (const Variant variant : {Variant::all, Variant::retained})
            report.combinations.push_back({families, variant});
    report.cells.assign(report.classifiers.size(),
                        std::vector<BenchmarkCell>(report.combinations.size()));

    std::size_t combo_index = 0;
    for (const auto& families : subsets) {
        const FeatureMatrix sliced = slice_families(full, families);

        // Full-data selection for this subset: the retained matrix in default
        // mode and the reported p-value table in both modes.
        auto selection = select_features(sliced, target, options.q, options.workers);
        report.selection_tables.emplace_back(families, selection.table);

        std::optional<std::vector<std::vector<std::size_t>>> fold_masks;
        if (options.strict_selection) {
            fold_masks.emplace();
            for (const auto& fold : folds) {
                FeatureMatrix train_view;
                train_view.customer_ids.reserve(fold.train.size());
                for (const auto i : fold.train)
                    train_view.customer_ids.push_back(sliced.customer_ids[i]);
                train_view.columns = sliced.columns;
                train_view.data = sliced.data.select_rows(fold.train);
                TargetVector train_target;
                for (const auto i : fold.train) {
                    train_target.customer_ids.push_back(target.customer_ids[i]);
                    train_target.labels.push_back(target.labels[i]);
                }
                const auto fold_selection =
                    select_features(train_view, train_target, options.q, options.workers);
                std::vector<std::size_t> mask;
                for (std::size_t c = 0; c < fold_selection.table.retained_mask.size(); ++c)
                    if (fold_selection.table.retained_mask[c]) mask.push_back(c);
                fold_masks->push_back(std::move(mask));
            }
        }

        for (const Variant variant : {Variant::all, Variant::retained}) {
            const std::size_t this_combo = combo_index++;
            const FeatureMatrix* cell_matrix = &sliced;
            const std::vector<std::vector<std::size_t>>* masks = nullptr;
            if (variant == Variant::retained) {
                if (options.strict_selection) masks = &*fold_masks;
                else cell_matrix = &selection.retained;
            }

            for (std::size_t m = 0; m < report.classifiers.size(); ++m) {
                BenchmarkCell& cell = report.cells[m][this_combo];
                cell.n_features =
                    variant == Variant::all ? sliced.n_cols() : selection.retained.n_cols();

                if (variant == Variant::retained && !options.strict_selection &&
                    cell_matrix->n_cols() == 0) {
                    cell.valid = false;  // empty retention: n/a sentinel
                    continue;
                }

                const ModelKind kind = report.classifiers[m];
                const std::uint64_t cell_seed = derive_seed(options.seed, "cell", this_combo, m);
                const auto outcome =
                    detail::search_with_folds(kind, spaces.get(kind), cell_matrix->data,
                                              target.labels, options.n_iter, folds, cell_seed,
                                              options.workers, masks);
                cell.valid = true;
                cell.mean = outcome.best().mean;
                cell.stddev = outcome.best().stddev;
                cell.best_hp = outcome.best().hyperparameters;
            }
        }
    }

    // Markers: best classifier per combination column, best combination per
    // classifier row, best overall cell. Ties resolve to the earlier entry.
    for (std::size_t j = 0; j < report.combinations.size(); ++j) {
        std::ptrdiff_t best = -1;
        for (std::size_t m = 0; m < report.classifiers.size(); ++m) {
            const auto& cell = report.cells[m][j];
            if (!cell.valid) continue;
            if (best < 0 || cell.mean > report.cells[static_cast<std::size_t>(best)][j].mean)
                best = static_cast<std::ptrdiff_t>(m);
        }
        if (best >= 0) report.cells[static_cast<std::size_t>(best)][j].best_classifier = true;
    }
    for (std::size_t m = 0; m < report.classifiers.size(); ++m) {
        std::ptrdiff_t best = -1;
        for (std::size_t j = 0; j < report.combinations.size(); ++j) {
            const auto& cell = report.cells[m][j];
            if (!cell.valid) continue;
            if (best < 0 || cell.mean > report.cells[m][static_cast<std::size_t>(best)].mean)
                best = static_cast<std::ptrdiff_t>(j);
        }
        if (best >= 0) report.cells[m][static_cast<std::size_t>(best)].best_feature_set = true;
    }
    {
        std::size_t best_m = 0, best_j = 0;
        bool found = false;
        for (std::size_t m = 0; m < report.classifiers.size(); ++m)
            for (std::size_t j = 0; j < report.combinations.size(); ++j) {
                const auto& cell = report.cells[m][j];
                if (!cell.valid) continue;
                if (!found || cell.mean > report.cells[best_m][best_j].mean) {
                    found = true;
                    best_m = m;
                    best_j = j;
                }
            }
        if (found) report.cells[best_m][best_j].best_overall = true;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { markdown, csv };

namespace detail {

inline std::string five_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

inline std::string cell_text(const BenchmarkCell& cell, bool markdown) {
    if (!cell.valid) return "n/a";
    std::string text = five_decimals(cell.mean);
    if (markdown && cell.best_overall) text = "**" + text + "**";
    std::string markers;
    if (cell.best_classifier) markers += 'c';
    if (cell.best_feature_set) markers += 'f';
    if (!markers.empty()) text += markdown ? " ^" + markers : "";
    return text;
}

}  // namespace detail

// Markdown mirrors the paper's table layout (classifier rows, feature-set
// columns split over two tables, 5-decimal values, best overall in bold,
// c/f markers); CSV is one row per cell.
inline std::string render_report(const BenchmarkReport& report, ReportFormat format) {
    std::string out;
    const auto classifier_label = [](ModelKind kind) {
        switch (kind) {
            case ModelKind::decision_tree: return "DT";
            case ModelKind::random_forest: return "RF";
            case ModelKind::gradient_boosted_tree: return "GBT";
            case ModelKind::linear_svm: return "LSVM";
        }
        return "?";
    };

    if (format == ReportFormat::csv) {
        out += "classifier;families;variant;mean;std;n_features;best_classifier;best_feature_set;"
               "best_overall;best_hp\n";
        for (std::size_t m = 0; m < report.classifiers.size(); ++m) {
            for (std::size_t j = 0; j < report.combinations.size(); ++j) {
                const auto& cell = report.cells[m][j];
                out += classifier_label(report.classifiers[m]);
                out += ';';
                out += report.combinations[j].families.label();
                out += ';';
                out += variant_name(report.combinations[j].variant);
                out += ';';
                out += cell.valid ? detail::five_decimals(cell.mean) : "n/a";
                out += ';';
                out += cell.valid ? detail::five_decimals(cell.stddev) : "n/a";
                out += ';';
                out += std::to_string(cell.n_features);
                out += ';';
                out += cell.best_classifier ? "1" : "0";
                out += ';';
                out += cell.best_feature_set ? "1" : "0";
                out += ';';
                out += cell.best_overall ? "1" : "0";
                out += ';';
                out += cell.valid ? cell.best_hp.describe() : "";
                out += '\n';
            }
        }
        return out;
    }

    out += "# NTL detection benchmark\n\n";
    out += "Customers: " + std::to_string(report.n_customers) +
           ", series length: " + std::to_string(report.series_length) +
           ", folds: " + std::to_string(report.options.k) +
           ", search iterations: " + std::to_string(report.options.n_iter) +
           ", FDR level: " + csv::format_double(report.options.q) +
           ", seed: " + std::to_string(report.options.seed) +
           (report.options.strict_selection ? ", per-fold selection" : "") + "\n\n";

    out += "## Feature counts\n\n";
    out += "| Family | #Features | #Retained |\n|---|---|---|\n";
    const auto count_row = [&](const char* name, std::size_t total, std::size_t retained) {
        out += "| " + std::string(name) + " | " + std::to_string(total) + " | " +
               std::to_string(retained) + " |\n";
    };
    count_row("GTS", report.feature_counts.gts, report.retained_counts.gts);
    count_row("AVG", report.feature_counts.avg, report.retained_counts.avg);
    count_row("DIF", report.feature_counts.dif, report.retained_counts.dif);
    count_row("Total", report.feature_counts.total(), report.retained_counts.total());
    out += '\n';

    const auto table_for = [&](std::size_t combo_begin, std::size_t combo_end) {
        out += "| Clf |";
        for (std::size_t j = combo_begin; j < combo_end; ++j)
            out += " " + report.combinations[j].families.label() + " " +
                   variant_name(report.combinations[j].variant) + " |";
        out += "\n|---|";
        for (std::size_t j = combo_begin; j < combo_end; ++j) out += "---|";
        out += '\n';
        for (std::size_t m = 0; m < report.classifiers.size(); ++m) {
            out += "| ";
            out += classifier_label(report.classifiers[m]);
            out += " |";
            for (std::size_t j = combo_begin; j < combo_end; ++j)
                out += " " + detail::cell_text(report.cells[m][j], true) + " |";
            out += '\n';
        }
        out += '\n';
    };

    out += "## Balanced AUC (best mean over the search)\n\n";
    table_for(0, 8);
    table_for(8, report.combinations.size());

    out += "Markers: `^c` best classifier for the feature set, `^f` best feature set for the "
           "classifier, bold best overall.\n\n";

    out += "## Best hyperparameters\n\n";
    out += "| Clf | Feature set | Variant | Mean | Std | #Features | Parameters |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (std::size_t m = 0; m < report.classifiers.size(); ++m)
        for (std::size_t j = 0; j < report.combinations.size(); ++j) {
            const auto& cell = report.cells[m][j];
            out += "| " + std::string(classifier_label(report.classifiers[m])) + " | " +
                   report.combinations[j].families.label() + " | " +
                   variant_name(report.combinations[j].variant) + " | " +
                   (cell.valid ? detail::five_decimals(cell.mean) : "n/a") + " | " +
                   (cell.valid ? detail::five_decimals(cell.stddev) : "n/a") + " | " +
                   std::to_string(cell.n_features) + " | " +
                   (cell.valid ? cell.best_hp.describe() : "") + " |\n";
        }
    return out;
}

}  // namespace ntl
