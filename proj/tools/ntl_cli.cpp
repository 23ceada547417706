// Command-line front end: synthetic data generation, preprocessing, feature
// extraction, selection, slicing, model search and the full benchmark
// pipeline. Every run is reproducible from (input files, flags, seed); the
// manifest written next to the outputs records all of it.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ntl/ntl.hpp"

namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ntl::Error(ntl::ErrorCode::file_unwritable, path);
    out << text;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / name).string();
}

ntl::ExtractionConfig families_config(const std::string& families) {
    ntl::ExtractionConfig config;
    config.enabled_families.clear();
    for (const auto& token : ntl::csv::split_line(families, ',')) {
        if (token == "gts") config.enabled_families.insert(ntl::FeatureFamily::GTS);
        else if (token == "avg") config.enabled_families.insert(ntl::FeatureFamily::AVG);
        else if (token == "dif") config.enabled_families.insert(ntl::FeatureFamily::DIF);
        else
            throw ntl::Error(ntl::ErrorCode::invalid_config,
                             "unknown family '" + token + "' (expected gts, avg, dif)");
    }
    config.validate();
    return config;
}

ntl::FamilySet families_set(const std::string& families) {
    const auto config = families_config(families);
    ntl::FamilySet set;
    set.gts = config.enabled_families.contains(ntl::FeatureFamily::GTS);
    set.avg = config.enabled_families.contains(ntl::FeatureFamily::AVG);
    set.dif = config.enabled_families.contains(ntl::FeatureFamily::DIF);
    return set;
}

std::string file_label(const ntl::FamilySet& families) {
    std::string label = families.label();
    for (auto& c : label)
        if (c == '+') c = '_';
    return label;
}

ntl::ModelKind parse_model(const std::string& name) {
    if (name == "dt") return ntl::ModelKind::decision_tree;
    if (name == "rf") return ntl::ModelKind::random_forest;
    if (name == "gbt") return ntl::ModelKind::gradient_boosted_tree;
    if (name == "lsvm") return ntl::ModelKind::linear_svm;
    throw ntl::Error(ntl::ErrorCode::invalid_config,
                     "unknown model '" + name + "' (expected dt, rf, gbt, lsvm)");
}

ntl::TargetVector target_for_matrix(const ntl::FeatureMatrix& matrix,
                                    const ntl::SeriesDataset& dataset) {
    ntl::TargetVector target;
    std::map<std::string, int> labels;
    for (const auto& series : dataset.series) labels[series.customer_id] = series.label;
    for (const auto& id : matrix.customer_ids) {
        auto it = labels.find(id);
        if (it == labels.end())
            throw ntl::Error(ntl::ErrorCode::schema_mismatch,
                             "customer " + id + " missing from dataset");
        target.customer_ids.push_back(id);
        target.labels.push_back(it->second);
    }
    return target;
}

// Shared stage implementations so `pipeline` writes byte-identical artifacts
// to running the stages one by one.

struct StageFlags {
    std::string out_dir = "out";
    int length = 24;
    std::string column = "measured";
    bool drop_all_zero = false;
    double fdr = 0.05;
    int folds = 10;
    int n_iter = 100;
    std::uint64_t seed = 7;
    int workers = 1;
    bool strict_selection = false;
};

ntl::PreprocessConfig preprocess_config(const StageFlags& flags) {
    ntl::PreprocessConfig config;
    config.series_length = flags.length;
    config.column = flags.column == "billed" ? ntl::ConsumptionColumn::billed
                                             : ntl::ConsumptionColumn::measured;
    config.drop_all_zero = flags.drop_all_zero;
    config.worker_count = flags.workers;
    return config;
}

ntl::SeriesDataset stage_preprocess(const std::string& consumptions_path,
                                    const std::string& inspections_path, const StageFlags& flags,
                                    ntl::RunManifest& manifest) {
    const auto consumptions = ntl::load_consumptions(consumptions_path);
    const auto inspections = ntl::load_inspections(inspections_path);
    const auto latest = ntl::latest_inspection_per_customer(inspections.records);
    auto result = ntl::build_windows(consumptions.records, latest, preprocess_config(flags));
    result.dataset.provenance.consumption_digest = ntl::csv::file_digest(consumptions_path);
    result.dataset.provenance.inspection_digest = ntl::csv::file_digest(inspections_path);

    const std::string dataset_path = out_path(flags.out_dir, "dataset.csv");
    ntl::save_dataset(result.dataset, dataset_path);

    manifest.inputs()[consumptions_path] = hex64(result.dataset.provenance.consumption_digest);
    manifest.inputs()[inspections_path] = hex64(result.dataset.provenance.inspection_digest);
    manifest.outputs()[dataset_path] = hex64(ntl::csv::file_digest(dataset_path));
    auto& stats = manifest.stats();
    stats["consumption_rows_total"] = consumptions.stats.rows_total;
    stats["consumption_rows_dropped"] = consumptions.stats.rows_dropped;
    stats["inspection_rows_total"] = inspections.stats.rows_total;
    stats["inspection_rows_dropped"] = inspections.stats.rows_dropped;
    stats["customers_considered"] = result.stats.customers_considered;
    stats["customers_accepted"] = result.stats.accepted;
    stats["rejected_wrong_length"] = result.stats.rejected_wrong_length;
    stats["rejected_gap_in_months"] = result.stats.rejected_gap_in_months;
    stats["rejected_non_monotone"] = result.stats.rejected_non_monotone;
    stats["rejected_all_zero"] = result.stats.rejected_all_zero;

    std::cout << "preprocess: " << result.stats.accepted << " of "
              << result.stats.customers_considered << " inspected customers kept\n";
    return std::move(result.dataset);
}

ntl::ExtractionResult stage_extract(const ntl::SeriesDataset& dataset,
                                    const ntl::ExtractionConfig& config, const StageFlags& flags,
                                    ntl::RunManifest& manifest) {
    auto extraction = ntl::extract_all(dataset, config, flags.workers);
    const std::string features_path = out_path(flags.out_dir, "features.csv");
    ntl::save_feature_matrix(extraction.matrix, features_path);
    manifest.outputs()[features_path] = hex64(ntl::csv::file_digest(features_path));
    manifest.stats()["feature_columns"] = extraction.matrix.n_cols();
    manifest.stats()["imputed_cells"] = extraction.total_imputed();
    std::cout << "extract: " << extraction.matrix.n_cols() << " features for "
              << extraction.matrix.n_rows() << " customers\n";
    return extraction;
}

ntl::SelectionResult stage_select(const ntl::FeatureMatrix& matrix,
                                  const ntl::TargetVector& target, const StageFlags& flags,
                                  ntl::RunManifest& manifest) {
    auto selection = ntl::select_features(matrix, target, flags.fdr, flags.workers);
    const std::string pvalues_path = out_path(flags.out_dir, "pvalues.csv");
    const std::string retained_path = out_path(flags.out_dir, "features_retained.csv");
    ntl::save_p_value_table(selection.table, pvalues_path);
    ntl::save_feature_matrix(selection.retained, retained_path);
    manifest.outputs()[pvalues_path] = hex64(ntl::csv::file_digest(pvalues_path));
    manifest.outputs()[retained_path] = hex64(ntl::csv::file_digest(retained_path));
    const auto counts = ntl::count_families(selection.retained.columns);
    auto& stats = manifest.stats();
    stats["retained_total"] = counts.total();
    stats["retained_gts"] = counts.gts;
    stats["retained_avg"] = counts.avg;
    stats["retained_dif"] = counts.dif;
    std::cout << "select: retained " << counts.total() << " of " << matrix.n_cols()
              << " features at q=" << flags.fdr << "\n";
    return selection;
}

void stage_report(const ntl::SeriesDataset& dataset, const StageFlags& flags,
                  ntl::RunManifest& manifest) {
    ntl::BenchmarkOptions options;
    options.q = flags.fdr;
    options.k = flags.folds;
    options.n_iter = flags.n_iter;
    options.seed = flags.seed;
    options.workers = flags.workers;
    options.strict_selection = flags.strict_selection;

    const auto report =
        ntl::run_benchmark(dataset, ntl::ExtractionConfig{}, ntl::SearchSpaces{}, options);

    const std::string md_path = out_path(flags.out_dir, "report.md");
    const std::string csv_path = out_path(flags.out_dir, "report.csv");
    write_text(md_path, ntl::render_report(report, ntl::ReportFormat::markdown));
    write_text(csv_path, ntl::render_report(report, ntl::ReportFormat::csv));
    manifest.outputs()[md_path] = hex64(ntl::csv::file_digest(md_path));
    manifest.outputs()[csv_path] = hex64(ntl::csv::file_digest(csv_path));

    for (const auto& [families, table] : report.selection_tables) {
        const std::string path =
            out_path(flags.out_dir, "pvalues_" + file_label(families) + ".csv");
        ntl::save_p_value_table(table, path);
        manifest.outputs()[path] = hex64(ntl::csv::file_digest(path));
    }

    auto& stats = manifest.stats();
    stats["feature_total"] = report.feature_counts.total();
    stats["retained_total"] = report.retained_counts.total();
    stats["retained_gts"] = report.retained_counts.gts;
    stats["retained_avg"] = report.retained_counts.avg;
    stats["retained_dif"] = report.retained_counts.dif;

    // Headline: the best overall cell.
    for (std::size_t m = 0; m < report.classifiers.size(); ++m)
        for (std::size_t j = 0; j < report.combinations.size(); ++j)
            if (report.cells[m][j].best_overall)
                std::cout << "report: best " << ntl::model_kind_name(report.classifiers[m])
                          << " on " << report.combinations[j].families.label() << " ("
                          << ntl::variant_name(report.combinations[j].variant)
                          << "), balanced AUC " << report.cells[m][j].mean << "\n";
}

void add_stage_flags(CLI::App* cmd, StageFlags& flags, bool with_search) {
    cmd->add_option("--out-dir", flags.out_dir, "Output directory");
    cmd->add_option("--workers", flags.workers, "Worker threads");
    if (with_search) {
        cmd->add_option("--fdr", flags.fdr, "FDR level q for feature selection");
        cmd->add_option("--folds", flags.folds, "Cross-validation folds k");
        cmd->add_option("--n-iter", flags.n_iter, "Randomized search iterations");
        cmd->add_option("--seed", flags.seed, "Master seed");
        cmd->add_flag("--strict-selection", flags.strict_selection,
                      "Select features inside each training fold");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-technical loss detection from monthly consumption series"};
    app.require_subcommand(1);

    // --- synth ---
    ntl::SynthConfig synth_config;
    StageFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "Generate a planted synthetic data set");
    synth->add_option("--customers", synth_config.n_customers, "Number of customers");
    synth->add_option("--length", synth_config.n_months, "Months per customer");
    synth->add_option("--ntl-fraction", synth_config.ntl_fraction, "Fraction of NTL customers");
    synth->add_option("--base", synth_config.base_level, "Mean consumption level (kWh)");
    synth->add_option("--amplitude", synth_config.seasonal_amplitude, "Seasonal amplitude (kWh)");
    synth->add_option("--noise-std", synth_config.noise_std, "Gaussian noise std (kWh)");
    synth->add_option("--drop-fraction", synth_config.fraud_drop_fraction,
                      "Consumption drop fraction after fraud onset");
    synth->add_option("--onset-min", synth_config.fraud_onset_min, "Earliest fraud onset month");
    synth->add_option("--onset-max", synth_config.fraud_onset_max, "Latest fraud onset month");
    synth->add_option("--seed", synth_config.seed, "Master seed");
    synth->add_option("--out-dir", synth_flags.out_dir, "Output directory");

    // --- preprocess ---
    StageFlags preprocess_flags;
    std::string consumptions_path, inspections_path;
    auto* preprocess =
        app.add_subcommand("preprocess", "Build the consecutive-window dataset from raw CSVs");
    preprocess->add_option("--consumptions", consumptions_path, "Consumption CSV")->required();
    preprocess->add_option("--inspections", inspections_path, "Inspection CSV")->required();
    preprocess->add_option("--length", preprocess_flags.length, "Series length N in months");
    preprocess->add_option("--column", preprocess_flags.column, "measured or billed")
        ->check(CLI::IsMember({"measured", "billed"}));
    preprocess->add_flag("--drop-all-zero", preprocess_flags.drop_all_zero,
                         "Drop series whose entries are all zeros");
    add_stage_flags(preprocess, preprocess_flags, false);

    // --- extract ---
    StageFlags extract_flags;
    std::string extract_dataset_path, extract_families = "gts,avg,dif";
    auto* extract = app.add_subcommand("extract", "Compute the feature matrix from a dataset");
    extract->add_option("--dataset", extract_dataset_path, "Dataset CSV")->required();
    extract->add_option("--families", extract_families, "Comma list of gts,avg,dif");
    add_stage_flags(extract, extract_flags, false);

    // --- select ---
    StageFlags select_flags;
    std::string select_features_path, select_dataset_path;
    auto* select = app.add_subcommand("select", "Hypothesis tests plus FDR feature selection");
    select->add_option("--features", select_features_path, "Feature matrix CSV")->required();
    select->add_option("--dataset", select_dataset_path, "Dataset CSV (labels)")->required();
    select->add_option("--fdr", select_flags.fdr, "FDR level q");
    add_stage_flags(select, select_flags, false);

    // --- slice ---
    StageFlags slice_flags;
    std::string slice_features_path, slice_dataset_path, slice_families = "gts,avg,dif";
    std::string slice_variant = "all";
    auto* slice = app.add_subcommand("slice", "Cut a feature-family combination from the matrix");
    slice->add_option("--features", slice_features_path, "Feature matrix CSV")->required();
    slice->add_option("--dataset", slice_dataset_path, "Dataset CSV (labels)")->required();
    slice->add_option("--families", slice_families, "Comma list of gts,avg,dif");
    slice->add_option("--variant", slice_variant, "all or retained")
        ->check(CLI::IsMember({"all", "retained"}));
    slice->add_option("--fdr", slice_flags.fdr, "FDR level q (retained variant)");
    add_stage_flags(slice, slice_flags, false);

    // --- train ---
    StageFlags train_flags;
    std::string train_features_path, train_dataset_path, train_model_name = "rf";
    auto* train = app.add_subcommand("train", "Randomized hyperparameter search for one model");
    train->add_option("--features", train_features_path, "Feature matrix CSV")->required();
    train->add_option("--dataset", train_dataset_path, "Dataset CSV (labels)")->required();
    train->add_option("--model", train_model_name, "dt, rf, gbt or lsvm");
    add_stage_flags(train, train_flags, true);

    // --- report ---
    StageFlags report_flags;
    std::string report_dataset_path;
    auto* report = app.add_subcommand("report", "Full classifier x feature-set benchmark");
    report->add_option("--dataset", report_dataset_path, "Dataset CSV")->required();
    add_stage_flags(report, report_flags, true);

    // --- pipeline ---
    StageFlags pipeline_flags;
    std::string pipeline_consumptions, pipeline_inspections;
    auto* pipeline =
        app.add_subcommand("pipeline", "preprocess + extract + select + report in one run");
    pipeline->add_option("--consumptions", pipeline_consumptions, "Consumption CSV")->required();
    pipeline->add_option("--inspections", pipeline_inspections, "Inspection CSV")->required();
    pipeline->add_option("--length", pipeline_flags.length, "Series length N in months");
    pipeline->add_option("--column", pipeline_flags.column, "measured or billed")
        ->check(CLI::IsMember({"measured", "billed"}));
    pipeline->add_flag("--drop-all-zero", pipeline_flags.drop_all_zero,
                       "Drop series whose entries are all zeros");
    add_stage_flags(pipeline, pipeline_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            ntl::RunManifest manifest("synth");
            manifest.set_seed(synth_config.seed);
            const auto output = ntl::synth_generate(synth_config);
            const std::string consumptions = out_path(synth_flags.out_dir, "consumptions.csv");
            const std::string inspections = out_path(synth_flags.out_dir, "inspections.csv");
            ntl::save_consumptions_csv(output.consumptions, consumptions);
            ntl::save_inspections_csv(output.inspections, inspections);
            auto& config = manifest.config();
            config["customers"] = synth_config.n_customers;
            config["length"] = synth_config.n_months;
            config["ntl_fraction"] = synth_config.ntl_fraction;
            config["base"] = synth_config.base_level;
            config["amplitude"] = synth_config.seasonal_amplitude;
            config["noise_std"] = synth_config.noise_std;
            config["drop_fraction"] = synth_config.fraud_drop_fraction;
            config["onset_min"] = synth_config.fraud_onset_min;
            config["onset_max"] = synth_config.fraud_onset_max;
            manifest.outputs()[consumptions] = hex64(ntl::csv::file_digest(consumptions));
            manifest.outputs()[inspections] = hex64(ntl::csv::file_digest(inspections));
            manifest.write(out_path(synth_flags.out_dir, "manifest.json"));
            const auto positives =
                std::count(output.labels.begin(), output.labels.end(), 1);
            std::cout << "synth: " << synth_config.n_customers << " customers, " << positives
                      << " NTL\n";
        } else if (preprocess->parsed()) {
            ntl::RunManifest manifest("preprocess");
            manifest.set_seed(preprocess_flags.seed);
            auto& config = manifest.config();
            config["length"] = preprocess_flags.length;
            config["column"] = preprocess_flags.column;
            config["drop_all_zero"] = preprocess_flags.drop_all_zero;
            config["workers"] = preprocess_flags.workers;
            stage_preprocess(consumptions_path, inspections_path, preprocess_flags, manifest);
            manifest.write(out_path(preprocess_flags.out_dir, "manifest.json"));
        } else if (extract->parsed()) {
            ntl::RunManifest manifest("extract");
            manifest.config()["families"] = extract_families;
            manifest.config()["workers"] = extract_flags.workers;
            manifest.inputs()[extract_dataset_path] =
                hex64(ntl::csv::file_digest(extract_dataset_path));
            const auto dataset = ntl::load_dataset(extract_dataset_path);
            stage_extract(dataset, families_config(extract_families), extract_flags, manifest);
            manifest.write(out_path(extract_flags.out_dir, "manifest.json"));
        } else if (select->parsed()) {
            ntl::RunManifest manifest("select");
            manifest.config()["fdr"] = select_flags.fdr;
            manifest.inputs()[select_features_path] =
                hex64(ntl::csv::file_digest(select_features_path));
            manifest.inputs()[select_dataset_path] =
                hex64(ntl::csv::file_digest(select_dataset_path));
            const auto matrix = ntl::load_feature_matrix(select_features_path);
            const auto dataset = ntl::load_dataset(select_dataset_path);
            stage_select(matrix, target_for_matrix(matrix, dataset), select_flags, manifest);
            manifest.write(out_path(select_flags.out_dir, "manifest.json"));
        } else if (slice->parsed()) {
            ntl::RunManifest manifest("slice");
            manifest.config()["families"] = slice_families;
            manifest.config()["variant"] = slice_variant;
            manifest.config()["fdr"] = slice_flags.fdr;
            const auto matrix = ntl::load_feature_matrix(slice_features_path);
            const auto dataset = ntl::load_dataset(slice_dataset_path);
            const auto target = target_for_matrix(matrix, dataset);
            const ntl::FeatureSetCombination combination{
                families_set(slice_families),
                slice_variant == "retained" ? ntl::Variant::retained : ntl::Variant::all};
            const auto sliced = ntl::slice_feature_sets(matrix, combination, target,
                                                        slice_flags.fdr, slice_flags.workers);
            const std::string path = out_path(
                slice_flags.out_dir, "features_" + file_label(combination.families) + "_" +
                                         ntl::variant_name(combination.variant) + ".csv");
            ntl::save_feature_matrix(sliced, path);
            manifest.outputs()[path] = hex64(ntl::csv::file_digest(path));
            manifest.write(out_path(slice_flags.out_dir, "manifest.json"));
            std::cout << "slice: " << sliced.n_cols() << " columns -> " << path << "\n";
        } else if (train->parsed()) {
            ntl::RunManifest manifest("train");
            manifest.set_seed(train_flags.seed);
            const auto kind = parse_model(train_model_name);
            const auto matrix = ntl::load_feature_matrix(train_features_path);
            const auto dataset = ntl::load_dataset(train_dataset_path);
            const auto target = target_for_matrix(matrix, dataset);
            const auto outcome = ntl::randomized_search(
                kind, ntl::default_search_space(kind), matrix.data, target.labels,
                train_flags.n_iter, train_flags.folds, train_flags.seed, train_flags.workers);

            const std::string path =
                out_path(train_flags.out_dir, "search_" + train_model_name + ".csv");
            ntl::csv::Writer writer(path);
            writer.row({"config", "mean", "std", "hyperparameters"});
            for (std::size_t c = 0; c < outcome.results.size(); ++c) {
                const auto& r = outcome.results[c];
                writer.row({std::to_string(c), ntl::csv::format_double(r.mean),
                            ntl::csv::format_double(r.stddev), r.hyperparameters.describe()});
            }
            manifest.config()["model"] = train_model_name;
            manifest.config()["folds"] = train_flags.folds;
            manifest.config()["n_iter"] = train_flags.n_iter;
            manifest.write(out_path(train_flags.out_dir, "manifest.json"));
            std::cout << "train: best " << train_model_name << " mean balanced AUC "
                      << outcome.best().mean << " +- " << outcome.best().stddev << " ("
                      << outcome.best().hyperparameters.describe() << ")\n";
        } else if (report->parsed()) {
            ntl::RunManifest manifest("report");
            manifest.set_seed(report_flags.seed);
            manifest.inputs()[report_dataset_path] =
                hex64(ntl::csv::file_digest(report_dataset_path));
            auto& config = manifest.config();
            config["fdr"] = report_flags.fdr;
            config["folds"] = report_flags.folds;
            config["n_iter"] = report_flags.n_iter;
            config["workers"] = report_flags.workers;
            config["strict_selection"] = report_flags.strict_selection;
            const auto dataset = ntl::load_dataset(report_dataset_path);
            stage_report(dataset, report_flags, manifest);
            manifest.write(out_path(report_flags.out_dir, "manifest.json"));
        } else if (pipeline->parsed()) {
            ntl::RunManifest manifest("pipeline");
            manifest.set_seed(pipeline_flags.seed);
            auto& config = manifest.config();
            config["length"] = pipeline_flags.length;
            config["column"] = pipeline_flags.column;
            config["drop_all_zero"] = pipeline_flags.drop_all_zero;
            config["fdr"] = pipeline_flags.fdr;
            config["folds"] = pipeline_flags.folds;
            config["n_iter"] = pipeline_flags.n_iter;
            config["workers"] = pipeline_flags.workers;
            config["strict_selection"] = pipeline_flags.strict_selection;

            const auto dataset = stage_preprocess(pipeline_consumptions, pipeline_inspections,
                                                  pipeline_flags, manifest);
            const auto extraction =
                stage_extract(dataset, ntl::ExtractionConfig{}, pipeline_flags, manifest);
            stage_select(extraction.matrix, dataset.target(), pipeline_flags, manifest);
            stage_report(dataset, pipeline_flags, manifest);
            manifest.write(out_path(pipeline_flags.out_dir, "manifest.json"));
        }
    } catch (const ntl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
