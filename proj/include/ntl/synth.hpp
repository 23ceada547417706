#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/csv.hpp"
#include "ntl/rng.hpp"

namespace ntl {

// Planted benchmark generator: seasonal sinusoid consumption with Gaussian
// noise, and a level-shift fraud pattern for NTL customers from a random
// onset month onward. The level shift is exactly what the difference
// features measure, which makes class separability controllable.
struct SynthConfig {
    int n_customers = 2000;
    int n_months = 24;
    double ntl_fraction = 0.25;
    double base_level = 100.0;       // kWh
    double seasonal_amplitude = 20.0;
    double noise_std = 5.0;
    double fraud_drop_fraction = 0.4;
    int fraud_onset_min = 1;   // inclusive, within [1, n_months-1]
    int fraud_onset_max = 23;  // inclusive
    std::uint64_t seed = 7;

    void validate() const {
        if (n_customers < 1 || n_months < 2)
            throw Error(ErrorCode::invalid_config, "need customers >= 1 and months >= 2");
        if (!(ntl_fraction > 0.0 && ntl_fraction < 1.0))
            throw Error(ErrorCode::invalid_config, "ntl_fraction must lie in (0,1)");
        if (base_level < 0.0 || seasonal_amplitude < 0.0 || noise_std < 0.0)
            throw Error(ErrorCode::invalid_config, "negative level/amplitude/noise");
        if (fraud_drop_fraction < 0.0 || fraud_drop_fraction >= 1.0)
            throw Error(ErrorCode::invalid_config, "fraud_drop_fraction must lie in [0,1)");
        if (fraud_onset_min < 1 || fraud_onset_max > n_months - 1 ||
            fraud_onset_min > fraud_onset_max)
            throw Error(ErrorCode::invalid_config, "fraud onset range outside [1, N-1]");
    }
};

struct SynthOutput {
    std::vector<ConsumptionRecord> consumptions;
    std::vector<InspectionRecord> inspections;
    std::vector<int> labels;  // per customer, generation order
};

// Deterministic per (config, seed): every customer draws from its own derived
// stream in a fixed order (label, phase, onset, then per month jitter and
// noise). Reading days are the 15th plus a jitter in [-3, +3], so dates stay
// strictly increasing across consecutive months.
inline SynthOutput synth_generate(const SynthConfig& config) {
    config.validate();
    SynthOutput out;
    out.consumptions.reserve(static_cast<std::size_t>(config.n_customers) *
                             static_cast<std::size_t>(config.n_months));
    out.inspections.reserve(static_cast<std::size_t>(config.n_customers));

    const int start_month_index = Date{2014, 1, 1}.month_index();
    for (int i = 0; i < config.n_customers; ++i) {
        Rng rng(derive_seed(config.seed, "customer", static_cast<std::uint64_t>(i)));
        const bool is_ntl = rng.uniform01() < config.ntl_fraction;
        const double phase = rng.uniform01() * 12.0;
        const int onset =
            static_cast<int>(rng.uniform_int(config.fraud_onset_min, config.fraud_onset_max));

        char id[16];
        std::snprintf(id, sizeof id, "C%06d", i + 1);

        Date last_date{};
        for (int d = 0; d < config.n_months; ++d) {
            const int jitter = static_cast<int>(rng.uniform_int(-3, 3));
            const double noise = rng.normal() * config.noise_std;
            const double season = config.seasonal_amplitude *
                                  std::sin(2.0 * std::numbers::pi * (d + phase) / 12.0);
            double kwh = std::max(0.0, config.base_level + season + noise);
            if (is_ntl && d >= onset) kwh *= 1.0 - config.fraud_drop_fraction;

            ConsumptionRecord record;
            record.customer_id = id;
            record.reading_date = date_from_month_index(start_month_index + d, 15 + jitter);
            record.kwh_measured = kwh;
            // Billed readings are invoiced whole kWh.
            record.kwh_billed = std::round(kwh);
            last_date = record.reading_date;
            out.consumptions.push_back(std::move(record));
        }

        InspectionRecord inspection;
        inspection.customer_id = id;
        inspection.inspection_date = add_days(last_date, 10);
        inspection.ntl_found = is_ntl ? 1 : 0;
        out.inspections.push_back(std::move(inspection));
        out.labels.push_back(is_ntl ? 1 : 0);
    }
    return out;
}

inline void save_consumptions_csv(const std::vector<ConsumptionRecord>& records,
                                  const std::string& path) {
    csv::Writer writer(path);
    writer.row({"customer_id", "reading_date", "kwh_measured", "kwh_billed"});
    for (const auto& r : records)
        writer.row({r.customer_id, r.reading_date.to_iso(), csv::format_double(r.kwh_measured),
                    csv::format_double(r.kwh_billed)});
}

inline void save_inspections_csv(const std::vector<InspectionRecord>& records,
                                 const std::string& path) {
    csv::Writer writer(path);
    writer.row({"customer_id", "inspection_date", "ntl_found"});
    for (const auto& r : records)
        writer.row({r.customer_id, r.inspection_date.to_iso(), std::to_string(r.ntl_found)});
}

}  // namespace ntl
