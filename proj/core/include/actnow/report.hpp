#pragma once

#include "actnow/engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace actnow {

struct PhaseTotals {
    std::int64_t steps = 0;
    double mse = 0.0; ///< mean of per-step MSE
    double mae = 0.0; ///< mean of per-step MAE
};

struct RunReport {
    std::vector<StepLog> logs;
    PhaseTotals val;
    PhaseTotals test;
    std::string config_echo;
    double seconds = 0.0;
};

/// Cumulative errors per phase (the average of per-step errors over time).
/// Throws Error when there is no test-phase step.
RunReport evaluate(std::vector<StepLog> logs);

/// Header: phase,t,mse,mae,fsb_loss,ssb_loss. Absent losses are empty
/// fields; numbers use 17 significant digits so they round-trip.
void write_run_report(const std::filesystem::path& path, const std::vector<StepLog>& logs);
std::vector<StepLog> read_run_report(const std::filesystem::path& path);

struct SummaryRow {
    std::string run;
    std::string arm;
    std::uint64_t seed = 0;
    Index freq = 1;
    Index partitions = 1;
    Index hidden = 0;
    int epochs = 0;
    PhaseTotals val;
    PhaseTotals test;
    std::uint64_t leakage_violations = 0;
    double seconds = 0.0;
};

std::string summary_header();
void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

} // namespace actnow
