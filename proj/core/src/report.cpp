#include "actnow/report.hpp"

#include "actnow/errors.hpp"

#include <fstream>
#include <sstream>

namespace actnow {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

Phase parse_phase(const std::string& s) {
    if (s == "train") return Phase::train;
    if (s == "val") return Phase::val;
    if (s == "test") return Phase::test;
    throw IoError("unknown phase '" + s + "'");
}

std::optional<double> opt_field(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

void accumulate(PhaseTotals& p, const StepLog& l) {
    ++p.steps;
    p.mse += l.mse;
    p.mae += l.mae;
}

void finish(PhaseTotals& p) {
    if (p.steps > 0) {
        p.mse /= static_cast<double>(p.steps);
        p.mae /= static_cast<double>(p.steps);
    }
}

} // namespace

RunReport evaluate(std::vector<StepLog> logs) {
    RunReport r;
    for (const auto& l : logs) {
        if (l.phase == Phase::val) accumulate(r.val, l);
        if (l.phase == Phase::test) accumulate(r.test, l);
    }
    if (r.test.steps == 0) {
        throw Error("evaluate: no test-phase steps");
    }
    finish(r.val);
    finish(r.test);
    r.logs = std::move(logs);
    return r;
}

void write_run_report(const std::filesystem::path& path, const std::vector<StepLog>& logs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "phase,t,mse,mae,fsb_loss,ssb_loss\n";
    for (const auto& l : logs) {
        out << to_string(l.phase) << ',' << l.t << ',' << l.mse << ',' << l.mae << ',';
        if (l.fsb_loss) out << *l.fsb_loss;
        out << ',';
        if (l.ssb_loss) out << *l.ssb_loss;
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<StepLog> read_run_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "phase,t,mse,mae,fsb_loss,ssb_loss") {
        throw IoError("unexpected run report header in " + path.string());
    }
    std::vector<StepLog> logs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 6) throw IoError("malformed run report row: " + line);
        StepLog l;
        l.phase = parse_phase(f[0]);
        l.t = std::stoll(f[1]);
        l.mse = std::stod(f[2]);
        l.mae = std::stod(f[3]);
        l.fsb_loss = opt_field(f[4]);
        l.ssb_loss = opt_field(f[5]);
        logs.push_back(l);
    }
    return logs;
}

std::string summary_header() {
    return "run,arm,seed,freq,partitions,hidden,epochs,val_steps,val_mse,val_mae,test_steps,"
           "test_mse,test_mae,leakage_violations,seconds";
}

void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << summary_header() << '\n';
    for (const auto& r : rows) {
        out << r.run << ',' << r.arm << ',' << r.seed << ',' << r.freq << ',' << r.partitions << ','
            << r.hidden << ',' << r.epochs << ',' << r.val.steps << ',' << r.val.mse << ','
            << r.val.mae << ',' << r.test.steps << ',' << r.test.mse << ',' << r.test.mae << ','
            << r.leakage_violations << ',' << r.seconds << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SummaryRow> read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != summary_header()) throw IoError("unexpected summary header in " + path.string());
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 15) throw IoError("malformed summary row: " + line);
        SummaryRow r;
        r.run = f[0];
        r.arm = f[1];
        r.seed = std::stoull(f[2]);
        r.freq = std::stoll(f[3]);
        r.partitions = std::stoll(f[4]);
        r.hidden = std::stoll(f[5]);
        r.epochs = std::stoi(f[6]);
        r.val = {std::stoll(f[7]), std::stod(f[8]), std::stod(f[9])};
        r.test = {std::stoll(f[10]), std::stod(f[11]), std::stod(f[12])};
        r.leakage_violations = std::stoull(f[13]);
        r.seconds = std::stod(f[14]);
        rows.push_back(r);
    }
    return rows;
}

} // namespace actnow
