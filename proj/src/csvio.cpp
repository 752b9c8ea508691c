#include "eigenlearn/csvio.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace eigenlearn {

namespace {

std::string field(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream ss;
    ss << std::setprecision(17) << *v;
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

void write_long_csv(const std::vector<LongRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_long_csv: cannot open " + path.string());
    out << "experiment_id,target,n,quantity,mean,std,stderr,trials,theory\n";
    for (const auto& r : rows) {
        out << r.experiment_id << ',' << r.target << ',' << r.n << ',' << r.quantity << ','
            << field(r.mean) << ',' << field(r.std_dev) << ',' << field(r.std_err) << ','
            << (r.trials ? std::to_string(*r.trials) : "") << ',' << field(r.theory) << '\n';
    }
}

std::vector<LongRow> read_long_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_long_csv: cannot open " + path.string());
    std::vector<LongRow> rows;
    std::string line;
    bool first = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("experiment_id", 0) == 0) continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 9) {
            throw std::runtime_error("read_long_csv: expected 9 fields at line " + std::to_string(lineno));
        }
        LongRow r;
        r.experiment_id = f[0];
        r.target = f[1];
        r.n = std::stoi(f[2]);
        r.quantity = f[3];
        r.mean = parse_opt(f[4]);
        r.std_dev = parse_opt(f[5]);
        r.std_err = parse_opt(f[6]);
        if (!f[7].empty()) r.trials = std::stoi(f[7]);
        r.theory = parse_opt(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<LongRow> to_long_rows(const AggregateStats& stats, const std::string& experiment_id) {
    std::vector<LongRow> rows;
    rows.reserve(stats.rows.size());
    for (const auto& s : stats.rows) {
        LongRow r;
        r.experiment_id = experiment_id;
        r.target = s.target;
        r.n = s.n;
        r.quantity = s.quantity;
        r.mean = s.mean;
        r.std_dev = s.std_dev;
        r.std_err = s.std_err;
        r.trials = s.trials;
        r.theory = s.theory;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace eigenlearn
