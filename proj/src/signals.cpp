#include "fdid/signals.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "fdid/error.hpp"

namespace fdid {

double PiecewiseConstantInput::at(double t) const {
    if (t < 0.0 || t >= breakpoints.back()) return 0.0;
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

void PiecewiseConstantInput::validate() const {
    if (values.empty()) {
        throw Error(ErrorKind::Domain, "piecewise-constant input needs at least one segment");
    }
    if (breakpoints.size() != values.size() + 1) {
        throw Error(ErrorKind::Domain, "piecewise-constant input needs one more breakpoint than values");
    }
    if (breakpoints.front() != 0.0) {
        throw Error(ErrorKind::Domain, "first breakpoint must be 0");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1]) || !std::isfinite(breakpoints[i])) {
            throw Error(ErrorKind::Domain, "breakpoints must be finite and strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "input levels must be finite");
    }
}

void DiscreteInput::validate() const {
    if (samples.empty()) throw Error(ErrorKind::Domain, "discrete input must have at least one sample");
    for (double v : samples) {
        if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "input samples must be finite");
    }
}

double Dataset::input_at(double t) const {
    if (axis == Axis::Discrete) return discrete_input().at(static_cast<long long>(std::llround(t)));
    return pwc_input().at(t);
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.axis = axis;
    out.input = input;
    for (std::size_t r : rows) {
        if (r >= size()) throw Error(ErrorKind::Index, "subset row out of range");
        out.sample_times.push_back(sample_times[r]);
        out.outputs.push_back(outputs[r]);
    }
    out.validate();
    return out;
}

void Dataset::validate() const {
    if (sample_times.empty()) throw Error(ErrorKind::Domain, "dataset has no samples");
    if (sample_times.size() != outputs.size()) {
        throw Error(ErrorKind::Domain, "sample_times and outputs differ in length");
    }
    const bool disc_input = std::holds_alternative<DiscreteInput>(input);
    if (disc_input != (axis == Axis::Discrete)) {
        throw Error(ErrorKind::Domain, "input type does not match the dataset axis");
    }
    std::visit([](const auto& u) { u.validate(); }, input);
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double t = sample_times[i];
        if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::Domain, "sample times must be >= 0");
        if (axis == Axis::Discrete && t != std::floor(t)) {
            throw Error(ErrorKind::Domain, "discrete sample times must be integers");
        }
        if (i > 0 && !(t > sample_times[i - 1])) {
            throw Error(ErrorKind::Domain, "sample times must be strictly increasing");
        }
        if (!std::isfinite(outputs[i])) throw Error(ErrorKind::Domain, "outputs must be finite");
    }
}

Dataset scale_outputs(const Dataset& d, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw Error(ErrorKind::Domain, "scale_outputs: rho must be positive");
    }
    Dataset out = d;
    if (rho == 1.0) return out;
    for (double& y : out.outputs) y /= rho;
    return out;
}

double sum_squares(const std::vector<double>& v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// ===========================================================================
// CSV
// ===========================================================================

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    for (auto& c : cells) {
        while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
        while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r')) c.remove_suffix(1);
    }
    return cells;
}

std::optional<double> parse_cell(std::string_view cell, std::size_t row, const std::string& file) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::Parse, fmt::format("{}: row {}: invalid number '{}'", file, row, cell));
    }
    return v;
}

struct CsvTable {
    std::vector<std::vector<std::optional<double>>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::NotFound, fmt::format("dataset not found: {}", path.string()));
    }
    const std::string file = path.filename().string();
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    CsvTable table;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_row(line);
        if (!have_header) {
            if (cells.size() != header.size()) {
                throw Error(ErrorKind::Parse, fmt::format("{}: expected header '{}'", file,
                                                          fmt::join(header, ",")));
            }
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (cells[i] != header[i]) {
                    throw Error(ErrorKind::Parse, fmt::format("{}: expected header '{}'", file,
                                                              fmt::join(header, ",")));
                }
            }
            have_header = true;
            continue;
        }
        if (cells.size() != header.size()) {
            throw Error(ErrorKind::Parse, fmt::format("{}: row {}: expected {} fields, found {}", file,
                                                      lineno, header.size(), cells.size()));
        }
        std::vector<std::optional<double>> vals;
        for (const auto& c : cells) vals.push_back(parse_cell(c, lineno, file));
        table.rows.push_back(std::move(vals));
        table.line_numbers.push_back(lineno);
    }
    if (!have_header) throw Error(ErrorKind::Parse, fmt::format("{}: missing header", file));
    if (table.rows.empty()) throw Error(ErrorKind::Parse, fmt::format("{}: no samples", file));
    return table;
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

}  // namespace

PiecewiseConstantInput load_pwc_input(const std::filesystem::path& path) {
    const auto table = read_csv(path, {"s", "xi"});
    const std::string file = path.filename().string();
    PiecewiseConstantInput u;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const std::size_t ln = table.line_numbers[i];
        if (!r[0] || !r[1]) throw Error(ErrorKind::Parse, fmt::format("{}: row {}: empty field", file, ln));
        if (i == 0 && *r[0] != 0.0) {
            throw Error(ErrorKind::Parse, fmt::format("{}: row {}: first breakpoint must be 0", file, ln));
        }
        if (i > 0 && !(*r[0] > u.breakpoints.back())) {
            throw Error(ErrorKind::Parse,
                        fmt::format("{}: row {}: breakpoints must be strictly increasing", file, ln));
        }
        u.breakpoints.push_back(*r[0]);
        if (i + 1 < table.rows.size()) {
            u.values.push_back(*r[1]);
        } else if (*r[1] != 0.0) {
            throw Error(ErrorKind::Parse,
                        fmt::format("{}: row {}: last row ends the input and must have xi = 0", file, ln));
        }
    }
    if (u.values.empty()) {
        throw Error(ErrorKind::Parse, fmt::format("{}: need at least two rows (start and end)", file));
    }
    return u;
}

void save_pwc_input(const PiecewiseConstantInput& u, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::NotFound, "cannot write " + path.string());
    out << "s,xi\n";
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        out << fmt_num(u.breakpoints[i]) << ',' << fmt_num(u.values[i]) << '\n';
    }
    out << fmt_num(u.breakpoints.back()) << ",0\n";
}

Dataset load_dataset(const std::filesystem::path& path, Axis axis,
                     const std::optional<std::filesystem::path>& input_path) {
    const auto table = read_csv(path, {"t", "u", "y"});
    const std::string file = path.filename().string();
    Dataset d;
    d.axis = axis;
    DiscreteInput du;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const std::size_t ln = table.line_numbers[i];
        if (!r[0]) throw Error(ErrorKind::Parse, fmt::format("{}: row {}: missing time", file, ln));
        const double t = *r[0];
        if (t < 0.0) throw Error(ErrorKind::Parse, fmt::format("{}: row {}: negative time", file, ln));
        if (axis == Axis::Discrete) {
            if (!r[1]) throw Error(ErrorKind::Parse, fmt::format("{}: row {}: missing input", file, ln));
            if (t != static_cast<double>(du.samples.size())) {
                if (!du.samples.empty() && t <= static_cast<double>(du.samples.size()) - 1.0) {
                    throw Error(ErrorKind::Parse,
                                fmt::format("{}: row {}: times must be strictly increasing", file, ln));
                }
                throw Error(ErrorKind::Parse,
                            fmt::format("{}: row {}: discrete rows must be consecutive integers from 0",
                                        file, ln));
            }
            du.samples.push_back(*r[1]);
        } else if (!d.sample_times.empty() && !(t > d.sample_times.back())) {
            throw Error(ErrorKind::Parse, fmt::format("{}: row {}: times must be strictly increasing", file, ln));
        }
        if (r[2]) {
            d.sample_times.push_back(t);
            d.outputs.push_back(*r[2]);
        } else if (axis == Axis::Continuous) {
            throw Error(ErrorKind::Parse, fmt::format("{}: row {}: missing output", file, ln));
        }
    }
    if (d.sample_times.empty()) throw Error(ErrorKind::Parse, fmt::format("{}: no samples", file));
    if (axis == Axis::Discrete) {
        d.input = std::move(du);
    } else {
        if (!input_path) {
            throw Error(ErrorKind::Parse, "continuous-time dataset needs a piecewise-constant input file");
        }
        d.input = load_pwc_input(*input_path);
    }
    try {
        d.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Parse, fmt::format("{}: {}", file, e.what()));
    }
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::optional<std::filesystem::path>& input_path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::NotFound, "cannot write " + path.string());
    out << "t,u,y\n";
    if (d.axis == Axis::Discrete) {
        const auto& u = d.discrete_input().samples;
        const long long last = std::max<long long>(static_cast<long long>(u.size()) - 1,
                                                   static_cast<long long>(d.sample_times.back()));
        std::size_t k = 0;
        for (long long t = 0; t <= last; ++t) {
            out << t << ',' << fmt_num(d.discrete_input().at(t)) << ',';
            if (k < d.size() && d.sample_times[k] == static_cast<double>(t)) {
                out << fmt_num(d.outputs[k]);
                ++k;
            }
            out << '\n';
        }
    } else {
        for (std::size_t k = 0; k < d.size(); ++k) {
            out << fmt_num(d.sample_times[k]) << ',' << fmt_num(d.input_at(d.sample_times[k])) << ','
                << fmt_num(d.outputs[k]) << '\n';
        }
        if (input_path) save_pwc_input(d.pwc_input(), *input_path);
    }
}

}  // namespace fdid
