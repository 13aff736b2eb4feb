#include "tlsel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

namespace tlsel {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || cell.empty() || !std::isfinite(value)) {
        throw NonNumericCellError(row, col, cell);
    }
    return value;
}

}  // namespace

Matrix LabeledDataset::joint_rows() const {
    Matrix joint(rows(), n_in() + n_out());
    joint << inputs, outputs;
    return joint;
}

LabeledDataset LabeledDataset::select_rows(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.domain_id = domain_id;
    out.feature_names = feature_names;
    out.output_names = output_names;
    out.inputs.resize(static_cast<Index>(indices.size()), n_in());
    out.outputs.resize(static_cast<Index>(indices.size()), n_out());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto i = static_cast<Index>(indices[k]);
        if (i < 0 || i >= rows()) throw ShapeError("select_rows: index out of range");
        out.inputs.row(static_cast<Index>(k)) = inputs.row(i);
        out.outputs.row(static_cast<Index>(k)) = outputs.row(i);
    }
    return out;
}

void LabeledDataset::validate() const {
    if (rows() < 1) throw ShapeError("dataset '" + domain_id + "' has no rows");
    if (inputs.rows() != outputs.rows())
        throw ShapeError("dataset '" + domain_id + "': input/output row counts differ");
    if (!inputs.allFinite() || !outputs.allFinite())
        throw NumericError("dataset '" + domain_id + "' contains non-finite entries");
    if (feature_names.size() != static_cast<std::size_t>(n_in()) ||
        output_names.size() != static_cast<std::size_t>(n_out()))
        throw ShapeError("dataset '" + domain_id + "': name counts do not match columns");
    std::set<std::string> unique(feature_names.begin(), feature_names.end());
    if (unique.size() != feature_names.size())
        throw ShapeError("dataset '" + domain_id + "': duplicate feature names");
}

LabeledDataset load_csv(const std::filesystem::path& path, int n_in, int n_out,
                        std::string domain_id) {
    if (n_in < 1 || n_out < 1) throw ConfigError("load_csv: n_in and n_out must be >= 1");
    std::ifstream file(path);
    if (!file) throw DataError("missing file: " + path.string());

    std::string line;
    if (!std::getline(file, line)) throw DataError("empty file: " + path.string());
    auto header = split_csv_line(line);
    const std::size_t n_cols = static_cast<std::size_t>(n_in + n_out);
    if (header.size() != n_cols) {
        throw DataError("column count mismatch in " + path.string() + ": header has " +
                        std::to_string(header.size()) + " columns, expected " +
                        std::to_string(n_cols));
    }

    LabeledDataset ds;
    ds.domain_id = std::move(domain_id);
    for (int c = 0; c < n_in; ++c) ds.feature_names.push_back(trim(header[c]));
    for (int c = 0; c < n_out; ++c) ds.output_names.push_back(trim(header[n_in + c]));

    std::vector<std::vector<double>> values;
    std::size_t row = 0;
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != n_cols) {
            throw DataError("column count mismatch in " + path.string() + " at data row " +
                            std::to_string(row) + ": got " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(n_cols));
        }
        std::vector<double> parsed(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) parsed[c] = parse_cell(cells[c], row, c);
        values.push_back(std::move(parsed));
        ++row;
    }
    if (values.empty()) throw DataError("no data rows in " + path.string());

    const auto n = static_cast<Index>(values.size());
    ds.inputs.resize(n, n_in);
    ds.outputs.resize(n, n_out);
    for (Index i = 0; i < n; ++i) {
        for (int c = 0; c < n_in; ++c) ds.inputs(i, c) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        for (int c = 0; c < n_out; ++c)
            ds.outputs(i, c) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(n_in + c)];
    }
    ds.validate();
    return ds;
}

CommonFeatures derive_common_features(const ProcessFeatureRow& row) {
    if (row.feed_rate <= 0 || row.speed <= 0 || row.laser_power <= 0 || row.density <= 0)
        throw DataError("process parameters must be strictly positive");
    if (row.electrical_power < 0) throw DataError("electrical power must be >= 0");

    CommonFeatures f{};
    if (row.kind == ProcessKind::DedLbPowder) {
        // PFR [g/min] / rho [g/cm^3] -> cm^3/min; x1000/60 -> mm^3/s
        f.mfr = row.feed_rate / row.density * (1000.0 / 60.0);
        f.ts = row.speed / 60.0;
        if (f.mfr == 0.0) throw NumericError("derive_common_features: MFR is zero");
        f.ed = row.laser_power / f.mfr;
    } else {
        // WFR [m/min] x100 -> cm/min; wire cross-section pi * 0.06^2 cm^2; x1000/60 -> mm^3/s
        f.mfr = row.feed_rate * 100.0 * std::numbers::pi * 0.06 * 0.06 * (1000.0 / 60.0);
        f.ts = row.speed;
        if (f.mfr == 0.0) throw NumericError("derive_common_features: MFR is zero");
        f.ed = (row.laser_power + row.electrical_power) / f.mfr;
    }
    return f;
}

ScalingSpec fit_unit_scaler(std::span<const LabeledDataset> datasets) {
    if (datasets.empty()) throw ShapeError("fit_unit_scaler: no datasets");
    const Index n_in = datasets[0].n_in();
    const Index n_out = datasets[0].n_out();
    ScalingSpec spec;
    spec.n_in = static_cast<int>(n_in);
    spec.n_out = static_cast<int>(n_out);
    spec.columns.assign(static_cast<std::size_t>(n_in + n_out), {});

    bool first = true;
    for (const auto& ds : datasets) {
        if (ds.n_in() != n_in || ds.n_out() != n_out)
            throw ShapeError("fit_unit_scaler: datasets disagree on column counts");
        if (ds.rows() < 1) throw ShapeError("fit_unit_scaler: empty dataset");
        Matrix joint = ds.joint_rows();
        for (Index c = 0; c < joint.cols(); ++c) {
            auto& col = spec.columns[static_cast<std::size_t>(c)];
            const double lo = joint.col(c).minCoeff();
            const double hi = joint.col(c).maxCoeff();
            if (first) {
                col.min = lo;
                col.max = hi;
            } else {
                col.min = std::min(col.min, lo);
                col.max = std::max(col.max, hi);
            }
        }
        if (!spec.fitted_on.empty()) spec.fitted_on += "+";
        spec.fitted_on += ds.domain_id;
        first = false;
    }
    for (auto& col : spec.columns) col.degenerate = (col.min == col.max);
    return spec;
}

namespace {

double scale_value(const ScalingSpec::Column& col, double v) {
    if (col.degenerate) return 0.0;
    return (v - col.min) / (col.max - col.min);
}

double unscale_value(const ScalingSpec::Column& col, double v) {
    if (col.degenerate) return col.min;
    return v * (col.max - col.min) + col.min;
}

void check_spec_shape(const ScalingSpec& spec, const LabeledDataset& ds) {
    if (ds.n_in() != spec.n_in || ds.n_out() != spec.n_out)
        throw ShapeError("scaler/dataset column counts differ");
}

}  // namespace

LabeledDataset apply_scaler(const ScalingSpec& spec, const LabeledDataset& ds) {
    check_spec_shape(spec, ds);
    LabeledDataset out = ds;
    for (Index c = 0; c < ds.n_in(); ++c) {
        const auto& col = spec.columns[static_cast<std::size_t>(c)];
        for (Index i = 0; i < ds.rows(); ++i) out.inputs(i, c) = scale_value(col, ds.inputs(i, c));
    }
    for (Index c = 0; c < ds.n_out(); ++c) {
        const auto& col = spec.columns[static_cast<std::size_t>(spec.n_in + c)];
        for (Index i = 0; i < ds.rows(); ++i)
            out.outputs(i, c) = scale_value(col, ds.outputs(i, c));
    }
    return out;
}

LabeledDataset invert_scaler(const ScalingSpec& spec, const LabeledDataset& ds) {
    check_spec_shape(spec, ds);
    LabeledDataset out = ds;
    for (Index c = 0; c < ds.n_in(); ++c) {
        const auto& col = spec.columns[static_cast<std::size_t>(c)];
        for (Index i = 0; i < ds.rows(); ++i)
            out.inputs(i, c) = unscale_value(col, ds.inputs(i, c));
    }
    for (Index c = 0; c < ds.n_out(); ++c) {
        const auto& col = spec.columns[static_cast<std::size_t>(spec.n_in + c)];
        for (Index i = 0; i < ds.rows(); ++i)
            out.outputs(i, c) = unscale_value(col, ds.outputs(i, c));
    }
    return out;
}

Matrix invert_output_scaling(const ScalingSpec& spec, const Matrix& outputs) {
    if (outputs.cols() != spec.n_out)
        throw ShapeError("invert_output_scaling: column count mismatch");
    Matrix out = outputs;
    for (Index c = 0; c < outputs.cols(); ++c) {
        const auto& col = spec.columns[static_cast<std::size_t>(spec.n_in + c)];
        for (Index i = 0; i < outputs.rows(); ++i) out(i, c) = unscale_value(col, outputs(i, c));
    }
    return out;
}

LabeledDataset remove_row(const LabeledDataset& ds, Index i) {
    if (i < 0 || i >= ds.rows()) throw ShapeError("remove_row: row index out of range");
    LabeledDataset out;
    out.domain_id = ds.domain_id;
    out.feature_names = ds.feature_names;
    out.output_names = ds.output_names;
    const Index n = ds.rows();
    out.inputs.resize(n - 1, ds.n_in());
    out.outputs.resize(n - 1, ds.n_out());
    out.inputs.topRows(i) = ds.inputs.topRows(i);
    out.outputs.topRows(i) = ds.outputs.topRows(i);
    out.inputs.bottomRows(n - 1 - i) = ds.inputs.bottomRows(n - 1 - i);
    out.outputs.bottomRows(n - 1 - i) = ds.outputs.bottomRows(n - 1 - i);
    return out;
}

}  // namespace tlsel
