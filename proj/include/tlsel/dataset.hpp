#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tlsel/errors.hpp"

namespace tlsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Tabular regression dataset with a domain identity. Value-semantic: every
// operation below returns a new dataset and never mutates its input.
struct LabeledDataset {
    std::string domain_id;
    Matrix inputs;   // N x n_in
    Matrix outputs;  // N x n_out
    std::vector<std::string> feature_names;
    std::vector<std::string> output_names;

    Index rows() const { return inputs.rows(); }
    Index n_in() const { return inputs.cols(); }
    Index n_out() const { return outputs.cols(); }

    // Concatenated [x, y] rows, the representation spatial distances act on.
    Matrix joint_rows() const;

    LabeledDataset select_rows(std::span<const std::size_t> indices) const;

    // Enforces: N >= 1, finite entries, matching row counts, unique feature names.
    void validate() const;
};

// Strict CSV ingestion: UTF-8, comma separator, one header row naming
// exactly n_in + n_out columns, '.' decimal point. Rejects NaN/inf cells.
LabeledDataset load_csv(const std::filesystem::path& path, int n_in, int n_out,
                        std::string domain_id);

enum class ProcessKind { DedLbPowder, DedLbWire };

// Raw process parameters of one deposition experiment.
struct ProcessFeatureRow {
    ProcessKind kind = ProcessKind::DedLbPowder;
    double feed_rate = 0.0;         // PFR [g/min] (powder) or WFR [m/min] (wire)
    double speed = 0.0;             // SS [mm/min] (powder) or TS [mm/s] (wire)
    double laser_power = 0.0;       // [W]
    double electrical_power = 0.0;  // [W]; zero for powder
    double density = 0.0;           // material density [g/cm^3]
};

struct CommonFeatures {
    double mfr;  // material feed rate [mm^3/s]
    double ts;   // travel speed [mm/s]
    double ed;   // energy density [J/mm^3]
};

// Maps process-specific raw parameters onto the shared (MFR, TS, ED) space so
// powder and wire datasets become comparable.
CommonFeatures derive_common_features(const ProcessFeatureRow& row);

// Per-column [0,1] scaling fitted over the union of one or more datasets.
// Constant columns are flagged degenerate and scale to 0.
struct ScalingSpec {
    struct Column {
        double min = 0.0;
        double max = 0.0;
        bool degenerate = false;
    };
    std::vector<Column> columns;  // n_in input columns followed by n_out output columns
    int n_in = 0;
    int n_out = 0;
    std::string fitted_on;
};

ScalingSpec fit_unit_scaler(std::span<const LabeledDataset> datasets);
LabeledDataset apply_scaler(const ScalingSpec& spec, const LabeledDataset& ds);
LabeledDataset invert_scaler(const ScalingSpec& spec, const LabeledDataset& ds);
// Inverse map for predictions (output columns only).
Matrix invert_output_scaling(const ScalingSpec& spec, const Matrix& outputs);

LabeledDataset remove_row(const LabeledDataset& ds, Index i);

}  // namespace tlsel
