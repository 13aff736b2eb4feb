// Writes the shifted-cluster fixture CSVs shipped under data/fixtures/.
// Run manually from the repo root after changing fixtures.hpp.

#include <charconv>
#include <fstream>
#include <iostream>

#include "fixtures.hpp"

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv(const std::string& path, const tlsel::LabeledDataset& ds) {
    std::ofstream file(path, std::ios::trunc);
    for (std::size_t c = 0; c < ds.feature_names.size(); ++c)
        file << (c ? "," : "") << ds.feature_names[c];
    for (const auto& name : ds.output_names) file << "," << name;
    file << "\n";
    for (tlsel::Index i = 0; i < ds.rows(); ++i) {
        for (tlsel::Index c = 0; c < ds.n_in(); ++c)
            file << (c ? "," : "") << fmt(ds.inputs(i, c));
        for (tlsel::Index c = 0; c < ds.n_out(); ++c) file << "," << fmt(ds.outputs(i, c));
        file << "\n";
    }
    std::cout << "wrote " << path << " (" << ds.rows() << " rows)\n";
}

}  // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data/fixtures";
    write_csv(dir + "/shifted_cluster_source.csv", tlsel::testing::make_fixture_source());
    write_csv(dir + "/shifted_cluster_target.csv", tlsel::testing::make_fixture_target());
    return 0;
}
