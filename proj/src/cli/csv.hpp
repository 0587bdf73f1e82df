#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softadapt/optimize.hpp"
#include "softadapt/sae.hpp"

namespace softadapt::cli {

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

// iter,x_1..x_d,loss_1..loss_m,alpha_1..alpha_m,eta,tloss,wloss
std::vector<std::string> bench_header(std::size_t dim, std::size_t n_components);
void write_bench_csv(std::ostream& out, const DescentTrace& trace, std::size_t dim, std::size_t n_components);

// epoch,mse,l1,alpha_mse,alpha_l1,tloss
std::vector<std::string> sae_header();
void write_sae_csv(std::ostream& out, const sae::TrainTrace& trace);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws std::invalid_argument when missing.
  std::size_t column(const std::string& name) const;
};

// Parses a numeric CSV with one header line. Throws std::invalid_argument on
// ragged rows or unparseable cells.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

}  // namespace softadapt::cli
