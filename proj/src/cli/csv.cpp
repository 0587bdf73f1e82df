#include "cli/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace softadapt::cli {

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number");
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::vector<std::string> bench_header(std::size_t dim, std::size_t n_components) {
  std::vector<std::string> h{"iter"};
  for (std::size_t i = 1; i <= dim; ++i) h.push_back("x_" + std::to_string(i));
  for (std::size_t k = 1; k <= n_components; ++k) h.push_back("loss_" + std::to_string(k));
  for (std::size_t k = 1; k <= n_components; ++k) h.push_back("alpha_" + std::to_string(k));
  h.insert(h.end(), {"eta", "tloss", "wloss"});
  return h;
}

void write_bench_csv(std::ostream& out, const DescentTrace& trace, std::size_t dim, std::size_t n_components) {
  write_row(out, bench_header(dim, n_components));
  std::vector<std::string> cells;
  for (const DescentRecord& r : trace.records) {
    cells.clear();
    cells.push_back(std::to_string(r.iter));
    for (Eigen::Index i = 0; i < r.x.size(); ++i) cells.push_back(format_number(r.x[i]));
    for (double l : r.losses) cells.push_back(format_number(l));
    for (double a : r.weights.alphas) cells.push_back(format_number(a));
    cells.push_back(format_number(r.eta));
    cells.push_back(format_number(r.true_loss));
    cells.push_back(format_number(r.weighted_loss));
    write_row(out, cells);
  }
}

std::vector<std::string> sae_header() { return {"epoch", "mse", "l1", "alpha_mse", "alpha_l1", "tloss"}; }

void write_sae_csv(std::ostream& out, const sae::TrainTrace& trace) {
  write_row(out, sae_header());
  for (const sae::EpochRecord& r : trace.epochs) {
    write_row(out, {std::to_string(r.epoch), format_number(r.mse), format_number(r.l1_act), format_number(r.alpha_mse),
                    format_number(r.alpha_l1), format_number(r.true_loss)});
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::invalid_argument("trace has no '" + name + "' column");
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw std::invalid_argument("trace is empty or lacks a header");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) row.push_back(parse_cell(c, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace '" + path + "'");
  return parse_csv(in);
}

}  // namespace softadapt::cli
