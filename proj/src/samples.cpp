#include "hpdet/samples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"

namespace hpdet {

void SampleMatrix::set_q(std::vector<double> q) {
  require(q.empty() || q.size() == n_, "q values have length ", q.size(),
          " but the matrix has ", n_, " rows");
  q_ = std::move(q);
}

void SampleMatrix::validate() const {
  require(n_ >= 1, "sample matrix must have at least one row");
  require(d_ >= 1, "sample matrix must have at least one dimension");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      require(std::isfinite((*this)(i, j)), "non-finite sample value at row ",
              i + 1, " col ", j + 1);
    }
  }
  if (!q_.empty()) {
    require(q_.size() == n_, "q length ", q_.size(), " does not match n ", n_);
    for (std::size_t i = 0; i < n_; ++i) {
      require(std::isfinite(q_[i]) && q_[i] >= 0.0,
              "q value at row ", i + 1, " must be finite and >= 0, got ",
              q_[i]);
    }
  }
}

namespace {

void split_line(const std::string& line, std::vector<std::string>& cells) {
  cells.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    std::string cell = line.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    // trim surrounding whitespace
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string()
                                           : cell.substr(b, e - b + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + cell.size();
}

}  // namespace

SampleMatrix load_samples(const std::string& path, const LoadOptions& opt) {
  std::ifstream in(path);
  require(in.good(), "cannot open sample file '", path, "'");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> cells;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_row = 0;
  std::size_t ncols = 0;
  bool header_checked = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    split_line(line, cells);

    if (!header_checked) {
      header_checked = true;
      double tmp;
      bool any_numeric = false;
      for (const auto& c : cells) any_numeric = any_numeric || parse_double(c, tmp);
      if (!any_numeric) continue;  // header row (all cells non-numeric)
    }

    ++data_row;
    if (ncols == 0) {
      ncols = cells.size();
    } else {
      require(cells.size() == ncols, path, ": row ", data_row, " has ",
              cells.size(), " columns, expected ", ncols);
    }
    std::vector<double> row(ncols);
    for (std::size_t j = 0; j < ncols; ++j) {
      require(parse_double(cells[j], row[j]), path, ": row ", data_row,
              " col ", j + 1, ": cannot parse '", cells[j], "' as a number");
    }
    rows.push_back(std::move(row));
  }

  require(!rows.empty(), path, ": no data rows");
  if (opt.q_in_last_column) {
    require(ncols >= 2, path,
            ": q column requested but rows have a single column");
  }

  std::size_t d = opt.q_in_last_column ? ncols - 1 : ncols;
  SampleMatrix out(rows.size(), d);
  std::vector<double> q;
  if (opt.q_in_last_column) q.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out(i, j) = rows[i][j];
    if (opt.q_in_last_column) q[i] = rows[i][d];
  }
  if (opt.q_in_last_column) out.set_q(std::move(q));
  out.validate();
  return out;
}

void save_csv(const SampleMatrix& samples, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open '", path, "' for writing");
  out.precision(17);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t j = 0; j < samples.dims(); ++j) {
      if (j) out << ',';
      out << samples(i, j);
    }
    if (samples.has_q()) out << ',' << samples.q_at(i);
    out << '\n';
  }
  require(out.good(), "write to '", path, "' failed");
}

std::pair<SampleMatrix, SampleMatrix> split_train_test(
    const SampleMatrix& samples, std::size_t n_train, std::uint64_t seed,
    bool allow_empty_train) {
  const std::size_t n = samples.rows();
  require(n_train < n, "n_train (", n_train, ") must be smaller than n (", n,
          ")");
  require(allow_empty_train || n_train >= 1, "n_train must be at least 1");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);

  auto take = [&](std::size_t begin, std::size_t end) {
    SampleMatrix part(end - begin, samples.dims());
    std::vector<double> q;
    if (samples.has_q()) q.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < samples.dims(); ++j)
        part(i - begin, j) = samples(idx[i], j);
      if (samples.has_q()) q[i - begin] = samples.q_at(idx[i]);
    }
    if (samples.has_q()) part.set_q(std::move(q));
    return part;
  };

  return {take(0, n_train), take(n_train, n)};
}

}  // namespace hpdet
