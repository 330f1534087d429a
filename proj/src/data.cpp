#include "llp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace llp {

Dataset::Dataset(Matrix features, std::vector<int> labels, int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (features_.rows() != static_cast<Index>(labels_.size())) {
    throw std::invalid_argument("Dataset: feature/label count mismatch");
  }
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw std::invalid_argument("Dataset: must be non-empty with d >= 1");
  }
  if (num_classes_ < 2) {
    throw std::invalid_argument("Dataset: need at least 2 classes");
  }
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw std::invalid_argument("Dataset: label out of range");
    }
  }
}

double Dataset::label_mean() const {
  long sum = 0;
  for (int y : labels_) sum += y;
  return static_cast<double>(sum) / static_cast<double>(labels_.size());
}

BagCollection::BagCollection(Matrix features, std::vector<BagLabelInfo> infos,
                             std::vector<int> hidden_labels, int k,
                             long dropped)
    : features_(std::move(features)),
      infos_(std::move(infos)),
      hidden_labels_(std::move(hidden_labels)),
      k_(k),
      dropped_(dropped) {
  if (infos_.empty()) throw std::invalid_argument("BagCollection: no bags");
  if (features_.rows() != static_cast<Index>(infos_.size()) * k_) {
    throw std::invalid_argument("BagCollection: row count mismatch");
  }
  if (hidden_labels_.size() != static_cast<std::size_t>(features_.rows())) {
    throw std::invalid_argument("BagCollection: label count mismatch");
  }
}

BagCollection partition_into_bags(const Dataset& ds, int k, bool shuffle,
                                  Rng& rng) {
  if (k < 1) throw std::invalid_argument("partition_into_bags: k must be >= 1");
  const Index n_examples = ds.size();
  const Index n_bags = n_examples / k;
  if (n_bags == 0) {
    throw std::invalid_argument(
        "partition_into_bags: dataset smaller than one bag");
  }
  std::vector<Index> order(static_cast<std::size_t>(n_examples));
  std::iota(order.begin(), order.end(), Index{0});
  if (shuffle) rng.shuffle(order);

  const Index used = n_bags * k;
  Matrix features(used, ds.dim());
  std::vector<int> labels(static_cast<std::size_t>(used));
  for (Index i = 0; i < used; ++i) {
    features.row(i) = ds.x(order[static_cast<std::size_t>(i)]);
    labels[static_cast<std::size_t>(i)] =
        ds.label(order[static_cast<std::size_t>(i)]);
  }

  const int C = ds.num_classes();
  std::vector<BagLabelInfo> infos;
  infos.reserve(static_cast<std::size_t>(n_bags));
  for (Index b = 0; b < n_bags; ++b) {
    Vector counts = Vector::Zero(C);
    for (Index j = 0; j < k; ++j) {
      counts[labels[static_cast<std::size_t>(b * k + j)]] += 1.0;
    }
    infos.emplace_back(k, counts / static_cast<double>(k));
  }
  return BagCollection(std::move(features), std::move(infos), std::move(labels),
                       k, static_cast<long>(n_examples - used));
}

namespace {

[[noreturn]] void parse_fail(std::size_t row, std::size_t col,
                             const std::string& what) {
  std::ostringstream os;
  os << "csv parse error at row " << row << ", column " << col << ": " << what;
  throw std::runtime_error(os.str());
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_numeric(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trimmed(cell);
  if (t.empty()) parse_fail(row, col, "empty cell");
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    parse_fail(row, col, "not a finite number: '" + t + "'");
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const LabelColumn& label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trimmed(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::runtime_error("csv parse error: empty file: " + path);

  std::size_t first_data = 0;
  std::vector<std::string> header;
  if (has_header) {
    header = split_line(lines[0]);
    first_data = 1;
    if (lines.size() == 1) {
      throw std::runtime_error("csv parse error: no data rows in " + path);
    }
  }

  const std::size_t n_cols = split_line(lines[first_data]).size();
  if (n_cols < 2) {
    throw std::runtime_error("csv parse error: need at least 2 columns");
  }

  std::size_t label_idx = 0;
  if (std::holds_alternative<int>(label_column)) {
    int idx = std::get<int>(label_column);
    if (idx < 0) idx += static_cast<int>(n_cols);  // -1 = last column
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_cols) {
      throw std::runtime_error("csv parse error: label column index out of range");
    }
    label_idx = static_cast<std::size_t>(idx);
  } else {
    const std::string& name = std::get<std::string>(label_column);
    if (!has_header) {
      throw std::runtime_error(
          "csv parse error: label column by name requires a header row");
    }
    bool found = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trimmed(header[c]) == name) {
        label_idx = c;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("csv parse error: no column named '" + name + "'");
    }
  }

  const std::size_t n_rows = lines.size() - first_data;
  const Index d = static_cast<Index>(n_cols - 1);
  Matrix features(static_cast<Index>(n_rows), d);
  std::vector<int> labels(n_rows);
  int max_label = 0;

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t file_row = r + first_data + 1;  // 1-based, incl. header
    const auto cells = split_line(lines[r + first_data]);
    if (cells.size() != n_cols) {
      parse_fail(file_row, cells.size(), "ragged row (expected " +
                                             std::to_string(n_cols) + " cells)");
    }
    Index f = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double v = parse_numeric(cells[c], file_row, c + 1);
      if (c == label_idx) {
        if (v < 0.0 || v != std::floor(v) || v > 1e6) {
          parse_fail(file_row, c + 1, "label must be a small non-negative integer");
        }
        labels[r] = static_cast<int>(v);
        max_label = std::max(max_label, labels[r]);
      } else {
        features(static_cast<Index>(r), f++) = v;
      }
    }
  }
  return Dataset(std::move(features), std::move(labels),
                 std::max(max_label + 1, 2));
}

void save_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  for (Index c = 0; c < ds.dim(); ++c) out << "x" << (c + 1) << ",";
  out << "y\n";
  char buf[64];
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index c = 0; c < ds.dim(); ++c) {
      const auto res =
          std::to_chars(buf, buf + sizeof(buf), ds.features()(i, c));
      out.write(buf, res.ptr - buf);
      out.put(',');
    }
    out << ds.label(i) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing csv file: " + path);
}

Dataset gen_uniform_threshold(Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_uniform_threshold: n must be >= 1");
  Matrix features(n, 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform();
    features(i, 0) = x;
    labels[static_cast<std::size_t>(i)] = x <= 0.5 ? 1 : 0;
  }
  return Dataset(std::move(features), std::move(labels), 2);
}

Dataset gen_gaussian_blobs(Index n, int d, double separation,
                           double positive_rate, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_gaussian_blobs: n must be >= 1");
  if (d < 1) throw std::invalid_argument("gen_gaussian_blobs: d must be >= 1");
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) {
    throw std::invalid_argument("gen_gaussian_blobs: rate must be in (0, 1)");
  }
  const double offset = 0.5 * separation / std::sqrt(static_cast<double>(d));
  Matrix features(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int y = rng.bernoulli(positive_rate);
    labels[static_cast<std::size_t>(i)] = y;
    const double center = y == 1 ? offset : -offset;
    for (Index c = 0; c < d; ++c) features(i, c) = center + rng.gaussian();
  }
  return Dataset(std::move(features), std::move(labels), 2);
}

}  // namespace llp
