#include "splitplot/csv.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace splitplot {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    fields.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void expect_header(const std::vector<std::string>& fields,
                   const std::vector<std::string>& expected,
                   const char* what) {
  if (fields != expected) {
    throw std::runtime_error(std::string(what) + ": unexpected CSV header");
  }
}

double parse_double(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(what) + ": bad numeric field '" +
                             text + "'");
  }
}

long parse_long(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string(what) + ": bad integer field '" +
                             text + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_pom_csv(std::ostream& out, const PotentialOutcomeMatrix& pom) {
  out << "whole_plot,sub_plot,y1,y2,y3,y4\n";
  const int M = pom.layout.subplots_per_plot;
  for (int w = 0; w < pom.layout.whole_plots; ++w) {
    for (int m = 0; m < M; ++m) {
      const int i = pom.layout.unit_index(w, m);
      out << (w + 1) << ',' << (m + 1);
      for (int k = 0; k < kNumTreatments; ++k) {
        out << ',' << format_double(pom.values(i, k));
      }
      out << '\n';
    }
  }
}

PotentialOutcomeMatrix read_pom_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("POM CSV: empty input");
  }
  expect_header(split_line(line),
                {"whole_plot", "sub_plot", "y1", "y2", "y3", "y4"}, "POM CSV");

  std::map<std::pair<long, long>, Eigen::Vector4d> rows;
  long max_w = 0;
  long max_m = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != 6) {
      throw std::runtime_error("POM CSV: expected 6 fields per row");
    }
    const long w = parse_long(fields[0], "POM CSV");
    const long m = parse_long(fields[1], "POM CSV");
    if (w < 1 || m < 1) {
      throw std::runtime_error("POM CSV: plot indices are 1-based");
    }
    Eigen::Vector4d y;
    for (int k = 0; k < kNumTreatments; ++k) {
      y(k) = parse_double(fields[2 + k], "POM CSV");
    }
    if (!rows.emplace(std::make_pair(w, m), y).second) {
      throw std::runtime_error("POM CSV: duplicate (whole_plot, sub_plot) row");
    }
    max_w = std::max(max_w, w);
    max_m = std::max(max_m, m);
  }
  if (max_w < 2 || max_m < 2) {
    throw std::runtime_error("POM CSV: need at least 2 whole-plots of 2 units");
  }
  const BlockLayout layout(static_cast<int>(max_w), static_cast<int>(max_m));
  if (rows.size() != static_cast<std::size_t>(layout.units())) {
    throw std::runtime_error("POM CSV: missing rows for a full W x M grid");
  }
  Eigen::MatrixXd values(layout.units(), kNumTreatments);
  for (const auto& [key, y] : rows) {
    const int i = layout.unit_index(static_cast<int>(key.first) - 1,
                                    static_cast<int>(key.second) - 1);
    values.row(i) = y.transpose();
  }
  return PotentialOutcomeMatrix(layout, std::move(values));
}

void write_assignment_csv(std::ostream& out, const Assignment& assignment,
                          const BlockLayout& layout) {
  if (assignment.units != layout.units()) {
    throw std::invalid_argument("write_assignment_csv: size mismatch");
  }
  out << "whole_plot,sub_plot,level_A,level_B,treatment\n";
  for (int w = 0; w < layout.whole_plots; ++w) {
    for (int m = 0; m < layout.subplots_per_plot; ++m) {
      const int i = layout.unit_index(w, m);
      const int t = assignment.treatment[i];
      out << (w + 1) << ',' << (m + 1) << ',' << level_a(t) << ','
          << level_b(t) << ',' << t << '\n';
    }
  }
}

void write_observed_csv(std::ostream& out, const ObservedData& data) {
  out << "whole_plot,sub_plot,treatment,y_obs\n";
  for (int w = 0; w < data.layout.whole_plots; ++w) {
    for (int m = 0; m < data.layout.subplots_per_plot; ++m) {
      const int i = data.layout.unit_index(w, m);
      out << (w + 1) << ',' << (m + 1) << ',' << data.assignment.treatment[i]
          << ',' << format_double(data.outcomes(i)) << '\n';
    }
  }
}

ObservedData read_observed_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("observed CSV: empty input");
  }
  expect_header(split_line(line),
                {"whole_plot", "sub_plot", "treatment", "y_obs"},
                "observed CSV");

  struct Row {
    int treatment;
    double outcome;
  };
  std::map<std::pair<long, long>, Row> rows;
  long max_w = 0;
  long max_m = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != 4) {
      throw std::runtime_error("observed CSV: expected 4 fields per row");
    }
    const long w = parse_long(fields[0], "observed CSV");
    const long m = parse_long(fields[1], "observed CSV");
    const long t = parse_long(fields[2], "observed CSV");
    if (w < 1 || m < 1) {
      throw std::runtime_error("observed CSV: plot indices are 1-based");
    }
    if (t < 1 || t > kNumTreatments) {
      throw std::runtime_error("observed CSV: treatment must be 1..4");
    }
    const double y = parse_double(fields[3], "observed CSV");
    if (!rows.emplace(std::make_pair(w, m),
                      Row{static_cast<int>(t), y})
             .second) {
      throw std::runtime_error("observed CSV: duplicate row");
    }
    max_w = std::max(max_w, w);
    max_m = std::max(max_m, m);
  }
  if (max_w < 2 || max_m < 2) {
    throw std::runtime_error(
        "observed CSV: need at least 2 whole-plots of 2 units");
  }
  const BlockLayout layout(static_cast<int>(max_w), static_cast<int>(max_m));
  if (rows.size() != static_cast<std::size_t>(layout.units())) {
    throw std::runtime_error("observed CSV: missing rows for the full grid");
  }
  Assignment assignment;
  assignment.units = layout.units();
  assignment.treatment.assign(assignment.units, 0);
  assignment.layout = layout;
  Eigen::VectorXd outcomes(layout.units());
  for (const auto& [key, row] : rows) {
    const int i = layout.unit_index(static_cast<int>(key.first) - 1,
                                    static_cast<int>(key.second) - 1);
    assignment.treatment[i] = row.treatment;
    outcomes(i) = row.outcome;
  }
  return make_observed_data(layout, std::move(assignment),
                            std::move(outcomes));
}

void write_estimate_csv(std::ostream& out, const EffectEstimate& estimate) {
  out << "effect,method,tau_hat,v_hat,ci_lo,ci_hi,alpha\n";
  for (int f = 0; f < kNumEffects; ++f) {
    out << effect_name(static_cast<Effect>(f)) << ','
        << design_name(estimate.method) << ','
        << format_double(estimate.tau_hat(f)) << ','
        << format_double(estimate.v_hat(f)) << ','
        << format_double(estimate.ci.lower(f)) << ','
        << format_double(estimate.ci.upper(f)) << ','
        << format_double(estimate.alpha) << '\n';
  }
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
  out << "po_type,additivity,effect,method,coverage,mean_width,tau_true,"
         "reps,W,M,alpha,seed\n";
  for (const CoverageRow& row : report.rows) {
    out << po_type_name(row.po_type) << ',' << additivity_name(row.additivity)
        << ',' << effect_name(row.effect) << ',' << design_name(row.method)
        << ',' << format_double(row.coverage) << ','
        << format_double(row.mean_width) << ','
        << format_double(row.tau_true) << ',' << row.replications << ','
        << row.whole_plots << ',' << row.subplots_per_plot << ','
        << format_double(row.alpha) << ',' << row.seed << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open output file: " + tmp.string());
    }
    writer(out);
    out.flush();
    if (!out) {
      throw std::runtime_error("failed writing output file: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace splitplot
