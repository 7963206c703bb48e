#include "osgood/graph_io.hpp"

#include "osgood/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace osgood::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_number(const std::string& text, std::size_t line, const char* what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InputError(std::string("malformed ") + what + " '" + text + "'", line);
  }
  return value;
}

// Reads a header-checked CSV, calling row(fields, line) for each data row.
template <typename Row>
void read_csv(std::istream& in, const std::vector<std::string>& header, Row&& row) {
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty() || trim(line).front() == '#') {
      continue;
    }
    const auto fields = split(line);
    if (!have_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) {
          expected += (expected.empty() ? "" : ",") + h;
        }
        throw InputError("expected header '" + expected + "'", number);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw InputError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       number);
    }
    row(fields, number);
  }
  if (!have_header) {
    throw InputError("empty file (missing header)");
  }
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  return in;
}

}  // namespace

WeightedGraph read_graph(std::istream& edges_in, std::istream* measure_in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, Index> index;
  const auto intern = [&](const std::string& label, std::size_t line) {
    if (label.empty()) {
      throw InputError("empty vertex id", line);
    }
    const auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) {
      labels.push_back(label);
    }
    return it->second;
  };

  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;
  read_csv(edges_in, {"src", "dst", "weight"}, [&](const auto& f, std::size_t line) {
    const double w = parse_number(f[2], line, "weight");
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InputError("edge weight must be nonnegative and finite", line);
    }
    const Index u = intern(f[0], line);
    const Index v = intern(f[1], line);
    if (u == v) {
      throw InputError("self loop on '" + f[0] + "'", line);
    }
    edges.push_back({u, v, w});
    edge_lines.push_back(line);
  });

  std::vector<std::pair<Index, double>> masses;
  if (measure_in != nullptr) {
    read_csv(*measure_in, {"vertex", "mass"}, [&](const auto& f, std::size_t line) {
      const double m = parse_number(f[1], line, "mass");
      if (!(m > 0.0) || !std::isfinite(m)) {
        throw InputError("mass must be positive and finite", line);
      }
      masses.emplace_back(intern(f[0], line), m);
    });
  }

  Vector measure = Vector::Ones(static_cast<Eigen::Index>(labels.size()));
  for (const auto& [v, m] : masses) {
    measure[static_cast<Eigen::Index>(v)] = m;
  }

  // Surface duplicate edges with their line numbers before the graph check.
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Index a = std::min(edges[i].u, edges[i].v);
    const Index b = std::max(edges[i].u, edges[i].v);
    const std::string key = std::to_string(a) + ":" + std::to_string(b);
    if (const auto [it, inserted] = seen.emplace(key, edge_lines[i]); !inserted) {
      throw InputError("edge '" + labels[a] + "'-'" + labels[b] + "' already listed on line " +
                           std::to_string(it->second),
                       edge_lines[i]);
    }
  }
  return WeightedGraph(std::move(labels), edges, std::move(measure));
}

WeightedGraph read_graph(const std::filesystem::path& edges,
                         const std::optional<std::filesystem::path>& measure) {
  auto edges_in = open(edges);
  if (measure) {
    auto measure_in = open(*measure);
    return read_graph(edges_in, &measure_in);
  }
  return read_graph(edges_in, nullptr);
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << "src,dst,weight\n" << std::setprecision(17);
  for (const Edge& e : g.edges()) {
    out << g.label(e.u) << ',' << g.label(e.v) << ',' << e.weight << '\n';
  }
}

void write_measure(std::ostream& out, const WeightedGraph& g) {
  out << "vertex,mass\n" << std::setprecision(17);
  for (Index x = 0; x < g.size(); ++x) {
    out << g.label(x) << ',' << g.measure()[static_cast<Eigen::Index>(x)] << '\n';
  }
}

Vector read_vertex_values(std::istream& in, const WeightedGraph& g, double fill) {
  Vector values = Vector::Constant(static_cast<Eigen::Index>(g.size()), fill);
  read_csv(in, {"vertex", "value"}, [&](const auto& f, std::size_t line) {
    const auto x = g.find(f[0]);
    if (!x) {
      throw InputError("unknown vertex '" + f[0] + "'", line);
    }
    values[static_cast<Eigen::Index>(*x)] = parse_number(f[1], line, "value");
  });
  return values;
}

Vector read_vertex_values(const std::filesystem::path& path, const WeightedGraph& g, double fill) {
  auto in = open(path);
  return read_vertex_values(in, g, fill);
}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(std::istream& in,
                                                                     const std::string& first,
                                                                     const std::string& second) {
  std::vector<double> a;
  std::vector<double> b;
  read_csv(in, {first, second}, [&](const auto& f, std::size_t line) {
    a.push_back(parse_number(f[0], line, first.c_str()));
    b.push_back(parse_number(f[1], line, second.c_str()));
    if (a.size() > 1 && !(a.back() > a[a.size() - 2])) {
      throw InputError("column '" + first + "' must be strictly increasing", line);
    }
  });
  return {std::move(a), std::move(b)};
}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(
    const std::filesystem::path& path, const std::string& first, const std::string& second) {
  auto in = open(path);
  return read_two_columns(in, first, second);
}

}  // namespace osgood::io
