// TSV and JSON serialization for every pipeline object. All writers are
// atomic (temp file + rename) and print doubles in shortest round-trip
// form, so write-then-read reproduces the in-memory object exactly.
//
// Formats:
//   features      header `gene<TAB>f1<TAB>...`, then one row per gene; NA
//                 marks a missing value
//   network       `gene_a<TAB>gene_b<TAB>weight` per edge; a single-token
//                 line declares a gene without edges (writers declare all
//                 genes first so gene order survives the round trip)
//   hierarchy     `parent<TAB>child` per edge; a single-token line
//                 declares an isolated category
//   annotations   `gene<TAB>category[<TAB>evidence]`; evidence is only
//                 consulted for IEA filtering
//   bias          `gene<TAB>category<TAB>bias`, gene-major
//   scores        `category<TAB>gene<TAB>score`, category-major
//   report        JSON with records and aggregates; records TSV;
//                 cumulative TSV `percentile<TAB>error`
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hierprop/error.hpp"
#include "hierprop/eval.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/netbuild.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

namespace detail {

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <typename WriteBody>
void atomic_write(const std::string& path, WriteBody&& body) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp =
      target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    body(out);
    out.flush();
    if (!out) {
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    throw IoError("cannot move '" + tmp.string() + "' to '" + path +
                  "': " + ec.message());
  }
}

inline void bad_line(const std::string& path, std::size_t lineno,
                     const std::string& what) {
  throw InvalidInputError(path + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace detail

inline FeatureMatrix read_features(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) {
    throw InvalidInputError(path + ": empty feature file");
  }
  const std::vector<std::string> header = detail::split_tabs(lines[0]);
  if (header.size() < 2) {
    detail::bad_line(path, 1, "feature header needs at least one column");
  }
  const int p = static_cast<int>(header.size()) - 1;
  std::vector<std::string> gene_ids;
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_tabs(lines[i]);
    if (static_cast<int>(f.size()) != p + 1) {
      detail::bad_line(path, i + 1, "expected " + std::to_string(p + 1) +
                                        " columns, got " +
                                        std::to_string(f.size()));
    }
    gene_ids.push_back(f[0]);
    for (int k = 1; k <= p; ++k) {
      values.push_back(f[k] == "NA"
                           ? std::numeric_limits<double>::quiet_NaN()
                           : parse_double(f[k], path + " value"));
    }
  }
  const int n = static_cast<int>(gene_ids.size());
  Eigen::MatrixXd m(n, p);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) m(i, k) = values[i * p + k];
  }
  return FeatureMatrix(std::move(gene_ids), std::move(m));
}

inline void write_features(const std::string& path,
                           const FeatureMatrix& features) {
  detail::atomic_write(path, [&](std::ostream& out) {
    out << "gene";
    for (int k = 0; k < features.n_features(); ++k) out << "\tf" << (k + 1);
    out << "\n";
    for (int i = 0; i < features.n_genes(); ++i) {
      out << features.gene_ids()[i];
      for (int k = 0; k < features.n_features(); ++k) {
        const double v = features.values()(i, k);
        out << '\t' << (std::isnan(v) ? "NA" : format_double(v));
      }
      out << "\n";
    }
  });
}

inline SparseNetwork read_network(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::vector<std::string> gene_ids;
  std::set<std::string> seen;
  auto declare = [&](const std::string& id) {
    if (seen.insert(id).second) gene_ids.push_back(id);
  };
  struct RawEdge {
    std::string a;
    std::string b;
    double w;
  };
  std::vector<RawEdge> raw;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_tabs(lines[i]);
    if (f.size() == 1) {
      declare(f[0]);
    } else if (f.size() == 3) {
      declare(f[0]);
      declare(f[1]);
      raw.push_back({f[0], f[1], parse_double(f[2], path + " weight")});
    } else {
      detail::bad_line(path, i + 1, "expected 1 or 3 columns");
    }
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < gene_ids.size(); ++i) {
    index[gene_ids[i]] = static_cast<int>(i);
  }
  std::vector<Edge> edges;
  for (const RawEdge& e : raw) {
    edges.push_back({index.at(e.a), index.at(e.b), e.w});
  }
  return SparseNetwork::from_edges(gene_ids, edges);
}

inline void write_network(const std::string& path, const SparseNetwork& net) {
  detail::atomic_write(path, [&](std::ostream& out) {
    for (const std::string& g : net.gene_ids()) out << g << "\n";
    for (const Edge& e : net.edges()) {
      out << net.gene_ids()[e.i] << '\t' << net.gene_ids()[e.j] << '\t'
          << format_double(e.weight) << "\n";
    }
  });
}

inline Hierarchy read_hierarchy(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::string> declared;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_tabs(lines[i]);
    if (f.size() == 1) {
      declared.push_back(f[0]);
    } else if (f.size() == 2) {
      edges.emplace_back(f[0], f[1]);
    } else {
      detail::bad_line(path, i + 1, "expected 1 or 2 columns");
    }
  }
  return Hierarchy::from_edges(edges, declared);
}

inline void write_hierarchy(const std::string& path, const Hierarchy& h) {
  detail::atomic_write(path, [&](std::ostream& out) {
    std::vector<char> linked(h.size(), 0);
    for (const auto& [m, c] : h.edges()) {
      linked[m] = 1;
      linked[c] = 1;
      out << h.category_ids()[m] << '\t' << h.category_ids()[c] << "\n";
    }
    for (int c = 0; c < h.size(); ++c) {
      if (!linked[c]) out << h.category_ids()[c] << "\n";
    }
  });
}

inline AnnotationSet read_annotations(const std::string& path,
                                      bool drop_iea = false) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = detail::split_tabs(lines[i]);
    if (f.size() != 2 && f.size() != 3) {
      detail::bad_line(path, i + 1, "expected 2 or 3 columns");
    }
    if (drop_iea && f.size() == 3 && f[2] == "IEA") continue;
    pairs.emplace(f[0], f[1]);
  }
  return AnnotationSet::from_pairs(std::move(pairs));
}

inline void write_annotations(const std::string& path,
                              const AnnotationSet& ann) {
  detail::atomic_write(path, [&](std::ostream& out) {
    for (const auto& [gene, category] : ann.pairs()) {
      out << gene << '\t' << category << "\n";
    }
  });
}

namespace detail {

// Shared reader for the two triplet matrix formats. Outer ids appear in
// file order; the full outer x inner rectangle must be present, each cell
// exactly once.
struct TripletMatrix {
  std::vector<std::string> outer_ids;
  std::vector<std::string> inner_ids;
  Eigen::MatrixXd values;  // outer x inner
};

inline TripletMatrix read_triplet_matrix(const std::string& path,
                                         const char* kind) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<std::string> outer_ids, inner_ids;
  std::map<std::string, int> outer_index, inner_index;
  struct Cell {
    int o;
    int i;
    double v;
  };
  std::vector<Cell> cells;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const std::vector<std::string> f = split_tabs(lines[l]);
    if (f.size() != 3) {
      bad_line(path, l + 1, std::string(kind) + ": expected 3 columns");
    }
    auto intern = [](const std::string& id, std::vector<std::string>& ids,
                     std::map<std::string, int>& index) {
      auto [it, fresh] = index.emplace(id, static_cast<int>(ids.size()));
      if (fresh) ids.push_back(id);
      return it->second;
    };
    cells.push_back({intern(f[0], outer_ids, outer_index),
                     intern(f[1], inner_ids, inner_index),
                     parse_double(f[2], path + " value")});
  }
  const int no = static_cast<int>(outer_ids.size());
  const int ni = static_cast<int>(inner_ids.size());
  if (static_cast<long>(no) * ni != static_cast<long>(cells.size())) {
    throw InvalidInputError(path + ": " + kind + " matrix is not complete (" +
                            std::to_string(cells.size()) + " cells for " +
                            std::to_string(no) + " x " + std::to_string(ni) +
                            ")");
  }
  Eigen::MatrixXd m(no, ni);
  std::vector<char> filled(cells.size(), 0);
  for (const Cell& c : cells) {
    const std::size_t slot = static_cast<std::size_t>(c.o) * ni + c.i;
    if (filled[slot]) {
      throw InvalidInputError(path + ": duplicate " + kind + " entry for (" +
                              outer_ids[c.o] + ", " + inner_ids[c.i] + ")");
    }
    filled[slot] = 1;
    m(c.o, c.i) = c.v;
  }
  return {std::move(outer_ids), std::move(inner_ids), std::move(m)};
}

}  // namespace detail

/// Scores TSV, category-major: one `category<TAB>gene<TAB>score` line per
/// cell.
inline DiscriminantMatrix read_scores(const std::string& path) {
  detail::TripletMatrix t = detail::read_triplet_matrix(path, "score");
  return {std::move(t.inner_ids), std::move(t.outer_ids),
          t.values.transpose()};
}

inline void write_scores(const std::string& path,
                         const DiscriminantMatrix& scores) {
  detail::atomic_write(path, [&](std::ostream& out) {
    for (std::size_t c = 0; c < scores.category_ids.size(); ++c) {
      for (std::size_t g = 0; g < scores.gene_ids.size(); ++g) {
        out << scores.category_ids[c] << '\t' << scores.gene_ids[g] << '\t'
            << format_double(scores.scores(g, c)) << "\n";
      }
    }
  });
}

/// Bias TSV, gene-major: one `gene<TAB>category<TAB>bias` line per cell.
inline LabelBiasMatrix read_bias(const std::string& path) {
  detail::TripletMatrix t = detail::read_triplet_matrix(path, "bias");
  return {std::move(t.outer_ids), std::move(t.inner_ids),
          std::move(t.values)};
}

inline void write_bias(const std::string& path, const LabelBiasMatrix& bias) {
  detail::atomic_write(path, [&](std::ostream& out) {
    for (std::size_t g = 0; g < bias.gene_ids.size(); ++g) {
      for (std::size_t c = 0; c < bias.category_ids.size(); ++c) {
        out << bias.gene_ids[g] << '\t' << bias.category_ids[c] << '\t'
            << format_double(bias.values(g, c)) << "\n";
      }
    }
  });
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const EvalRecord& r : report.records) {
    j["records"].push_back({{"category", r.category_id},
                            {"n_pos", r.n_pos},
                            {"auc_roc", r.auc},
                            {"error", r.error},
                            {"auprc", r.auprc}});
  }
  j["skipped"] = report.skipped;
  j["n_categories"] = report.records.size();
  j["mean_error"] = report.mean_error;
  j["median_error"] = report.median_error;
  j["standard_error"] = report.standard_error;
  j["buckets"] = nlohmann::json::array();
  for (const BucketSummary& b : report.buckets) {
    nlohmann::json jb{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}};
    if (b.count > 0) {
      jb["mean_error"] = b.mean_error;
    } else {
      jb["mean_error"] = nullptr;
    }
    j["buckets"].push_back(jb);
  }
  j["cumulative"] = nlohmann::json::array();
  for (const CumulativePoint& p : report.cumulative) {
    j["cumulative"].push_back({p.percentile, p.error});
  }
  return j;
}

inline void write_report_json(const std::string& path,
                              const EvalReport& report) {
  detail::atomic_write(path, [&](std::ostream& out) {
    out << report_to_json(report).dump(2) << "\n";
  });
}

inline void write_report_tsv(const std::string& path,
                             const EvalReport& report) {
  detail::atomic_write(path, [&](std::ostream& out) {
    out << "category\tn_pos\tauc_roc\terror\tauprc\n";
    for (const EvalRecord& r : report.records) {
      out << r.category_id << '\t' << r.n_pos << '\t' << format_double(r.auc)
          << '\t' << format_double(r.error) << '\t' << format_double(r.auprc)
          << "\n";
    }
  });
}

inline void write_cumulative_tsv(const std::string& path,
                                 const EvalReport& report) {
  detail::atomic_write(path, [&](std::ostream& out) {
    for (const CumulativePoint& p : report.cumulative) {
      out << format_double(p.percentile) << '\t' << format_double(p.error)
          << "\n";
    }
  });
}

}  // namespace hierprop
