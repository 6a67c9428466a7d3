#include "semloss/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

namespace semloss {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    case Split::Unlabeled: return "unlabeled";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  if (s == "unlabeled") return Split::Unlabeled;
  throw InputError("unknown split tag '" + s + "'");
}

std::vector<std::size_t> Dataset::rows(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

Dataset Dataset::subset(Split s) const {
  auto idx = rows(s);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  d.labels.resize(static_cast<Eigen::Index>(idx.size()), labels.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    d.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
    d.labels.row(static_cast<Eigen::Index>(i)) = labels.row(static_cast<Eigen::Index>(idx[i]));
  }
  d.split.assign(idx.size(), s);
  d.provenance = provenance;
  return d;
}

State Dataset::label_state(std::size_t row) const {
  State s(static_cast<std::size_t>(labels.cols()));
  for (std::size_t j = 0; j < s.size(); ++j)
    s[j] = labels(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) > 0.5;
  return s;
}

namespace {

void assign_splits(Dataset& d, const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  const std::size_t n_train = n * 6 / 10, n_valid = n * 2 / 10;
  d.split.assign(n, Split::Test);
  for (std::size_t k = 0; k < n; ++k)
    d.split[order[k]] = k < n_train ? Split::Train : (k < n_train + n_valid ? Split::Valid : Split::Test);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

Evidence grid_endpoint_evidence(const GridSpec& g, const Eigen::RowVectorXd& features) {
  if (static_cast<std::size_t>(features.size()) < g.num_nodes())
    throw InputError("grid feature row shorter than the node count");
  Evidence e;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) e[g.node_var(v)] = features[static_cast<Eigen::Index>(v)] > 0.5;
  return e;
}

Dataset gen_grid_dataset(const GridSpec& g, std::size_t count, std::uint64_t seed, const Circuit* check) {
  const std::size_t nv = g.num_nodes(), ne = g.num_edges();
  const std::size_t n_removed = ne / 3;
  std::mt19937_64 rng(seed);

  Dataset d;
  d.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(nv + ne));
  d.labels = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(ne));

  std::vector<std::size_t> edge_ids(ne);
  const std::size_t budget = 1000 * std::max<std::size_t>(count, 1);
  std::size_t made = 0, attempts = 0;
  while (made < count) {
    if (++attempts > budget)
      throw ComputeError("grid generator produced only " + std::to_string(made) + " of " + std::to_string(count) +
                         " examples within the retry budget");
    std::iota(edge_ids.begin(), edge_ids.end(), 0);
    std::shuffle(edge_ids.begin(), edge_ids.end(), rng);
    std::vector<bool> removed(ne, false);
    for (std::size_t k = 0; k < n_removed; ++k) removed[edge_ids[k]] = true;

    UnionFind uf(nv);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nv);  // (neighbour, edge)
    for (std::size_t e = 0; e < ne; ++e) {
      if (removed[e]) continue;
      auto [u, v] = g.edges()[e];
      uf.unite(u, v);
      adj[u].emplace_back(v, e);
      adj[v].emplace_back(u, e);
    }
    std::vector<std::size_t> comp_size(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) ++comp_size[uf.find(v)];

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < nv; ++s)
      for (std::size_t t = s + 1; t < nv; ++t)
        if (uf.find(s) == uf.find(t) && comp_size[uf.find(s)] >= 5) pairs.emplace_back(s, t);
    if (pairs.empty()) continue;
    auto [s, t] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];

    // BFS from s; each node's parent is its smallest-id neighbour one step
    // closer to s.
    std::vector<std::size_t> dist(nv, SIZE_MAX);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto [w, e] : adj[u])
        if (dist[w] == SIZE_MAX) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
    }
    const auto row = static_cast<Eigen::Index>(made);
    for (std::size_t u = t; u != s;) {
      std::size_t best = SIZE_MAX, best_edge = 0;
      for (auto [w, e] : adj[u])
        if (dist[w] + 1 == dist[u] && w < best) best = w, best_edge = e;
      d.labels(row, static_cast<Eigen::Index>(best_edge)) = 1.0;
      u = best;
    }
    d.features(row, static_cast<Eigen::Index>(s)) = 1.0;
    d.features(row, static_cast<Eigen::Index>(t)) = 1.0;
    for (std::size_t e = 0; e < ne; ++e)
      if (removed[e]) d.features(row, static_cast<Eigen::Index>(nv + e)) = 1.0;

    State full(g.num_vars(), 0);
    full[s] = full[t] = 1;
    for (std::size_t e = 0; e < ne; ++e) full[nv + e] = d.labels(row, static_cast<Eigen::Index>(e)) > 0.5;
    if (!is_valid_grid_path(g, full) || (check && !check->evaluate(full)))
      throw ComputeError("generated grid label " + std::to_string(made) + " violates the path constraint");
    ++made;
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  assign_splits(d, order);
  d.provenance = {{"generator", "grid"},
                  {"rows", g.rows()},
                  {"cols", g.cols()},
                  {"count", count},
                  {"seed", seed},
                  {"removed_edges", n_removed}};
  return d;
}

Dataset parse_preflib_soc(const std::string& text, std::uint64_t seed) {
  static constexpr std::array<int, 6> kFeatureItems = {1, 2, 3, 5, 7, 8};
  static constexpr std::array<int, 4> kLabelItems = {4, 6, 9, 10};
  constexpr int kItems = 10;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<int>> orders;

  auto parse_int = [&](const std::string& tok) {
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (tok.empty() || *end != '\0') throw ParseError(lineno, "expected an integer, got '" + tok + "'");
    return static_cast<int>(v);
  };
  auto split_csv = [](const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(s);
    while (std::getline(ss, tok, ',')) {
      auto b = tok.find_first_not_of(" \t\r"), e = tok.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
    }
    return out;
  };
  auto add_order = [&](int count, const std::vector<std::string>& items) {
    if (count < 0) throw ParseError(lineno, "negative voter count");
    std::vector<int> order;
    std::vector<bool> seen(kItems + 1, false);
    for (const auto& tok : items) {
      if (!tok.empty() && tok.front() == '{') throw ParseError(lineno, "ties are not strict orders");
      int item = parse_int(tok);
      if (item < 1 || item > kItems) throw ParseError(lineno, "unknown item id " + tok);
      if (seen[static_cast<std::size_t>(item)]) throw ParseError(lineno, "item " + tok + " ranked twice");
      seen[static_cast<std::size_t>(item)] = true;
      order.push_back(item);
    }
    if (order.size() != kItems) throw ParseError(lineno, "incomplete order");
    for (int k = 0; k < count; ++k) orders.push_back(order);
  };

  bool header_style = false;
  int old_state = 0;  // old format: 0 item count, 1 item names, 2 totals line, 3 orders
  int names_left = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      header_style = true;
      if (line.rfind("# NUMBER ALTERNATIVES:", 0) == 0 && parse_int(split_csv(line.substr(22))[0]) != kItems)
        throw ParseError(lineno, "expected 10 alternatives");
      continue;
    }
    if (header_style) {
      auto colon = line.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected 'count: order'");
      auto head = split_csv(line.substr(0, colon));
      if (head.size() != 1) throw ParseError(lineno, "malformed count");
      add_order(parse_int(head[0]), split_csv(line.substr(colon + 1)));
      continue;
    }
    auto toks = split_csv(line);
    switch (old_state) {
      case 0:
        if (parse_int(toks.at(0)) != kItems) throw ParseError(lineno, "expected 10 alternatives");
        names_left = kItems;
        old_state = 1;
        break;
      case 1:
        if (toks.size() < 2) throw ParseError(lineno, "malformed item name line");
        if (--names_left == 0) old_state = 2;
        break;
      case 2:
        if (toks.size() != 3) throw ParseError(lineno, "malformed voter totals line");
        old_state = 3;
        break;
      default: {
        std::vector<std::string> items(toks.begin() + 1, toks.end());
        add_order(parse_int(toks.at(0)), items);
      }
    }
  }
  if (orders.empty()) throw InputError("no rankings found in SOC data");

  const auto n = static_cast<Eigen::Index>(orders.size());
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(n, 36);
  d.labels = Eigen::MatrixXd::Zero(n, 16);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& order = orders[static_cast<std::size_t>(r)];
    auto encode = [&](const auto& items, Eigen::MatrixXd& out) {
      const auto k = static_cast<Eigen::Index>(items.size());
      Eigen::Index pos = 0;
      for (int item : order) {
        auto it = std::find(items.begin(), items.end(), item);
        if (it == items.end()) continue;
        out(r, static_cast<Eigen::Index>(it - items.begin()) * k + pos) = 1.0;
        ++pos;
      }
    };
    encode(kFeatureItems, d.features);
    encode(kLabelItems, d.labels);
  }
  std::vector<std::size_t> perm(orders.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  assign_splits(d, perm);
  d.provenance = {{"generator", "preflib-soc"}, {"individuals", orders.size()}, {"seed", seed}};
  return d;
}

Dataset load_preflib_soc(const std::string& path, std::uint64_t seed) {
  Dataset d = parse_preflib_soc(read_file(path), seed);
  d.provenance["path"] = path;
  return d;
}

Dataset gen_toy_2d(std::uint64_t seed, std::size_t n_labeled, std::size_t n_unlabeled) {
  if (n_labeled == 0 || n_unlabeled == 0) throw InputError("toy data needs at least one labeled and one unlabeled point");
  static constexpr double kMean[2][2] = {{-1.0, 0.0}, {1.0, 0.5}};
  const double sd = std::sqrt(0.4);
  // Labeled points come from a band near their cluster's x mean, class 0
  // above its y mean and class 1 below, between these many deviations.
  const double band = 0.5, lo = 0.75, hi = 1.5;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = n_labeled + n_unlabeled;
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), 2);
  d.labels = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
  d.split.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool labeled = i < n_labeled;
    const std::size_t cls = labeled ? i % 2 : (i - n_labeled) % 2;
    double x, y;
    for (;;) {
      const double zx = z(rng), zy = z(rng);
      x = kMean[cls][0] + sd * zx;
      y = kMean[cls][1] + sd * zy;
      const double off = cls == 0 ? zy : -zy;
      if (!labeled || (std::abs(zx) < band && off > lo && off < hi)) break;
    }
    const auto r = static_cast<Eigen::Index>(i);
    d.features(r, 0) = x;
    d.features(r, 1) = y;
    d.labels(r, static_cast<Eigen::Index>(cls)) = 1.0;
    d.split[i] = labeled ? Split::Train : Split::Unlabeled;
  }
  d.provenance = {{"generator", "toy2d"}, {"seed", seed}, {"labeled", n_labeled}, {"unlabeled", n_unlabeled}};
  return d;
}

std::string dataset_to_csv(const Dataset& d) {
  std::string out;
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) out += "f" + std::to_string(j) + ",";
  for (Eigen::Index j = 0; j < d.labels.cols(); ++j) out += "y" + std::to_string(j) + ",";
  out += "split\n";
  char buf[32];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", d.features(r, j));
      out += buf;
    }
    for (Eigen::Index j = 0; j < d.labels.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", d.labels(r, j));
      out += buf;
    }
    out += split_name(d.split[i]);
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset CSV is empty");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  if (header.empty() || header.back() != "split") throw InputError("dataset CSV schema: last column must be 'split'");
  std::size_t nf = 0, ny = 0;
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    const std::string& h = header[j];
    if (ny == 0 && h == "f" + std::to_string(nf))
      ++nf;
    else if (h == "y" + std::to_string(ny))
      ++ny;
    else
      throw InputError("dataset CSV schema: unexpected column '" + h + "'");
  }

  std::vector<std::vector<double>> rows;
  Dataset d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) cells.push_back(tok);
    if (cells.size() != header.size()) throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns");
    std::vector<double> vals(nf + ny);
    for (std::size_t j = 0; j < nf + ny; ++j) {
      char* end = nullptr;
      vals[j] = std::strtod(cells[j].c_str(), &end);
      if (cells[j].empty() || *end != '\0') throw ParseError(lineno, "bad number '" + cells[j] + "'");
    }
    rows.push_back(std::move(vals));
    d.split.push_back(parse_split(cells.back()));
  }
  d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nf));
  d.labels.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < nf; ++j) d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    for (std::size_t j = 0; j < ny; ++j)
      d.labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][nf + j];
  }
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw InputError("write to '" + path + "' failed");
}

void save_dataset(const Dataset& d, const std::string& path) { write_file(path, dataset_to_csv(d)); }

Dataset load_dataset(const std::string& path) { return dataset_from_csv(read_file(path)); }

}  // namespace semloss
