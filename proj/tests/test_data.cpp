#include <cmath>
#include <gtest/gtest.h>

#include <queue>

#include "semloss/data.hpp"

using namespace semloss;

namespace {

const char* kOldSoc =
    "10\n1,ebi\n2,anago\n3,maguro\n4,ika\n5,uni\n6,tako\n7,ikura\n8,tamago\n9,toro\n10,kappa\n"
    "3,3,2\n"
    "1,1,2,3,4,5,6,7,8,9,10\n"
    "2,10,9,8,7,6,5,4,3,2,1\n";

const char* kNewSoc =
    "# FILE NAME: fixture.soc\n# DATA TYPE: soc\n# NUMBER ALTERNATIVES: 10\n# NUMBER VOTERS: 3\n"
    "1: 1,2,3,4,5,6,7,8,9,10\n"
    "2: 10,9,8,7,6,5,4,3,2,1\n";

Eigen::MatrixXd anti_identity(Eigen::Index n) { return Eigen::MatrixXd::Identity(n, n).rowwise().reverse(); }

Eigen::MatrixXd unflatten(const Eigen::RowVectorXd& row, Eigen::Index n) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[i * n + j];
  return m;
}

std::size_t bfs_distance(const GridSpec& g, const Eigen::RowVectorXd& f, std::size_t s, std::size_t t) {
  const std::size_t nv = g.num_nodes();
  std::vector<std::vector<std::size_t>> adj(nv);
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (f[static_cast<Eigen::Index>(nv + e)] < 0.5) {
      adj[g.edges()[e].u].push_back(g.edges()[e].v);
      adj[g.edges()[e].v].push_back(g.edges()[e].u);
    }
  std::vector<std::size_t> dist(nv, SIZE_MAX);
  std::queue<std::size_t> q;
  dist[s] = 0;
  q.push(s);
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto w : adj[u])
      if (dist[w] == SIZE_MAX) dist[w] = dist[u] + 1, q.push(w);
  }
  return dist[t];
}

}  // namespace

TEST(GridData, ShapesAndSplits) {
  GridSpec g(4, 4);
  Dataset d = gen_grid_dataset(g, 1600, 3);
  EXPECT_EQ(d.features.cols(), 40);
  EXPECT_EQ(d.labels.cols(), 24);
  EXPECT_EQ(d.count(Split::Train), 960u);
  EXPECT_EQ(d.count(Split::Valid), 320u);
  EXPECT_EQ(d.count(Split::Test), 320u);
}

TEST(GridData, LabelsAreShortestValidPaths) {
  GridSpec g(4, 4);
  Circuit c = grid_simple_path(g);
  Dataset d = gen_grid_dataset(g, 300, 4, &c);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    Eigen::RowVectorXd f = d.features.row(r);
    EXPECT_EQ(f.head(16).sum(), 2.0);
    EXPECT_EQ(f.tail(24).sum(), 8.0);
    State full(g.num_vars());
    std::vector<std::size_t> ends;
    for (std::size_t v = 0; v < 16; ++v)
      if ((full[v] = f[static_cast<Eigen::Index>(v)] > 0.5)) ends.push_back(v);
    for (std::size_t e = 0; e < 24; ++e) {
      full[16 + e] = d.labels(r, static_cast<Eigen::Index>(e)) > 0.5;
      if (full[16 + e]) {
        EXPECT_LT(f[static_cast<Eigen::Index>(16 + e)], 0.5) << "path uses a removed edge";
      }
    }
    ASSERT_EQ(ends.size(), 2u);
    EXPECT_TRUE(c.evaluate(full));
    EXPECT_TRUE(condition(c, grid_endpoint_evidence(g, f)).evaluate(full));
    EXPECT_EQ(static_cast<std::size_t>(d.labels.row(r).sum()), bfs_distance(g, f, ends[0], ends[1]));
  }
}

TEST(GridData, DeterministicPerSeed) {
  GridSpec g(4, 4);
  EXPECT_EQ(dataset_to_csv(gen_grid_dataset(g, 50, 9)), dataset_to_csv(gen_grid_dataset(g, 50, 9)));
  EXPECT_NE(dataset_to_csv(gen_grid_dataset(g, 50, 9)), dataset_to_csv(gen_grid_dataset(g, 50, 10)));
}

TEST(GridData, RetryBudgetExhaustion) {
  // Removing a third of a 2x2 grid's 4 edges leaves at most 4 connected nodes.
  EXPECT_THROW(gen_grid_dataset(GridSpec(2, 2), 1, 1), ComputeError);
}

TEST(Csv, RoundTripIsByteIdentical) {
  Dataset d = gen_grid_dataset(GridSpec(4, 4), 40, 5);
  std::string text = dataset_to_csv(d);
  Dataset back = dataset_from_csv(text);
  EXPECT_EQ(dataset_to_csv(back), text);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.split, d.split);

  Dataset toy = gen_toy_2d(3, 4, 20);
  Dataset toy_back = dataset_from_csv(dataset_to_csv(toy));
  EXPECT_EQ(toy_back.features, toy.features);
}

TEST(Csv, SchemaErrors) {
  EXPECT_THROW(dataset_from_csv("f0,y0\n1,0\n"), InputError);
  EXPECT_THROW(dataset_from_csv("f0,y0,split\n1,0\n"), ParseError);
  EXPECT_THROW(dataset_from_csv("f0,y0,split\n1,0,nowhere\n"), InputError);
  EXPECT_THROW(dataset_from_csv("f0,f2,split\n1,0,train\n"), InputError);
  EXPECT_THROW(dataset_from_csv("f0,y0,split\nx,0,train\n"), ParseError);
  EXPECT_THROW(dataset_from_csv(""), InputError);
  EXPECT_THROW(load_dataset("/nonexistent/file.csv"), InputError);
}

TEST(Preflib, FixtureEncodesPermutationMatrices) {
  for (const char* text : {kOldSoc, kNewSoc}) {
    Dataset d = parse_preflib_soc(text, 1);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.features.cols(), 36);
    EXPECT_EQ(d.labels.cols(), 16);
    EXPECT_EQ(unflatten(d.features.row(0), 6), Eigen::MatrixXd::Identity(6, 6));
    EXPECT_EQ(unflatten(d.labels.row(0), 4), Eigen::MatrixXd::Identity(4, 4));
    for (Eigen::Index r : {1, 2}) {
      EXPECT_EQ(unflatten(d.features.row(r), 6), anti_identity(6));
      EXPECT_EQ(unflatten(d.labels.row(r), 4), anti_identity(4));
    }
    EXPECT_EQ(d.count(Split::Train) + d.count(Split::Valid) + d.count(Split::Test), 3u);
  }
}

TEST(Preflib, LabelsSatisfyTotalOrder) {
  Circuit c = total_order(4);
  Dataset d = parse_preflib_soc(kOldSoc, 2);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_TRUE(c.evaluate(d.label_state(i)));
}

TEST(Preflib, MalformedInput) {
  EXPECT_THROW(parse_preflib_soc("# NUMBER ALTERNATIVES: 10\n1: 1,2,3\n", 1), ParseError);
  EXPECT_THROW(parse_preflib_soc("# NUMBER ALTERNATIVES: 10\n1: 1,2,3,4,5,6,7,8,9,11\n", 1), ParseError);
  EXPECT_THROW(parse_preflib_soc("# NUMBER ALTERNATIVES: 10\n1: 1,1,3,4,5,6,7,8,9,10\n", 1), ParseError);
  EXPECT_THROW(parse_preflib_soc("# NUMBER ALTERNATIVES: 10\n1 1,2,3,4,5,6,7,8,9,10\n", 1), ParseError);
  EXPECT_THROW(parse_preflib_soc("# NUMBER ALTERNATIVES: 10\n", 1), InputError);
  EXPECT_THROW(load_preflib_soc("/nonexistent.soc", 1), InputError);
}

TEST(Toy, CountsAndLabels) {
  Dataset d = gen_toy_2d(1, 4, 200);
  EXPECT_EQ(d.size(), 204u);
  EXPECT_EQ(d.count(Split::Train), 4u);
  EXPECT_EQ(d.count(Split::Unlabeled), 200u);
  Circuit c = exactly_one(2);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_TRUE(c.evaluate(d.label_state(i)));
  // Labeled class-0 points sit above the class-0 mean, class-1 points below
  // theirs, both close to their cluster's x mean.
  const double sd = std::sqrt(0.4);
  for (auto r : d.rows(Split::Train)) {
    auto row = static_cast<Eigen::Index>(r);
    if (d.labels(row, 0) > 0.5) {
      EXPECT_NEAR(d.features(row, 0), -1.0, 0.5 * sd);
      EXPECT_GT(d.features(row, 1), 0.75 * sd);
    } else {
      EXPECT_NEAR(d.features(row, 0), 1.0, 0.5 * sd);
      EXPECT_LT(d.features(row, 1), 0.5 - 0.75 * sd);
    }
  }
  EXPECT_THROW(gen_toy_2d(1, 0, 10), InputError);
}
