#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "semloss/encoders.hpp"

namespace semloss {

enum class Split : std::uint8_t { Train, Valid, Test, Unlabeled };

const char* split_name(Split s);
Split parse_split(const std::string& s);

struct Dataset {
  Eigen::MatrixXd features;  // one row per example
  Eigen::MatrixXd labels;    // 0/1 entries
  std::vector<Split> split;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const { return split.size(); }
  std::vector<std::size_t> rows(Split s) const;
  std::size_t count(Split s) const { return rows(s).size(); }
  Dataset subset(Split s) const;
  State label_state(std::size_t row) const;
};

// Shortest-path data on a grid with a third of the edges removed per example.
// Features: |V| endpoint indicators, then |E| removal flags (1 = removed).
// Labels: edge indicators of a BFS shortest path. When `check` is given every
// label is also verified against it. Splits 60/20/20 in generation order.
Dataset gen_grid_dataset(const GridSpec& g, std::size_t count, std::uint64_t seed, const Circuit* check = nullptr);

// Evidence fixing the endpoint indicators from a grid feature row.
Evidence grid_endpoint_evidence(const GridSpec& g, const Eigen::RowVectorXd& features);

// Rankings in PrefLib strict-order-complete format (old or header-comment
// style). Items {1,2,3,5,7,8} become a 6x6 permutation matrix of features,
// items {4,6,9,10} a 4x4 permutation matrix of labels; matrix entry (i, j)
// means item i at position j. Split 60/20/20 after a seeded shuffle.
Dataset load_preflib_soc(const std::string& path, std::uint64_t seed);
Dataset parse_preflib_soc(const std::string& text, std::uint64_t seed);

// Two Gaussian clusters, means (-1, 0) and (1, 0.5), covariance 0.4 I.
// Labels are one-hot over two classes. The n_labeled points (tagged Train)
// sit near their cluster's x mean, class 0 above its y mean and class 1
// below, which tilts a labeled-only boundary. The rest are tagged Unlabeled
// but keep their true labels.
Dataset gen_toy_2d(std::uint64_t seed, std::size_t n_labeled, std::size_t n_unlabeled);

// CSV with header f0..,y0..,split; numbers printed with 17 significant digits.
std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv(const std::string& text);
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

// Whole-file helpers shared by loaders; throw InputError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace semloss
