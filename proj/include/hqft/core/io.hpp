#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hqft/core/complex.hpp"
#include "json.hpp"

namespace hqft {

/// Text dump: `# dim <n> <d>` header lines, then one `degree row col num/den` line per nonzero entry.
inline void write_text(std::ostream& os, const ChainComplex& c) {
  for (const auto& [n, d] : c.dims()) os << "# dim " << n << ' ' << d << '\n';
  for (const auto& [n, m] : c.diffs())
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (const auto& [col, v] : m.row(r)) os << n << ' ' << r << ' ' << col << ' ' << v.get_str() << '\n';
}

inline ChainComplex read_text(std::istream& is) {
  std::map<int, std::size_t> dims;
  std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Scalar>>> trips;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, tag;
      int n;
      std::size_t d;
      if ((ls >> hash >> tag >> n >> d) && tag == "dim") dims[n] = d;
      continue;
    }
    int n;
    std::size_t r, c;
    std::string q;
    if (!(ls >> n >> r >> c >> q)) throw std::invalid_argument("bad dump line: " + line);
    trips[n].emplace_back(r, c, parse_scalar(q));
  }
  auto dim = [&](int k) {
    auto it = dims.find(k);
    return it == dims.end() ? std::size_t{0} : it->second;
  };
  std::map<int, Matrix> diffs;
  for (auto& [n, t] : trips) diffs[n] = Matrix::from_triplets(dim(n - 1), dim(n), std::move(t));
  return make_complex(std::move(dims), std::move(diffs));
}

/// {degrees, dims, diffs}; diffs maps degree to a list of [row, col, "num/den"].
inline nlohmann::json to_json(const ChainComplex& c) {
  nlohmann::json j;
  j["degrees"] = c.degrees();
  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [n, d] : c.dims()) dims[std::to_string(n)] = d;
  j["dims"] = dims;
  nlohmann::json diffs = nlohmann::json::object();
  for (const auto& [n, m] : c.diffs()) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (const auto& [col, v] : m.row(r)) entries.push_back({r, col, v.get_str()});
    diffs[std::to_string(n)] = entries;
  }
  j["diffs"] = diffs;
  return j;
}

inline ChainComplex complex_from_json(const nlohmann::json& j) {
  std::map<int, std::size_t> dims;
  for (const auto& [k, v] : j.at("dims").items()) dims[std::stoi(k)] = v.get<std::size_t>();
  auto dim = [&](int k) {
    auto it = dims.find(k);
    return it == dims.end() ? std::size_t{0} : it->second;
  };
  std::map<int, Matrix> diffs;
  for (const auto& [k, entries] : j.at("diffs").items()) {
    int n = std::stoi(k);
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
    for (const auto& e : entries)
      t.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), parse_scalar(e.at(2).get<std::string>()));
    diffs[n] = Matrix::from_triplets(dim(n - 1), dim(n), std::move(t));
  }
  return make_complex(std::move(dims), std::move(diffs));
}

}  // namespace hqft
