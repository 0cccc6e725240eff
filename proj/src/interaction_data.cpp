#include "tsp/interaction_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tsp/errors.hpp"

namespace tsp {

namespace {

bool parse_int64(const std::string& field, std::int64_t& out) {
    if (field.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(field, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == field.size();
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void recount_popularity(InteractionDataset& ds) {
    ds.item_popularity.assign(ds.num_items, 0);
    for (const auto& [u, i] : ds.train) {
        (void)u;
        ds.item_popularity[static_cast<std::size_t>(i)] += 1;
    }
}

}  // namespace

InteractionDataset load_interactions(const std::string& path, FileFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open interaction file: " + path);
    const char sep = format == FileFormat::Csv ? ',' : '\t';

    InteractionDataset ds;
    std::unordered_map<std::int64_t, std::int32_t> user_index, item_index;
    std::vector<Interaction> seen;

    std::string line;
    long line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = strip(line);
        if (trimmed.empty()) continue;

        std::stringstream ss(trimmed);
        std::string a, b;
        if (!std::getline(ss, a, sep) || !std::getline(ss, b, sep)) {
            throw ParseError("expected two " +
                                 std::string(format == FileFormat::Csv ? "comma" : "tab") +
                                 "-separated fields",
                             line_no);
        }
        std::int64_t uid = 0, iid = 0;
        const bool ok = parse_int64(strip(a), uid) && parse_int64(strip(b), iid);
        if (!ok) {
            if (first_data_line) {
                // Header row; skip it.
                first_data_line = false;
                continue;
            }
            throw ParseError("non-integer field in interaction record", line_no);
        }
        first_data_line = false;

        auto [uit, unew] = user_index.try_emplace(uid, static_cast<std::int32_t>(ds.user_ids.size()));
        if (unew) ds.user_ids.push_back(uid);
        auto [iit, inew] = item_index.try_emplace(iid, static_cast<std::int32_t>(ds.item_ids.size()));
        if (inew) ds.item_ids.push_back(iid);
        seen.emplace_back(uit->second, iit->second);
    }
    if (seen.empty()) throw ParseError("empty interaction file: " + path);

    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

    ds.num_users = ds.user_ids.size();
    ds.num_items = ds.item_ids.size();
    ds.interactions = std::move(seen);
    return ds;
}

InteractionDataset unbiased_split(const InteractionDataset& dataset, double train_frac,
                                  double valid_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0) || !(valid_frac > 0.0 && valid_frac < 1.0)) {
        throw ConfigError("split fractions must be in (0, 1)");
    }
    if (train_frac + valid_frac >= 1.0) {
        throw ConfigError("train_frac + valid_frac must be < 1");
    }
    if (dataset.has_split) throw ConfigError("dataset is already split");

    const std::size_t n = dataset.interactions.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    // Fisher-Yates with an explicit 64-bit generator keeps the permutation a
    // pure function of the seed.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const auto n_valid = static_cast<std::size_t>(std::llround(valid_frac * static_cast<double>(n)));
    if (n_train + n_valid > n) throw ConfigError("split fractions leave no test interactions");

    InteractionDataset out = dataset;
    out.train.clear();
    out.valid.clear();
    out.test.clear();
    out.train.reserve(n_train);
    out.valid.reserve(n_valid);
    out.test.reserve(n - n_train - n_valid);
    for (std::size_t i = 0; i < n; ++i) {
        const Interaction& e = dataset.interactions[order[i]];
        if (i < n_train) {
            out.train.push_back(e);
        } else if (i < n_train + n_valid) {
            out.valid.push_back(e);
        } else {
            out.test.push_back(e);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.valid.begin(), out.valid.end());
    std::sort(out.test.begin(), out.test.end());
    out.has_split = true;
    recount_popularity(out);
    return out;
}

BipartiteGraph build_bipartite_graph(const InteractionDataset& dataset) {
    if (!dataset.has_split) throw ConfigError("build_bipartite_graph requires a split dataset");

    BipartiteGraph g;
    g.num_users = dataset.num_users;
    g.num_items = dataset.num_items;
    const auto n = static_cast<Index>(g.num_nodes());

    std::vector<Triplet> entries;
    entries.reserve(dataset.train.size() * 2);
    g.degrees = Eigen::VectorXi::Zero(n);
    for (const auto& [u, i] : dataset.train) {
        const Index a = u;
        const Index b = g.item_node(i);
        entries.emplace_back(a, b, 1.0);
        entries.emplace_back(b, a, 1.0);
        g.degrees[a] += 1;
        g.degrees[b] += 1;
    }
    g.adjacency.resize(n, n);
    g.adjacency.setFromTriplets(entries.begin(), entries.end());

    Vector inv_sqrt(n);
    for (Index v = 0; v < n; ++v) {
        inv_sqrt[v] = g.degrees[v] > 0 ? 1.0 / std::sqrt(static_cast<double>(g.degrees[v])) : 0.0;
    }
    std::vector<Triplet> norm_entries;
    norm_entries.reserve(entries.size());
    for (const auto& t : entries) {
        norm_entries.emplace_back(t.row(), t.col(), inv_sqrt[t.row()] * inv_sqrt[t.col()]);
    }
    g.normalized_adjacency.resize(n, n);
    g.normalized_adjacency.setFromTriplets(norm_entries.begin(), norm_entries.end());

    SparseMatrix identity(n, n);
    identity.setIdentity();
    g.normalized_laplacian = identity - g.normalized_adjacency;
    return g;
}

std::vector<std::int32_t> tail_items(const InteractionDataset& dataset, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("tail fraction must be in (0, 1]");
    if (!dataset.has_split) throw ConfigError("tail_items requires a split dataset");

    const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(dataset.num_items)));
    std::vector<std::int32_t> items(dataset.num_items);
    for (std::size_t i = 0; i < dataset.num_items; ++i) items[i] = static_cast<std::int32_t>(i);
    std::sort(items.begin(), items.end(), [&](std::int32_t a, std::int32_t b) {
        const auto pa = dataset.item_popularity[static_cast<std::size_t>(a)];
        const auto pb = dataset.item_popularity[static_cast<std::size_t>(b)];
        return pa != pb ? pa < pb : a < b;
    });
    items.resize(count);
    std::sort(items.begin(), items.end());
    return items;
}

namespace {

nlohmann::json pairs_to_json(const std::vector<Interaction>& pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [u, i] : pairs) arr.push_back({u, i});
    return arr;
}

std::vector<Interaction> pairs_from_json(const nlohmann::json& arr) {
    std::vector<Interaction> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        out.emplace_back(e.at(0).get<std::int32_t>(), e.at(1).get<std::int32_t>());
    }
    return out;
}

nlohmann::json id_map_to_json(const std::vector<std::int64_t>& ids) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t idx = 0; idx < ids.size(); ++idx) {
        obj[std::to_string(ids[idx])] = idx;
    }
    return obj;
}

std::vector<std::int64_t> id_map_from_json(const nlohmann::json& obj) {
    std::vector<std::int64_t> ids(obj.size(), 0);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const auto idx = it.value().get<std::size_t>();
        if (idx >= ids.size()) throw FormatError("id map index out of range in split manifest");
        ids[idx] = std::stoll(it.key());
    }
    return ids;
}

}  // namespace

void write_split_manifest(const InteractionDataset& dataset, const std::string& path) {
    if (!dataset.has_split) throw ConfigError("cannot write manifest for an unsplit dataset");
    nlohmann::json j;
    j["num_users"] = dataset.num_users;
    j["num_items"] = dataset.num_items;
    j["train"] = pairs_to_json(dataset.train);
    j["valid"] = pairs_to_json(dataset.valid);
    j["test"] = pairs_to_json(dataset.test);
    j["id_maps"] = {{"users", id_map_to_json(dataset.user_ids)},
                    {"items", id_map_to_json(dataset.item_ids)}};
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write split manifest: " + path);
    out << j.dump(2) << "\n";
}

InteractionDataset read_split_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open split manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid split manifest JSON: " + std::string(e.what()));
    }
    InteractionDataset ds;
    try {
        ds.num_users = j.at("num_users").get<std::size_t>();
        ds.num_items = j.at("num_items").get<std::size_t>();
        ds.train = pairs_from_json(j.at("train"));
        ds.valid = pairs_from_json(j.at("valid"));
        ds.test = pairs_from_json(j.at("test"));
        ds.user_ids = id_map_from_json(j.at("id_maps").at("users"));
        ds.item_ids = id_map_from_json(j.at("id_maps").at("items"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("split manifest missing field: " + std::string(e.what()));
    }
    ds.interactions = ds.train;
    ds.interactions.insert(ds.interactions.end(), ds.valid.begin(), ds.valid.end());
    ds.interactions.insert(ds.interactions.end(), ds.test.begin(), ds.test.end());
    std::sort(ds.interactions.begin(), ds.interactions.end());
    ds.has_split = true;
    recount_popularity(ds);
    return ds;
}

}  // namespace tsp
