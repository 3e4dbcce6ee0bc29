// Copyright 2026 The mtpack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTPACK_NETWORK_HPP_
#define MTPACK_NETWORK_HPP_

// Capacitated network, multicast sessions and the star-topology profile
// generator.
//
// Two layers are kept apart:
//   * links carry capacity and delay; prices and flows live on links;
//   * arcs are the edges trees are built from. Every arc maps onto a path of
//     one or more links. Plain topologies have one arc per link; swarming
//     overlays map the overlay arc i->j onto {upload(i), download(j)}, so a
//     node relaying to k children consumes its upload link k times.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "mtpack/core.hpp"
#include "mtpack/utility.hpp"

namespace mtpack {

struct Link {
  NodeId tail = 0;
  NodeId head = 0;
  double capacity = 0.0;
  double delay_ms = 0.0;
};

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  std::vector<LinkId> path;
};

class Network {
 public:
  NodeId add_node(std::string label) {
    if (index_.contains(label)) throw ConfigError("duplicate node '" + label + "'");
    const NodeId id = static_cast<NodeId>(labels_.size());
    index_.emplace(label, id);
    labels_.push_back(std::move(label));
    out_arcs_.emplace_back();
    in_arcs_.emplace_back();
    out_links_.emplace_back();
    return id;
  }

  LinkId add_link(NodeId tail, NodeId head, double capacity, double delay_ms = 0.0) {
    check_node(tail);
    check_node(head);
    if (tail == head) throw ConfigError("self-loop on node '" + labels_[tail] + "'");
    if (!(capacity > 0.0) || !std::isfinite(capacity)) {
      throw ConfigError("link " + labels_[tail] + "->" + labels_[head] +
                        " needs a positive finite capacity");
    }
    if (delay_ms < 0.0) throw ConfigError("negative link delay");
    const LinkId id = static_cast<LinkId>(links_.size());
    links_.push_back({tail, head, capacity, delay_ms});
    out_links_[tail].push_back(id);
    return id;
  }

  ArcId add_arc(NodeId tail, NodeId head, std::vector<LinkId> path) {
    check_node(tail);
    check_node(head);
    if (tail == head) throw ConfigError("self-loop arc on node '" + labels_[tail] + "'");
    if (path.empty()) throw ConfigError("arc without links");
    for (LinkId l : path) {
      if (l < 0 || l >= num_links()) throw ConfigError("arc references unknown link");
    }
    const ArcId id = static_cast<ArcId>(arcs_.size());
    arcs_.push_back({tail, head, std::move(path)});
    out_arcs_[tail].push_back(id);
    in_arcs_[head].push_back(id);
    return id;
  }

  // Adds a link together with its one-to-one arc.
  LinkId add_direct_link(NodeId tail, NodeId head, double capacity, double delay_ms = 0.0) {
    const LinkId l = add_link(tail, head, capacity, delay_ms);
    add_arc(tail, head, {l});
    return l;
  }

  int num_nodes() const { return static_cast<int>(labels_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }

  const Link& link(LinkId id) const { return links_.at(id); }
  const Arc& arc(ArcId id) const { return arcs_.at(id); }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<ArcId>& out_arcs(NodeId n) const { return out_arcs_.at(n); }
  const std::vector<ArcId>& in_arcs(NodeId n) const { return in_arcs_.at(n); }
  const std::vector<LinkId>& out_links(NodeId n) const { return out_links_.at(n); }

  const std::string& label(NodeId n) const { return labels_.at(n); }
  std::optional<NodeId> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool has_node(NodeId n) const { return n >= 0 && n < num_nodes(); }

  // Nodes reachable from `from` along arcs (including `from`).
  std::vector<bool> reachable_from(NodeId from) const {
    std::vector<bool> seen(labels_.size(), false);
    std::queue<NodeId> q;
    seen[from] = true;
    q.push(from);
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      for (ArcId a : out_arcs_[u]) {
        const NodeId v = arcs_[a].head;
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
    return seen;
  }

  // Sum of link propagation delays along an arc.
  double arc_delay_ms(ArcId a) const {
    double d = 0.0;
    for (LinkId l : arcs_.at(a).path) d += links_[l].delay_ms;
    return d;
  }

 private:
  void check_node(NodeId n) const {
    if (!has_node(n)) throw ConfigError("unknown node id " + std::to_string(n));
  }

  std::vector<std::string> labels_;
  std::map<std::string, NodeId> index_;
  std::vector<Link> links_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> out_arcs_;
  std::vector<std::vector<ArcId>> in_arcs_;
  std::vector<std::vector<LinkId>> out_links_;
};

struct Session {
  int id = 0;
  NodeId source = 0;
  std::vector<NodeId> receivers;  // sorted, unique
  double min_rate = 0.0;
  double max_rate = 1.0;
  UtilitySpec utility;

  void validate(const Network& net) const {
    const std::string tag = "session " + std::to_string(id) + ": ";
    if (!net.has_node(source)) throw ConfigError(tag + "unknown source");
    if (receivers.empty()) throw ConfigError(tag + "no receivers");
    if (!std::is_sorted(receivers.begin(), receivers.end()) ||
        std::adjacent_find(receivers.begin(), receivers.end()) != receivers.end()) {
      throw ConfigError(tag + "receivers must be sorted and unique");
    }
    for (NodeId r : receivers) {
      if (!net.has_node(r)) throw ConfigError(tag + "unknown receiver");
      if (r == source) throw ConfigError(tag + "source listed as receiver");
    }
    if (!(min_rate >= 0.0)) throw ConfigError(tag + "negative minimum rate");
    if (!(max_rate > min_rate) || !std::isfinite(max_rate)) {
      throw ConfigError(tag + "need m < M < infinity");
    }
    utility.validate();
  }

  bool is_receiver(NodeId n) const {
    return std::binary_search(receivers.begin(), receivers.end(), n);
  }
};

// Throws InfeasibleError if some receiver cannot be reached from the source.
inline void require_reachable(const Network& net, const Session& s) {
  const auto seen = net.reachable_from(s.source);
  for (NodeId r : s.receivers) {
    if (!seen[r]) {
      throw InfeasibleError("session " + std::to_string(s.id) + ": receiver '" +
                            net.label(r) + "' unreachable from source");
    }
  }
}

// ---------------------------------------------------------------------------
// Star-topology swarming profiles.

enum class SwarmMode { kSeparate, kUniversal };

inline std::string to_string(SwarmMode m) {
  return m == SwarmMode::kSeparate ? "separate" : "universal";
}

inline SwarmMode parse_swarm_mode(const std::string& s) {
  if (s == "separate") return SwarmMode::kSeparate;
  if (s == "universal") return SwarmMode::kUniversal;
  throw ConfigError("unknown mode '" + s + "' (expected separate|universal)");
}

struct SessionProfile {
  std::string role;          // e.g. "large RRS"
  int receivers = 1;
  double source_upload = 0;  // u_s
  double receiver_upload = 0;    // u_i; 0 means receivers have no upload link
  double receiver_download = 0;  // d_i
};

struct ProfileSpec {
  std::string id = "custom";
  std::vector<SessionProfile> sessions;
  SwarmMode mode = SwarmMode::kSeparate;
  double access_delay_ms = 0.0;
  double utility_weight = 1.0;
  // Rate cap M_s as a multiple of the source upload.
  double max_rate_factor = 1.0;

  void validate() const {
    if (sessions.empty()) throw ConfigError("profile without sessions");
    for (const auto& p : sessions) {
      if (p.receivers < 1) throw ConfigError("profile session needs >= 1 receiver");
      if (!(p.source_upload > 0) || !(p.receiver_download > 0) || p.receiver_upload < 0) {
        throw ConfigError("profile bandwidths must be positive");
      }
    }
    if (!(max_rate_factor > 0)) throw ConfigError("max_rate_factor must be positive");
  }
};

// The nine published two-session profiles at full size.
inline ProfileSpec builtin_profile(const std::string& id) {
  // Sizes: A = large rich + small poor, B = two medium, C = small rich + large poor.
  static const std::map<std::string, std::pair<int, int>> kSizes = {
      {"A", {90, 10}}, {"B", {50, 50}}, {"C", {10, 90}}};
  static const std::map<char, std::pair<double, double>> kRich = {
      {'1', {640, 360}}, {'2', {280, 360}}, {'3', {640, 200}}};
  static const std::map<char, std::pair<double, double>> kPoor = {
      {'1', {640, 36}}, {'2', {280, 36}}, {'3', {640, 20}}};
  if (id.size() != 2 || !kSizes.contains(id.substr(0, 1)) || !kRich.contains(id[1])) {
    throw ConfigError("unknown profile '" + id + "' (expected A1..C3)");
  }
  const auto [rich_n, poor_n] = kSizes.at(id.substr(0, 1));
  const auto [rich_us, rich_ui] = kRich.at(id[1]);
  const auto [poor_us, poor_ui] = kPoor.at(id[1]);
  const char* rich_role = id[0] == 'A' ? "large RRS" : id[0] == 'B' ? "medium RRS" : "small RRS";
  const char* poor_role = id[0] == 'A' ? "small RPS" : id[0] == 'B' ? "medium RPS" : "large RPS";
  ProfileSpec spec;
  spec.id = id;
  spec.sessions = {{rich_role, rich_n, rich_us, rich_ui, 360.0},
                   {poor_role, poor_n, poor_us, poor_ui, 360.0}};
  return spec;
}

inline const std::vector<std::string>& builtin_profile_ids() {
  static const std::vector<std::string> kIds = {"A1", "A2", "A3", "B1", "B2",
                                                "B3", "C1", "C2", "C3"};
  return kIds;
}

// Receiver count after scaling by `scale` in (0, 1].
inline int scaled_receivers(int receivers, double scale) {
  if (!(scale > 0.0) || scale > 1.0) throw ConfigError("scale must lie in (0, 1]");
  const long n = std::lround(receivers * scale);
  if (n < 1) throw ConfigError("scale leaves a session without receivers");
  return static_cast<int>(n);
}

struct BuiltNetwork {
  Network network;
  std::vector<Session> sessions;
  NodeId hub = 0;
};

// Builds the star network for a profile. Every edge node owns an upload link
// to the hub and a download link from it; a link is only materialized when an
// overlay arc uses it. Separate mode restricts each session's overlay to its
// own nodes, universal mode joins every edge node into one complete overlay.
inline BuiltNetwork build_profile(const ProfileSpec& spec, double scale = 1.0) {
  spec.validate();
  BuiltNetwork out;
  Network& net = out.network;
  out.hub = net.add_node("hub");

  struct EdgeNode {
    NodeId id;
    double upload;
    double download;
  };
  std::vector<EdgeNode> edge;
  std::vector<std::vector<int>> members;  // per session, indices into `edge`

  for (std::size_t s = 0; s < spec.sessions.size(); ++s) {
    const SessionProfile& p = spec.sessions[s];
    const int n = scaled_receivers(p.receivers, scale);
    const std::string prefix = "s" + std::to_string(s + 1);
    Session session;
    session.id = static_cast<int>(s + 1);
    members.emplace_back();
    session.source = net.add_node(prefix);
    members.back().push_back(static_cast<int>(edge.size()));
    edge.push_back({session.source, p.source_upload, p.receiver_download});
    for (int r = 0; r < n; ++r) {
      const NodeId id = net.add_node(prefix + "r" + std::to_string(r + 1));
      session.receivers.push_back(id);
      members.back().push_back(static_cast<int>(edge.size()));
      edge.push_back({id, p.receiver_upload, p.receiver_download});
    }
    session.min_rate = 0.0;
    session.max_rate = spec.max_rate_factor * p.source_upload;
    session.utility = UtilitySpec::log_shifted(spec.utility_weight);
    out.sessions.push_back(std::move(session));
  }

  std::vector<LinkId> up(edge.size(), -1), down(edge.size(), -1);
  auto upload_link = [&](int i) {
    if (up[i] < 0) up[i] = net.add_link(edge[i].id, out.hub, edge[i].upload, spec.access_delay_ms);
    return up[i];
  };
  auto download_link = [&](int j) {
    if (down[j] < 0) {
      down[j] = net.add_link(out.hub, edge[j].id, edge[j].download, spec.access_delay_ms);
    }
    return down[j];
  };
  auto connect = [&](int i, int j) {
    if (i == j || edge[i].upload <= 0.0) return;
    net.add_arc(edge[i].id, edge[j].id, {upload_link(i), download_link(j)});
  };

  if (spec.mode == SwarmMode::kSeparate) {
    for (const auto& group : members) {
      // group[0] is the source; no arc enters it.
      for (int i : group) {
        for (std::size_t j = 1; j < group.size(); ++j) connect(i, group[j]);
      }
    }
  } else {
    for (std::size_t i = 0; i < edge.size(); ++i) {
      for (std::size_t j = 0; j < edge.size(); ++j) {
        connect(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return out;
}

// Closed-form optimal rate of one session in separate swarming when only
// access links can be bottlenecks: min{u_s, min d_i, (u_s + sum u_i) / L}.
inline double separate_optimum(double source_upload, const std::vector<double>& uploads,
                               const std::vector<double>& downloads) {
  if (uploads.empty() || uploads.size() != downloads.size()) {
    throw ConfigError("separate_optimum needs L >= 1 matching upload/download values");
  }
  const double n = static_cast<double>(uploads.size());
  double total_upload = source_upload;
  for (double u : uploads) total_upload += u;
  const double min_download = *std::min_element(downloads.begin(), downloads.end());
  return std::min({source_upload, min_download, total_upload / n});
}

inline double separate_optimum(const SessionProfile& p, double scale = 1.0) {
  const int n = scaled_receivers(p.receivers, scale);
  return separate_optimum(p.source_upload, std::vector<double>(n, p.receiver_upload),
                          std::vector<double>(n, p.receiver_download));
}

}  // namespace mtpack

#endif  // MTPACK_NETWORK_HPP_
