// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_SNAPSHOT_H
#define HTLCGP_SNAPSHOT_H

#include <htlcgp/graph.h>

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace htlcgp {

/**
 * Build a graph from topology records {channel_id, node1_pub, node2_pub,
 * capacity_sat, disabled, node1_policy, node2_policy}. The document is either
 * an array of records or an object holding one under "channels" or "edges".
 *
 * Disabled channels are dropped, only the largest connected component is
 * kept (ties go to the component holding the smallest node id) and each
 * capacity is split evenly, the odd msat going to the smaller node id.
 * A node's fee policy is taken from the first record that carries it.
 */
NetworkGraph ParseSnapshot(const nlohmann::json& document);

NetworkGraph LoadSnapshot(const std::filesystem::path& path);

} // namespace htlcgp

#endif // HTLCGP_SNAPSHOT_H
