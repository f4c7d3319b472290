#pragma once

#include <string>

#include "covy/ddpg.hpp"
#include "covy/sac.hpp"

namespace covy {

enum class AgentKind { Ddpg, Sac };

const char* to_string(AgentKind kind);

/// Versioned binary weight dump: magic, format version, agent kind, then
/// every network as named tensors with shape headers. Byte-stable for a
/// given agent state.
void save_checkpoint(const DdpgAgent& agent, const std::string& path);
void save_checkpoint(const SacAgent& agent, const std::string& path);

/// Agent kind recorded in a checkpoint; throws on unreadable files.
AgentKind peek_checkpoint_kind(const std::string& path);

/// Loaders rebuild the agent with the stored layer sizes; optimizer moments
/// are not part of a checkpoint. Shape inconsistencies (wrong state or
/// action width, truncated tensors) throw std::runtime_error.
DdpgAgent load_ddpg_checkpoint(const std::string& path, DdpgParams params, const ActionBox& box);
SacAgent load_sac_checkpoint(const std::string& path, SacParams params, const ActionBox& box);

}  // namespace covy
