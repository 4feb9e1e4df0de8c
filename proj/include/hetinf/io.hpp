#ifndef HETINF_IO_HPP
#define HETINF_IO_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hetinf/continuation.hpp"
#include "hetinf/lins.hpp"
#include "hetinf/orbit.hpp"
#include "hetinf/periodic.hpp"

namespace hetinf {

/// Files written here survive round trips: CSV carries 17 significant
/// digits, state files are JSON with exact double round-tripping.

/// Columns t_normalized,chart,c1,c2,c3 with t in [0,1] within each segment.
void write_orbit_csv(const std::string& path, const std::vector<OrbitSegment>& segs);

/// Branch table: step index, arclength, every scalar by name, every monitor.
void write_branch_csv(const std::string& path, const Branch& br, const BvpLayout& lay);

/// Branch table for connection problems with a fixed column set independent
/// of the mode: step, arclength, alpha, beta, eta, theta_B, T0, TB, delta_0,
/// then both section endpoints in ambient coordinates (u(0) and glued
/// uB(1)).  Scalars that are not unknowns of the mode repeat their frozen
/// values.
void write_lin_branch_csv(const std::string& path, const Branch& br, const LinProblem& lp);

/// Sidecar with the located events and the branch termination reason.
void write_events_json(const std::string& path, const Branch& br, const BvpLayout& lay);

/// Run provenance: the effective argument vector plus caller-supplied fields.
void write_metadata_json(const std::string& path, const std::vector<std::string>& argv_effective,
                         const std::vector<std::pair<std::string, std::string>>& extra = {});

void save_lin(const std::string& path, const LinProblem& lp);
std::unique_ptr<LinProblem> load_lin(const std::string& path);

void save_periodic(const std::string& path, const PeriodicOrbit& po);
PeriodicOrbit load_periodic(const std::string& path);

}  // namespace hetinf

#endif
