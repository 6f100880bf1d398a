// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "flowplan/pipeliner.hpp"

namespace flowplan {

// Clustered DOT rendering: one subgraph per device, one sub-cluster per
// slot, dashed edges where a FIFO was cut across devices, red labels on
// pipelined edges (+N cyc / +M depth).
std::string export_dot(const PipelinedDesign& d);

// Minimal structural check used in place of an external graphviz parse:
// verifies bracket balance, statement shape, and that every referenced node
// id was declared. Returns an empty string when the text is well formed,
// else the first complaint.
std::string check_dot_syntax(const std::string& text);

}  // namespace flowplan
