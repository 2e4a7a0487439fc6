// Copyright 2026 The rigba Authors.
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

#pragma once

#include <iosfwd>
#include <string>

#include "rigba/problem.hpp"

namespace rigba {

// Plain-text problem format, one record per line:
//   RIGBA 1
//   STREAM <id> <focal> <cx> <cy> <k1> <k2>
//   IMAGE <id> <stream_id> <time_index> <rx> <ry> <rz> <cx> <cy> <cz>
//   LANDMARK <id> <x> <y> <z>
//   OBS <image_id> <landmark_id> <u> <v>
//   RIG_PAIR <time_index> <image_id_a> <image_id_b>
// Lines starting with '#' are comments. Floats are written with the
// shortest decimal that round-trips, so read(write(p)) == p exactly.

void write_problem(const RigProblem& problem, std::ostream& out);
void write_problem(const RigProblem& problem, const std::string& path);

std::string problem_to_string(const RigProblem& problem);

// Throws ParseError (with line number and record kind) on malformed or
// referentially inconsistent input.
RigProblem read_problem(std::istream& in);
RigProblem read_problem(const std::string& path);
RigProblem problem_from_string(const std::string& text);

// Shortest round-trip decimal rendering used by every text output.
std::string format_double(double value);

}  // namespace rigba
