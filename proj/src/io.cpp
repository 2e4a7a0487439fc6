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

#include "rigba/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "rigba/errors.hpp"

namespace rigba {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

void write_stream_record(std::ostream& out, const CameraStream& s) {
  out << "STREAM " << s.id << ' ' << format_double(s.intrinsics.focal) << ' '
      << format_double(s.intrinsics.principal_point.x()) << ' '
      << format_double(s.intrinsics.principal_point.y()) << ' '
      << format_double(s.intrinsics.radial.x()) << ' '
      << format_double(s.intrinsics.radial.y()) << '\n';
}

void write_image_record(std::ostream& out, const ImageRecord& im) {
  const Vec3& aa = im.pose.rotation.axis_angle();
  const Vec3& c = im.pose.center;
  out << "IMAGE " << im.id << ' ' << im.stream_id << ' ' << im.time_index << ' '
      << format_double(aa.x()) << ' ' << format_double(aa.y()) << ' '
      << format_double(aa.z()) << ' ' << format_double(c.x()) << ' '
      << format_double(c.y()) << ' ' << format_double(c.z()) << '\n';
}

struct Tokenizer {
  std::string_view line;
  int line_number;
  std::string_view kind;
  std::size_t pos = 0;

  std::string_view next() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) {
      throw ParseError(line_number, std::string(kind), "missing field");
    }
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
  }

  bool exhausted() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    return pos >= line.size();
  }

  void expect_end() {
    if (!exhausted()) {
      throw ParseError(line_number, std::string(kind), "trailing fields");
    }
  }

  long parse_int() {
    const std::string_view tok = next();
    long value = 0;
    const auto result = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (result.ec != std::errc() || result.ptr != tok.data() + tok.size()) {
      throw ParseError(line_number, std::string(kind),
                       "expected integer, got '" + std::string(tok) + "'");
    }
    return value;
  }

  double parse_double() {
    const std::string_view tok = next();
    double value = 0.0;
    const auto result = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (result.ec != std::errc() || result.ptr != tok.data() + tok.size()) {
      throw ParseError(line_number, std::string(kind),
                       "expected number, got '" + std::string(tok) + "'");
    }
    return value;
  }
};

struct PendingReference {
  int line_number;
  std::string kind;
};

}  // namespace

void write_problem(const RigProblem& problem, std::ostream& out) {
  out << "RIGBA 1\n";
  for (const CameraStream& s : problem.streams) write_stream_record(out, s);
  for (const ImageRecord& im : problem.images) write_image_record(out, im);
  for (const LandmarkRecord& lm : problem.landmarks) {
    const Vec3& p = lm.landmark.position;
    out << "LANDMARK " << lm.id << ' ' << format_double(p.x()) << ' '
        << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
  }
  for (const Observation& obs : problem.observations) {
    out << "OBS " << obs.image_id << ' ' << obs.landmark_id << ' '
        << format_double(obs.pixel.x()) << ' ' << format_double(obs.pixel.y())
        << '\n';
  }
  for (const RigPair& pair : problem.pairs) {
    out << "RIG_PAIR " << pair.time_index << ' ' << pair.image_a << ' '
        << pair.image_b << '\n';
  }
}

void write_problem(const RigProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path + "' for writing");
  }
  write_problem(problem, out);
}

std::string problem_to_string(const RigProblem& problem) {
  std::ostringstream out;
  write_problem(problem, out);
  return out.str();
}

RigProblem read_problem(std::istream& in) {
  RigProblem problem;
  std::vector<std::pair<std::size_t, PendingReference>> image_lines;
  std::vector<std::pair<std::size_t, PendingReference>> obs_lines;
  std::vector<std::pair<std::size_t, PendingReference>> pair_lines;

  std::string line;
  int line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    std::size_t first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;  // blank
    if (view[first] == '#') continue;               // comment

    Tokenizer tok{view, line_number, "", first};
    const std::string_view kind = tok.next();
    tok.kind = kind;

    if (!saw_header) {
      if (kind != "RIGBA") {
        throw ParseError(line_number, std::string(kind), "expected 'RIGBA 1' header");
      }
      const long version = tok.parse_int();
      if (version != 1) {
        throw ParseError(line_number, "RIGBA",
                         "unsupported format version " + std::to_string(version));
      }
      tok.expect_end();
      saw_header = true;
      continue;
    }

    if (kind == "STREAM") {
      CameraStream s;
      s.id = static_cast<StreamId>(tok.parse_int());
      s.intrinsics.focal = tok.parse_double();
      s.intrinsics.principal_point.x() = tok.parse_double();
      s.intrinsics.principal_point.y() = tok.parse_double();
      s.intrinsics.radial.x() = tok.parse_double();
      s.intrinsics.radial.y() = tok.parse_double();
      tok.expect_end();
      if (problem.find_stream(s.id) != nullptr) {
        throw ParseError(line_number, "STREAM",
                         "duplicate stream id " + std::to_string(s.id));
      }
      problem.add_stream(s);
    } else if (kind == "IMAGE") {
      ImageRecord im;
      im.id = static_cast<ImageId>(tok.parse_int());
      im.stream_id = static_cast<StreamId>(tok.parse_int());
      im.time_index = static_cast<int>(tok.parse_int());
      Vec3 aa, c;
      for (int i = 0; i < 3; ++i) aa[i] = tok.parse_double();
      for (int i = 0; i < 3; ++i) c[i] = tok.parse_double();
      tok.expect_end();
      im.pose.rotation = Rotation(aa);
      im.pose.center = c;
      if (problem.find_image(im.id) != nullptr) {
        throw ParseError(line_number, "IMAGE",
                         "duplicate image id " + std::to_string(im.id));
      }
      problem.add_image(im);
      image_lines.push_back({problem.images.size() - 1, {line_number, "IMAGE"}});
    } else if (kind == "LANDMARK") {
      LandmarkRecord lm;
      lm.id = static_cast<LandmarkId>(tok.parse_int());
      for (int i = 0; i < 3; ++i) lm.landmark.position[i] = tok.parse_double();
      tok.expect_end();
      if (problem.find_landmark(lm.id) != nullptr) {
        throw ParseError(line_number, "LANDMARK",
                         "duplicate landmark id " + std::to_string(lm.id));
      }
      problem.add_landmark(lm);
    } else if (kind == "OBS") {
      Observation obs;
      obs.image_id = static_cast<ImageId>(tok.parse_int());
      obs.landmark_id = static_cast<LandmarkId>(tok.parse_int());
      obs.pixel.x() = tok.parse_double();
      obs.pixel.y() = tok.parse_double();
      tok.expect_end();
      problem.add_observation(obs);
      obs_lines.push_back({problem.observations.size() - 1, {line_number, "OBS"}});
    } else if (kind == "RIG_PAIR") {
      RigPair pair;
      pair.time_index = static_cast<int>(tok.parse_int());
      pair.image_a = static_cast<ImageId>(tok.parse_int());
      pair.image_b = static_cast<ImageId>(tok.parse_int());
      tok.expect_end();
      for (const RigPair& existing : problem.pairs) {
        if (existing.time_index == pair.time_index) {
          throw ParseError(line_number, "RIG_PAIR",
                           "duplicate time index " + std::to_string(pair.time_index));
        }
      }
      problem.add_pair(pair);
      pair_lines.push_back(
          {static_cast<std::size_t>(pair.time_index), {line_number, "RIG_PAIR"}});
    } else {
      throw ParseError(line_number, std::string(kind), "unknown record kind");
    }
  }
  if (!saw_header) {
    throw ParseError(line_number, "RIGBA", "missing 'RIGBA 1' header");
  }

  // Referential checks once all records are in (any record order is legal).
  for (const auto& [index, ref] : image_lines) {
    const ImageRecord& image = problem.images[index];
    if (problem.find_stream(image.stream_id) == nullptr) {
      throw ParseError(ref.line_number, ref.kind,
                       "unknown stream id " + std::to_string(image.stream_id));
    }
  }
  for (const auto& [index, ref] : obs_lines) {
    const Observation& obs = problem.observations[index];
    if (problem.find_image(obs.image_id) == nullptr) {
      throw ParseError(ref.line_number, ref.kind,
                       "unknown image id " + std::to_string(obs.image_id));
    }
    if (problem.find_landmark(obs.landmark_id) == nullptr) {
      throw ParseError(ref.line_number, ref.kind,
                       "unknown landmark id " + std::to_string(obs.landmark_id));
    }
  }
  for (const auto& [time_index, ref] : pair_lines) {
    const RigPair* pair = nullptr;
    for (const RigPair& candidate : problem.pairs) {
      if (candidate.time_index == static_cast<int>(time_index)) pair = &candidate;
    }
    const ImageRecord* a = problem.find_image(pair->image_a);
    const ImageRecord* b = problem.find_image(pair->image_b);
    if (a == nullptr) {
      throw ParseError(ref.line_number, ref.kind,
                       "unknown image id " + std::to_string(pair->image_a));
    }
    if (b == nullptr) {
      throw ParseError(ref.line_number, ref.kind,
                       "unknown image id " + std::to_string(pair->image_b));
    }
    if (a->stream_id == b->stream_id) {
      throw ParseError(ref.line_number, ref.kind,
                       "pair images must come from distinct streams");
    }
  }

  problem.weights.n_total_pairs = static_cast<int>(problem.pairs.size());
  refresh_pair_counts(problem);
  return problem;
}

RigProblem read_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path + "' for reading");
  }
  return read_problem(in);
}

RigProblem problem_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_problem(in);
}

}  // namespace rigba
