// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "pvlff/scene_generator.hpp"

namespace pvlff {

// Text description of a synthetic scene, one `key = value` per line
// ('#' comments, blank lines allowed). Scalar keys appear at most once:
//
//   width = 64            height = 64          embed_width = 16
//   bbox = -2 -2 -1  2 2 2                     # lo xyz, hi xyz
//   orbit_target = 0 0 0  orbit_radius = 2.5   orbit_height = 1.2
//   orbit_views = 24      fov_deg = 60
//   embed_noise = 0.05    split_prob = 0.5     drop_prob = 0.2
//   erosion_radius = 1    multi_level = true
//
// Repeatable keys build the class table and geometry. Classes must be
// declared before the primitives that use them; class 0 is the background:
//
//   class = background stuff
//   class = mug thing
//   sphere = mug 1 0  0.2 0 0.1  0.3      # class instance parent center radius
//   box = mug 2 1  0 0 0  0.4 0.4 0.3     # class instance parent center full edges
SyntheticSceneSpec parse_scene_spec(std::istream& in, const std::string& context);
SyntheticSceneSpec read_scene_spec_file(const std::string& path);

}  // namespace pvlff
