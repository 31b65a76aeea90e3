// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "duplex/blend.hpp"
#include "duplex/camera.hpp"
#include "duplex/config.hpp"
#include "duplex/core.hpp"
#include "duplex/decoder.hpp"
#include "duplex/image.hpp"
#include "duplex/metrics.hpp"
#include "duplex/projection.hpp"
#include "duplex/raster.hpp"
#include "duplex/render.hpp"
#include "duplex/scene.hpp"
#include "duplex/scene_gen.hpp"
#include "duplex/scene_io.hpp"
