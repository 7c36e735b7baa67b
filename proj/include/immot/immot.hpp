#pragma once

#include "immot/core_types.hpp"
#include "immot/box_iou.hpp"
#include "immot/motion_models.hpp"
#include "immot/kalman.hpp"
#include "immot/imm.hpp"
#include "immot/hungarian.hpp"
#include "immot/road_context.hpp"
#include "immot/association.hpp"
#include "immot/track_manager.hpp"
#include "immot/simulator.hpp"
#include "immot/clear_mot.hpp"
#include "immot/pipeline.hpp"
#include "immot/io.hpp"
