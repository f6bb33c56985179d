#pragma once

#include "scorebin/applications.hpp"
#include "scorebin/error.hpp"
#include "scorebin/image.hpp"
#include "scorebin/io.hpp"
#include "scorebin/parallel.hpp"
#include "scorebin/sauvola.hpp"
#include "scorebin/windowed_stats.hpp"
