#pragma once

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/metrics.hpp>
#include <hdcap/numeric.hpp>
#include <hdcap/oofsk.hpp>
#include <hdcap/psk.hpp>
#include <hdcap/random.hpp>
#include <hdcap/simcheck.hpp>
#include <hdcap/specfun.hpp>
