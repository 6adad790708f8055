#pragma once

#include "umodem/channel.hpp"
#include "umodem/error.hpp"
#include "umodem/eval.hpp"
#include "umodem/fft.hpp"
#include "umodem/fsk.hpp"
#include "umodem/payload.hpp"
#include "umodem/psk.hpp"
#include "umodem/signal.hpp"
#include "umodem/spectrum.hpp"
#include "umodem/wav.hpp"
