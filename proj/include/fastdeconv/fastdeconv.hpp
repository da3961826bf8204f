#pragma once

#include "fastdeconv/bench.hpp"
#include "fastdeconv/convolve.hpp"
#include "fastdeconv/image.hpp"
#include "fastdeconv/pgm.hpp"
#include "fastdeconv/psf.hpp"
#include "fastdeconv/rl.hpp"
