#pragma once

#include "h00t/analysis.hpp"
#include "h00t/bench.hpp"
#include "h00t/bytes.hpp"
#include "h00t/collider.hpp"
#include "h00t/crypto.hpp"
#include "h00t/entropy.hpp"
#include "h00t/feedsim.hpp"
#include "h00t/permutation.hpp"
#include "h00t/scenario.hpp"
#include "h00t/tagcrypt.hpp"
#include "h00t/wirecodec.hpp"
