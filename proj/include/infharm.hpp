#pragma once

#include "infharm/catalogue.hpp"
#include "infharm/coords.hpp"
#include "infharm/errors.hpp"
#include "infharm/gridio.hpp"
#include "infharm/profiles.hpp"
#include "infharm/solutions.hpp"
#include "infharm/verify.hpp"
