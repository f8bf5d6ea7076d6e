#include "scenario.hpp"
