#pragma once

#include "crx/error.hpp"
#include "crx/text.hpp"
#include "crx/csv.hpp"
#include "crx/levenshtein.hpp"
#include "crx/union_find.hpp"
#include "crx/reference.hpp"
#include "crx/dataset.hpp"
#include "crx/wos_import.hpp"
#include "crx/spectroscopy.hpp"
#include "crx/disambiguation.hpp"
#include "crx/workspace.hpp"
