#pragma once

#define KDVBS_VERSION_MAJOR 0
#define KDVBS_VERSION_MINOR 1
#define KDVBS_VERSION_PATCH 0
#define KDVBS_VERSION_STRING "0.1.0"
