#pragma once

#include <cstdlib>
#include <string>

#ifndef DYNSP_FIXTURE_DIR
#define DYNSP_FIXTURE_DIR "tests/fixtures"
#endif

inline std::string fixture(const std::string& name) {
    const char* dir = std::getenv("DYNSP_FIXTURES");
    return std::string(dir && *dir ? dir : DYNSP_FIXTURE_DIR) + "/" + name;
}
