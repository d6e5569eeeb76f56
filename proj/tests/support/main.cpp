#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <string_view>

#include "tauspec/log.hpp"

int main(int argc, char** argv) {
  // Warnings from deliberately degenerate inputs would drown the report.
  tauspec::set_warning_sink([](std::string_view) {});
  doctest::Context context(argc, argv);
  return context.run();
}
