// Least-squares convergence rate from a CSV column pair.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hcfm_cli/csv.hpp"
#include "hermite_cfm/error.hpp"
#include "hermite_cfm/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fit log(error) against log(h) from a study CSV"};
  std::string path, x = "h", y = "error";
  std::size_t pairs = 2;
  app.add_option("csv", path, "CSV file")->required();
  app.add_option("--x", x, "abscissa column");
  app.add_option("--y", y, "error column");
  app.add_option("--pairs", pairs, "finest consecutive pairs in the fit");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto t = hcfm::cli::read_csv(path);
    const auto fit = hcfm::fit_rate(t.column_values(x), t.column_values(y), pairs);
    std::cout << "rate " << hcfm::cli::format_number(fit.slope) << '\n';
    for (std::size_t i = 0; i < fit.pair_rates.size(); ++i)
      std::cout << "pair " << i << ' ' << hcfm::cli::format_number(fit.pair_rates[i]) << '\n';
  } catch (const hcfm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
