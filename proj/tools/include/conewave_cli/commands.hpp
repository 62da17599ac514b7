#pragma once

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>

#include "conewave/errors.hpp"
#include "conewave_cli/config.hpp"

namespace conewave::cli {

enum ExitCode : int { kPass = 0, kVerifyFail = 1, kConfigError = 2, kNumericalError = 3 };

// First line of every CSV.
std::string csv_comment(const std::string& hash);

// CSV with the config-hash comment and a column header; numbers as %.17e.
class CsvFile {
public:
    CsvFile(const std::string& dir, const std::string& name, const std::string& hash, const std::string& columns);
    void row(std::initializer_list<double> values);
    std::ofstream& stream() { return os_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream os_;
};

std::string fmt(double x);

// Each command writes its CSVs to e.out_dir and a short report to `log`.
int cmd_spectrum(const ExperimentConfig& e, std::ostream& log);
int cmd_resolvent(const ExperimentConfig& e, std::ostream& log);
int cmd_propagate(const ExperimentConfig& e, std::ostream& log);
int cmd_verify(const ExperimentConfig& e, std::ostream& log);
int cmd_selftest(std::ostream& log, const std::string& data_dir);

// Runs `body`, mapping ConfigError/DomainError to 2 and NumericalError to 3.
template <class F>
int guarded(F&& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
}

}  // namespace conewave::cli
