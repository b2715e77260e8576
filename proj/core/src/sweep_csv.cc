// Copyright 2026 The LPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "lppm/experiment.h"

namespace lppm {
namespace {

std::string FormatValue(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.17g", v);
}

bool ParseValue(absl::string_view text, double* out) {
  if (text == "nan") {
    *out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (text == "inf") {
    *out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (text == "-inf") {
    *out = -std::numeric_limits<double>::infinity();
    return true;
  }
  return absl::SimpleAtod(text, out);
}

bool SameValue(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool SameCsvContent(const SweepRow& a, const SweepRow& b) {
  return a.mechanism == b.mechanism && SameValue(a.param, b.param) &&
         SameValue(a.report.q_avg, b.report.q_avg) &&
         SameValue(a.report.q_wc, b.report.q_wc) &&
         SameValue(a.report.p_ae, b.report.p_ae) &&
         SameValue(a.report.p_ce, b.report.p_ce) &&
         SameValue(a.report.p_gi, b.report.p_gi) &&
         SameValue(a.report.p_wc_ae, b.report.p_wc_ae) &&
         SameValue(a.report.p_wc_ce, b.report.p_wc_ce) &&
         a.provenance == b.provenance;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, uint64_t spec_hash,
                   uint64_t seed, std::ostream& out) {
  out << absl::StrFormat("# lppm sweep spec=%016x seed=%d\n", spec_hash, seed);
  out << kSweepCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    const MetricReport& m = r.report;
    out << absl::StrCat(r.mechanism, ",", FormatValue(r.param), ",",
                        FormatValue(m.q_avg), ",", FormatValue(m.q_wc), ",",
                        FormatValue(m.p_ae), ",", FormatValue(m.p_ce), ",",
                        FormatValue(m.p_gi), ",", FormatValue(m.p_wc_ae), ",",
                        FormatValue(m.p_wc_ce), ",", r.provenance, "\n");
  }
}

absl::Status WriteSweepCsvFile(const std::vector<SweepRow>& rows,
                               uint64_t spec_hash, uint64_t seed,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  WriteSweepCsv(rows, spec_hash, seed, out);
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("error writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SweepRow>> ReadSweepCsv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view text = absl::StripTrailingAsciiWhitespace(line);
    if (text.empty() || text[0] == '#') continue;
    if (!header) {
      if (text != kSweepCsvHeader) {
        return absl::InvalidArgumentError("missing sweep CSV header");
      }
      header = true;
      continue;
    }
    std::vector<absl::string_view> f = absl::StrSplit(text, ',');
    if (f.size() != 10) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, " has ", f.size(), " fields"));
    }
    SweepRow r;
    r.mechanism = std::string(f[0]);
    MetricReport& m = r.report;
    double* fields[] = {&r.param, &m.q_avg,  &m.q_wc,    &m.p_ae,
                        &m.p_ce,  &m.p_gi,   &m.p_wc_ae, &m.p_wc_ce};
    for (int i = 0; i < 8; ++i) {
      if (!ParseValue(f[i + 1], fields[i])) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": bad number '", f[i + 1], "'"));
      }
    }
    r.provenance = std::string(f[9]);
    m.monte_carlo = r.provenance.rfind("mc(", 0) == 0;
    rows.push_back(std::move(r));
  }
  if (!header) return absl::InvalidArgumentError("missing sweep CSV header");
  return rows;
}

}  // namespace lppm
