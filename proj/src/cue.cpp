#include "symidx/cue.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "symidx/io.hpp"

namespace symidx {

namespace {

constexpr int kMaxRetries = 64;

}  // namespace

CMatrix haar_unitary(int N, Rng& rng, int* retries) {
  if (N < 1) throw ValidationError("sample_cue: N must be >= 1");
  int attempts = 0;
  for (;;) {
    CMatrix Z(N, N);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) Z(i, j) = rng.complex_normal();

    Eigen::HouseholderQR<CMatrix> qr(Z);
    const CMatrix& packed = qr.matrixQR();
    double max_diag = 0.0;
    double min_diag = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) {
      const double a = std::abs(packed(j, j));
      max_diag = std::max(max_diag, a);
      min_diag = std::min(min_diag, a);
    }
    if (!(min_diag > 1e-12 * max_diag)) {
      if (++attempts > kMaxRetries) throw NumericalError("sample_cue: repeated degenerate draws");
      continue;
    }
    if (retries) *retries = attempts;
    CMatrix Q = qr.householderQ();
    for (int j = 0; j < N; ++j) {
      const cplx d = packed(j, j);
      Q.col(j) *= d / std::abs(d);
    }
    return Q;
  }
}

SpectrumSample sample_cue(int N, Rng& rng) {
  SpectrumSample sample;
  sample.seed_path.seed = rng.seed();
  sample.seed_path.stream = rng.stream();
  const CMatrix U = haar_unitary(N, rng, &sample.seed_path.retries);
  if (N == 1) {
    sample.points = CVector::Constant(1, U(0, 0) / std::abs(U(0, 0)));
    return sample;
  }
  Eigen::ComplexEigenSolver<CMatrix> solver(U, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("sample_cue: eigensolver failed");
  sample.points = solver.eigenvalues();
  for (Eigen::Index n = 0; n < sample.points.size(); ++n)
    sample.points[n] /= std::abs(sample.points[n]);
  return sample;
}

std::vector<SpectrumSample> sample_batch(int N, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("sample_batch: count must be >= 1");
  std::vector<SpectrumSample> batch;
  batch.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, i);
    batch.push_back(sample_cue(N, rng));
  }
  return batch;
}

void write_samples_csv(std::ostream& out, const std::vector<SpectrumSample>& samples) {
  if (samples.empty()) return;
  const Eigen::Index N = samples.front().points.size();
  for (Eigen::Index n = 1; n <= N; ++n) {
    if (n > 1) out << ',';
    out << "re_" << n << ",im_" << n;
  }
  out << '\n';
  for (const auto& s : samples) {
    if (s.points.size() != N) throw ValidationError("write_samples_csv: ragged batch");
    for (Eigen::Index n = 0; n < N; ++n) {
      if (n > 0) out << ',';
      out << format_double(s.points[n].real()) << ',' << format_double(s.points[n].imag());
    }
    out << '\n';
  }
}

std::vector<SpectrumSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("read_samples_csv: empty input");
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns % 2 != 0) throw ValidationError("read_samples_csv: odd column count");
  std::vector<SpectrumSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(parse_double(cell));
    if (static_cast<Eigen::Index>(values.size()) != columns)
      throw ValidationError("read_samples_csv: wrong number of columns");
    SpectrumSample s;
    s.points.resize(columns / 2);
    for (Eigen::Index n = 0; n < columns / 2; ++n) s.points[n] = {values[2 * n], values[2 * n + 1]};
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace symidx
