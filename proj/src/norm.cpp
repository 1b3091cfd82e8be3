#include "bitsi/norm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bitsi::norm {

namespace {

double median_of(std::vector<double>& v) {
	const size_t n = v.size();
	const size_t mid = n / 2;
	std::nth_element(v.begin(), v.begin() + mid, v.end());
	double hi = v[mid];
	if (n % 2 == 1) return hi;
	double lo = *std::max_element(v.begin(), v.begin() + mid);
	return 0.5 * (lo + hi);
}

double median(Eigen::Ref<const Vector> values) {
	std::vector<double> v(values.data(), values.data() + values.size());
	return median_of(v);
}

// Population standard deviation (divisor T).
double population_std(Eigen::Ref<const Vector> values) {
	const double mean = values.mean();
	return std::sqrt((values.array() - mean).square().mean());
}

} // namespace

double sigma_floor(double mu) { return 1e-8 * std::max(1.0, std::abs(mu)); }

LocScale rfn_fit_values(Eigen::Ref<const Vector> values, double alpha, double c_mad) {
	LocScale out;
	out.mu = median(values);
	std::vector<double> dev(values.size());
	for (Eigen::Index i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - out.mu);
	const double mad = median_of(dev);
	const double sd = population_std(values);
	out.sigma = std::max(alpha * mad / c_mad + (1.0 - alpha) * sd, sigma_floor(out.mu));
	return out;
}

NormStats rfn_fit(const TimeSeries& series, double alpha, double c_mad, double kappa) {
	const Eigen::Index n = series.num_vars();
	NormStats stats;
	stats.alpha = alpha;
	stats.c_mad = c_mad;
	stats.kappa = kappa;
	stats.mu.resize(n);
	stats.sigma.resize(n);
	for (Eigen::Index j = 0; j < n; ++j) {
		LocScale ls = rfn_fit_values(series.values.col(j), alpha, c_mad);
		stats.mu[j] = ls.mu;
		stats.sigma[j] = ls.sigma;
	}
	return stats;
}

NormStats std_fit(const TimeSeries& series, double kappa) {
	const Eigen::Index n = series.num_vars();
	NormStats stats;
	stats.alpha = 0.0;
	stats.kappa = kappa;
	stats.mu.resize(n);
	stats.sigma.resize(n);
	for (Eigen::Index j = 0; j < n; ++j) {
		stats.mu[j] = series.values.col(j).mean();
		stats.sigma[j] = std::max(population_std(series.values.col(j)), sigma_floor(stats.mu[j]));
	}
	return stats;
}

NormStats mad_fit(const TimeSeries& series, double c_mad, double kappa) {
	const Eigen::Index n = series.num_vars();
	NormStats stats;
	stats.alpha = 1.0;
	stats.c_mad = c_mad;
	stats.kappa = kappa;
	stats.mu.resize(n);
	stats.sigma.resize(n);
	for (Eigen::Index j = 0; j < n; ++j) {
		LocScale ls = rfn_fit_values(series.values.col(j), 1.0, c_mad);
		stats.mu[j] = ls.mu;
		stats.sigma[j] = ls.sigma;
	}
	return stats;
}

Matrix rfn_normalize(Eigen::Ref<const Matrix> values, const NormStats& stats) {
	if (values.cols() != stats.mu.size())
		throw MetaMismatch("normalize: stats fitted for " + std::to_string(stats.mu.size()) +
		                   " variables, series has " + std::to_string(values.cols()));
	Matrix u(values.rows(), values.cols());
	for (Eigen::Index j = 0; j < values.cols(); ++j) {
		const double denom = stats.kappa * stats.sigma[j];
		u.col(j) = ((values.col(j).array() - stats.mu[j]) / denom).tanh();
	}
	return u;
}

Matrix rfn_normalize(const TimeSeries& series, const NormStats& stats) {
	return rfn_normalize(series.values, stats);
}

Matrix rfn_denormalize(Eigen::Ref<const Matrix> u, const NormStats& stats) {
	if (u.cols() != stats.mu.size())
		throw MetaMismatch("denormalize: stats fitted for " + std::to_string(stats.mu.size()) +
		                   " variables, input has " + std::to_string(u.cols()));
	const double bound = 1.0 - kDenormClampDelta;
	Matrix x(u.rows(), u.cols());
	for (Eigen::Index j = 0; j < u.cols(); ++j) {
		const double scale = stats.kappa * stats.sigma[j];
		x.col(j) = u.col(j).array().min(bound).max(-bound).atanh() * scale + stats.mu[j];
	}
	return x;
}

} // namespace bitsi::norm
