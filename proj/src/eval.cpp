#include "bitsi/eval.hpp"

#include <algorithm>
#include <cmath>

#include "bitsi/layout.hpp"

namespace bitsi::eval {

std::optional<double> mase(Eigen::Ref<const Vector> pred, Eigen::Ref<const Vector> target,
                           Eigen::Ref<const Vector> insample, int periodicity) {
	if (pred.size() != target.size())
		throw LengthMismatch("prediction has " + std::to_string(pred.size()) + " points, target has " +
		                     std::to_string(target.size()));
	if (insample.size() < 2 * periodicity)
		throw LengthMismatch("insample must cover at least two cycles");
	const Eigen::Index diffs = insample.size() - periodicity;
	const double scale =
	    (insample.tail(diffs) - insample.head(diffs)).cwiseAbs().mean();
	if (scale < kDegenerateScale) return std::nullopt;
	return (pred - target).cwiseAbs().mean() / scale;
}

NmaseResult nmase(const std::vector<std::optional<double>>& model,
                  const std::vector<std::optional<double>>& naive) {
	if (model.size() != naive.size()) throw LengthMismatch("result vectors differ in length");
	NmaseResult out;
	double log_sum = 0.0;
	double ratio_sum = 0.0;
	for (size_t i = 0; i < model.size(); ++i) {
		if (!model[i] || !naive[i] || *naive[i] < kDegenerateScale) {
			out.excluded += 1;
			continue;
		}
		const double ratio = *model[i] / *naive[i];
		log_sum += std::log(ratio);
		ratio_sum += ratio;
		out.n_used += 1;
	}
	if (out.n_used == 0) throw EmptyIntersection("no instance usable by both result sets");
	out.geometric = std::exp(log_sum / out.n_used);
	out.arithmetic = ratio_sum / out.n_used;
	return out;
}

Vector baseline_naive_forecast(Eigen::Ref<const Vector> context, int periodicity, int horizon) {
	if (context.size() < periodicity) throw LengthMismatch("context shorter than one cycle");
	Vector out(horizon);
	const Eigen::Index base = context.size() - periodicity;
	for (int t = 0; t < horizon; ++t) out[t] = context[base + t % periodicity];
	return out;
}

Matrix baseline_nearest_impute(const GappySeries& series) {
	const Eigen::Index t_len = series.values.rows();
	const Eigen::Index n = series.values.cols();
	Matrix out = series.values;
	for (Eigen::Index v = 0; v < n; ++v) {
		std::vector<Eigen::Index> obs;
		for (Eigen::Index t = 0; t < t_len; ++t)
			if (series.observed(t, v)) obs.push_back(t);
		if (obs.empty()) throw AllMissing("variable " + std::to_string(v + 1) + " has no observed point");
		for (Eigen::Index t = 0; t < t_len; ++t) {
			if (series.observed(t, v)) continue;
			auto it = std::lower_bound(obs.begin(), obs.end(), t);
			Eigen::Index pick;
			if (it == obs.begin()) {
				pick = *it;
			} else if (it == obs.end()) {
				pick = *(it - 1);
			} else {
				const Eigen::Index after = *it;
				const Eigen::Index before = *(it - 1);
				// Ties go to the earlier neighbor.
				pick = (t - before) <= (after - t) ? before : after;
			}
			out(t, v) = series.values(pick, v);
		}
	}
	return out;
}

Matrix baseline_linear_impute(const GappySeries& series) {
	const Eigen::Index t_len = series.values.rows();
	const Eigen::Index n = series.values.cols();
	Matrix out = series.values;
	for (Eigen::Index v = 0; v < n; ++v) {
		std::vector<Eigen::Index> obs;
		for (Eigen::Index t = 0; t < t_len; ++t)
			if (series.observed(t, v)) obs.push_back(t);
		if (obs.empty()) throw AllMissing("variable " + std::to_string(v + 1) + " has no observed point");
		for (Eigen::Index t = 0; t < t_len; ++t) {
			if (series.observed(t, v)) continue;
			auto it = std::lower_bound(obs.begin(), obs.end(), t);
			if (it == obs.begin()) {
				out(t, v) = series.values(obs.front(), v);
			} else if (it == obs.end()) {
				out(t, v) = series.values(obs.back(), v);
			} else {
				const Eigen::Index hi = *it;
				const Eigen::Index lo = *(it - 1);
				// Multiply before dividing: exact on affine segments whose
				// slope-times-gap is representable.
				out(t, v) = series.values(lo, v) +
				            (series.values(hi, v) - series.values(lo, v)) * double(t - lo) /
				                double(hi - lo);
			}
		}
	}
	return out;
}

namespace {

/// Nearest visible cycle to the left of `cycle`, else nearest to the
/// right. 1-based; throws AllMasked when the variable has none.
int source_cycle(const MaskSpec& mask, int var_1b, int cycle_1b, int total_cycles) {
	for (int j = cycle_1b - 1; j >= 1; --j)
		if (!mask.is_masked(var_1b, j)) return j;
	for (int j = cycle_1b + 1; j <= total_cycles; ++j)
		if (!mask.is_masked(var_1b, j)) return j;
	throw AllMasked("variable " + std::to_string(var_1b) + " has no visible cycle");
}

} // namespace

TsImage baseline_copycycle_inpaint(const TsImage& masked_image, const InstanceMeta& meta) {
	const LayoutSpec& lay = meta.layout;
	if (masked_image.height() != lay.image_height || masked_image.width() != lay.image_width)
		throw MetaMismatch("inpaint: image does not match the layout");
	TsImage out = masked_image;
	for (int v = 1; v <= lay.num_vars; ++v) {
		const auto [y1, y2] = layout::var_y_range(v, lay.image_height, lay.num_vars);
		for (int j : meta.mask.masked_cycles[v - 1]) {
			const int src = source_cycle(meta.mask, v, j, lay.total_cycles);
			const auto [dx1, dx2] = layout::cycle_x_span(j, lay);
			const auto [sx1, sx2] = layout::cycle_x_span(src, lay);
			const int dw = dx2 - dx1 + 1;
			const int sw = sx2 - sx1 + 1;
			for (int c = 0; c < 3; ++c) {
				Matrix& plane = out.channel(c);
				const Matrix& src_plane = masked_image.channel(c);
				// Spans can differ by one column; map columns by relative
				// position (nearest neighbor). Within a cycle every column of
				// a block is constant, so this is exact for our own renders.
				for (int x = 0; x < dw; ++x) {
					const int sx = sx1 + std::min(sw - 1, (x * sw) / dw);
					plane.block(y1, dx1 + x, y2 - y1 + 1, 1) =
					    src_plane.block(y1, sx, y2 - y1 + 1, 1);
				}
			}
		}
	}
	return out;
}

// ---------------------------------------------------------------------------

Matrix naive_prediction(const TimeSeries& truth, const InstanceMeta& meta) {
	const int f = meta.periodicity;
	const int c = meta.layout.total_cycles;
	Matrix pred = truth.values;
	for (int v = 1; v <= meta.layout.num_vars; ++v) {
		for (int j : meta.mask.masked_cycles[v - 1]) {
			const int src = source_cycle(meta.mask, v, j, c);
			pred.col(v - 1).segment(static_cast<Eigen::Index>(j - 1) * f, f) =
			    truth.values.col(v - 1).segment(static_cast<Eigen::Index>(src - 1) * f, f);
		}
	}
	return pred;
}

namespace {

/// Seasonal scale over the visible part of one variable: mean
/// |x[t] - x[t-f]| over t where both endpoints are visible.
std::optional<double> visible_scale(const TimeSeries& truth, const MaskSpec& mask, int var_1b, int f) {
	const Eigen::Index t_len = truth.length();
	double sum = 0.0;
	int count = 0;
	for (Eigen::Index t = f; t < t_len; ++t) {
		const int cycle_hi = static_cast<int>(t) / f + 1;
		const int cycle_lo = static_cast<int>(t - f) / f + 1;
		if (mask.is_masked(var_1b, cycle_hi) || mask.is_masked(var_1b, cycle_lo)) continue;
		sum += std::abs(truth.values(t, var_1b - 1) - truth.values(t - f, var_1b - 1));
		count += 1;
	}
	if (count == 0) return std::nullopt;
	const double scale = sum / count;
	if (scale < kDegenerateScale) return std::nullopt;
	return scale;
}

std::optional<double> masked_mase(const TimeSeries& truth, const InstanceMeta& meta,
                                  const Matrix& prediction) {
	const int f = meta.periodicity;
	double ratio_sum = 0.0;
	int vars_used = 0;
	for (int v = 1; v <= meta.layout.num_vars; ++v) {
		const auto scale = visible_scale(truth, meta.mask, v, f);
		if (!scale) continue;
		double err = 0.0;
		int count = 0;
		for (int j : meta.mask.masked_cycles[v - 1]) {
			const Eigen::Index offset = static_cast<Eigen::Index>(j - 1) * f;
			err += (prediction.col(v - 1).segment(offset, f) - truth.values.col(v - 1).segment(offset, f))
			           .cwiseAbs()
			           .sum();
			count += f;
		}
		if (count == 0) continue;
		ratio_sum += (err / count) / *scale;
		vars_used += 1;
	}
	if (vars_used == 0) return std::nullopt;
	return ratio_sum / vars_used;
}

} // namespace

InstanceResult score_instance_values(const std::string& id, const TimeSeries& truth,
                                     const InstanceMeta& meta, const Matrix& prediction) {
	if (prediction.rows() != truth.length() || prediction.cols() != truth.num_vars())
		throw LengthMismatch("prediction shape does not match the ground truth");
	InstanceResult out;
	out.id = id;
	out.mase_model = masked_mase(truth, meta, prediction);
	out.mase_naive = masked_mase(truth, meta, naive_prediction(truth, meta));
	long masked = 0;
	for (int v = 1; v <= meta.layout.num_vars; ++v) masked += meta.mask.masked_timesteps(v, meta.periodicity);
	out.mask_ratio = double(masked) / double(truth.length() * truth.num_vars());
	out.prediction_length = meta.mask.prediction_length;
	return out;
}

std::string ratio_bucket(double ratio) {
	if (ratio < 0.2) return "[0.1,0.2)";
	if (ratio < 0.3) return "[0.2,0.3)";
	if (ratio < 0.4) return "[0.3,0.4)";
	return "[0.4,0.5]";
}

std::string horizon_bucket(int prediction_length) {
	if (prediction_length <= 48) return "short-term";
	if (prediction_length <= 288) return "med-term";
	return "long-term";
}

} // namespace bitsi::eval
