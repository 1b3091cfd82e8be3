#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace bitsi {

/// Small deterministic generator (splitmix64). Used instead of
/// <random> distributions so generated datasets are byte-identical
/// across standard libraries and platforms.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : state_(seed) {}

	/// Independent stream for a sub-task (e.g. instance index).
	static Rng derive(std::uint64_t seed, std::uint64_t stream) {
		Rng mixer(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
		mixer.next_u64();
		return mixer;
	}

	std::uint64_t next_u64() {
		std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
		return z ^ (z >> 31);
	}

	/// Uniform integer in [lo, hi] inclusive, via rejection sampling.
	int uniform_int(int lo, int hi) {
		const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
		const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
		std::uint64_t v;
		do { v = next_u64(); } while (v >= limit);
		return lo + static_cast<int>(v % span);
	}

	/// Uniform double in [0, 1).
	double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

	/// Uniform double in [lo, hi).
	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Standard normal via Box-Muller.
	double gaussian() {
		double u1;
		do { u1 = uniform(); } while (u1 <= 0.0);
		const double u2 = uniform();
		return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
	}

	/// k distinct values from [1, n], sorted (partial Fisher-Yates).
	std::vector<int> sample_without_replacement(int n, int k);

private:
	std::uint64_t state_;
};

} // namespace bitsi
