#include "bitsi/rng.hpp"

#include <algorithm>
#include <numeric>

namespace bitsi {

std::vector<int> Rng::sample_without_replacement(int n, int k) {
	std::vector<int> pool(n);
	std::iota(pool.begin(), pool.end(), 1);
	for (int i = 0; i < k; ++i) {
		const int j = uniform_int(i, n - 1);
		std::swap(pool[i], pool[j]);
	}
	pool.resize(k);
	std::sort(pool.begin(), pool.end());
	return pool;
}

} // namespace bitsi
