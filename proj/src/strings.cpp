#include "bitsi/strings.hpp"

#include <charconv>
#include <cstdio>

namespace bitsi {

std::string fmt_double(double v) {
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
	(void)ec;
	return std::string(buf, ptr);
}

std::string fmt_fixed(double v, int decimals) {
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
	return buf;
}

std::string fmt_trim(double v, int decimals) {
	std::string s = fmt_fixed(v, decimals);
	if (s.find('.') == std::string::npos) return s;
	while (!s.empty() && s.back() == '0') s.pop_back();
	if (!s.empty() && s.back() == '.') s.pop_back();
	if (s == "-0") s = "0";
	return s;
}

} // namespace bitsi
