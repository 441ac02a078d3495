#include "wag3d/quantize/schedule.hpp"

#include <sstream>

#include "wag3d/common.hpp"

namespace wag3d {

int64_t ScaleSchedule::total_tokens() const {
    int64_t total = 0;
    for (int k = 1; k <= count(); ++k) total += flat_size(k);
    return total;
}

void ScaleSchedule::validate() const {
    require(!scales.empty(), "schedule needs at least one scale");
    for (const auto& s : scales)
        for (int d : s) require(d >= 1, "scale dimensions must be positive");
    const int64_t final_vol = static_cast<int64_t>(scales.back()[0]) * scales.back()[1] * scales.back()[2];
    bool in_tail = false;
    for (size_t k = 1; k < scales.size(); ++k) {
        int64_t prev = static_cast<int64_t>(scales[k - 1][0]) * scales[k - 1][1] * scales[k - 1][2];
        int64_t cur = static_cast<int64_t>(scales[k][0]) * scales[k][1] * scales[k][2];
        require(cur >= prev, "scale volumes must not decrease");
        if (cur == prev) {
            require(cur == final_vol, "repeated scale volumes are only allowed at the tail");
            in_tail = true;
        } else {
            require(!in_tail, "scale volumes must not grow after a repeat");
        }
        for (int d = 0; d < 3; ++d)
            require(scales[k][static_cast<size_t>(d)] <= scales.back()[static_cast<size_t>(d)],
                    "scale dimensions must not exceed the final scale");
    }
}

ScaleSchedule ScaleSchedule::cubic(const std::vector<int>& sides, InterpMode interp) {
    ScaleSchedule sched;
    sched.interp = interp;
    for (int s : sides) sched.scales.push_back({s, s, s});
    sched.validate();
    return sched;
}

std::string ScaleSchedule::describe() const {
    std::ostringstream os;
    for (size_t k = 0; k < scales.size(); ++k) {
        if (k) os << ',';
        if (scales[k][0] == scales[k][1] && scales[k][1] == scales[k][2]) {
            os << scales[k][0];
        } else {
            os << scales[k][0] << 'x' << scales[k][1] << 'x' << scales[k][2];
        }
    }
    return os.str();
}

} // namespace wag3d
