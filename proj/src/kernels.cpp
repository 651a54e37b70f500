#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "hls/common.hpp"
#include "hls/kernels.hpp"

namespace hls::kernels {
namespace {

const Ops* pick_default() {
    if (const char* env = std::getenv("HLS_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops* a = avx2_ops()) return a;
            return &scalar_ops();
        }
    }
    if (const Ops* a = avx2_ops()) return a;
    return &scalar_ops();
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& active() {
    const Ops* cur = g_active.load(std::memory_order_acquire);
    if (!cur) {
        cur = pick_default();
        g_active.store(cur, std::memory_order_release);
    }
    return *cur;
}

void force(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar_ops(), std::memory_order_release);
        return;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (const Ops* a = avx2_ops()) {
            g_active.store(a, std::memory_order_release);
            return;
        }
        throw ConfigError("kernels: avx2 variant not available on this CPU");
    }
    throw ConfigError(std::string("kernels: unknown variant '") + name + "'");
}

}  // namespace hls::kernels
