// Runs one emitted kernel over a whole grid.
//
// fft kernels:       driver threads groups in out len p0..p7
// transpose kernels: driver threads groups in out len
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

#include KERNEL_FILE

// The shim erases the `thread` address space; std::thread needs its name back.
#undef thread

using metal::float2;

static std::vector<float2> read_all(const char* path, size_t len) {
    std::vector<float2> v(len);
    FILE* f = std::fopen(path, "rb");
    if (!f || std::fread(v.data(), sizeof(float2), len, f) != len) std::exit(3);
    std::fclose(f);
    return v;
}

int main(int argc, char** argv) {
    if (argc < 6) return 2;
    const uint threads = std::atoi(argv[1]);
    const uint groups = std::atoi(argv[2]);
    const size_t len = std::atol(argv[5]);
    std::vector<float2> src = read_all(argv[3], len);
    std::vector<float2> dst(len, float2(0.0f, 0.0f));
#ifdef TRANSPOSE
    for (uint gid = 0; gid < threads * groups; ++gid) ENTRY(src.data(), dst.data(), gid);
#else
    if (argc < 14) return 2;
    FftParams params;
    uint* p = &params.src.group;
    for (int i = 0; i < 8; ++i) p[i] = std::atoi(argv[6 + i]);
    std::barrier<> sync(threads);
    metal::host_barrier = &sync;
    std::vector<std::thread> pool;
    for (uint tid = 0; tid < threads; ++tid) {
        pool.emplace_back([&, tid] {
            for (uint tg = 0; tg < groups; ++tg) {
                ENTRY(src.data(), dst.data(), params, tid, tg);
                sync.arrive_and_wait();
            }
        });
    }
    for (auto& t : pool) t.join();
#endif
    FILE* f = std::fopen(argv[4], "wb");
    if (!f || std::fwrite(dst.data(), sizeof(float2), len, f) != len) return 3;
    std::fclose(f);
    return 0;
}
