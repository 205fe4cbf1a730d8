use std::f64::consts::PI;
use std::fmt::Write;

use crate::plan::{BufferStrategy, Exchange, FftPlan, StageAddressing, TwiddlePolicy};

const BARRIER: &str = "threadgroup_barrier(mem_flags::mem_threadgroup);";

const PRELUDE: &str = "#include <metal_stdlib>
using namespace metal;

static inline float2 cmul(float2 a, float2 b) {
    return float2(a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x);
}

static inline float2 mul_neg_i(float2 a) {
    return float2(a.y, -a.x);
}
";

const LAYOUT: &str = "
struct Layout {
    uint group;
    uint group_stride;
    uint lane_stride;
    uint elem_stride;
};

struct FftParams {
    Layout src;
    Layout dst;
};

static inline uint layout_base(constant Layout& l, uint tg) {
    return (tg / l.group) * l.group_stride + (tg % l.group) * l.lane_stride;
}
";

const RADIX2: &str = "
static inline void radix2(thread float2* v) {
    const float2 t = v[0];
    v[0] = t + v[1];
    v[1] = t - v[1];
}
";

const RADIX4: &str = "
static inline void radix4(thread float2* v) {
    const float2 a0 = v[0] + v[2];
    const float2 a1 = v[0] - v[2];
    const float2 a2 = v[1] + v[3];
    const float2 a3 = mul_neg_i(v[1] - v[3]);
    v[0] = a0 + a2;
    v[1] = a1 + a3;
    v[2] = a0 - a2;
    v[3] = a1 - a3;
}
";

// Split-radix: two radix-4 halves, odd outputs rotated by W8^1..W8^3.
const RADIX8: &str = "
constant float kSqrtHalf = 0.707106781186547524f;

static inline void radix8(thread float2* v) {
    float2 e[4] = { v[0], v[2], v[4], v[6] };
    float2 o[4] = { v[1], v[3], v[5], v[7] };
    radix4(e);
    radix4(o);
    const float2 o1 = kSqrtHalf * float2(o[1].x + o[1].y, o[1].y - o[1].x);
    const float2 o2 = mul_neg_i(o[2]);
    const float2 o3 = kSqrtHalf * float2(o[3].y - o[3].x, -(o[3].x + o[3].y));
    v[0] = e[0] + o[0];
    v[4] = e[0] - o[0];
    v[1] = e[1] + o1;
    v[5] = e[1] - o1;
    v[2] = e[2] + o2;
    v[6] = e[2] - o2;
    v[3] = e[3] + o3;
    v[7] = e[3] - o3;
}
";

/// An f32 literal that round-trips.
fn float_lit(x: f64) -> String {
    format!("{:?}f", x as f32)
}

fn buffer_name(plan: &FftPlan, stage: usize) -> String {
    match plan.buffer_strategy {
        BufferStrategy::RegisterTiledSingleBuffer => "buf".into(),
        BufferStrategy::DoubleBuffer => format!("buf{}", stage % 2),
    }
}

pub(super) fn fft_kernel(plan: &FftPlan, entry: &str) -> String {
    let radices = plan.radices();
    let mut out = String::new();
    let strategy = match plan.buffer_strategy {
        BufferStrategy::RegisterTiledSingleBuffer => "register-tiled single buffer",
        BufferStrategy::DoubleBuffer => "double buffer",
    };
    let shape: Vec<String> = radices.iter().map(|r| r.to_string()).collect();
    writeln!(out, "// {}-point forward FFT, radices {}, {} threads.", plan.n, shape.join("-"), plan.threads).unwrap();
    writeln!(out, "// Stockham autosort, {strategy}, {} threadgroup barriers.", plan.barrier_count).unwrap();
    out.push_str(PRELUDE);
    out.push_str(LAYOUT);
    if radices.contains(&2) {
        out.push_str(RADIX2);
    }
    if radices.contains(&4) || radices.contains(&8) {
        out.push_str(RADIX4);
    }
    if radices.contains(&8) {
        out.push_str(RADIX8);
    }

    let pad = " ".repeat("kernel void ".len() + entry.len() + 1);
    writeln!(out).unwrap();
    writeln!(out, "[[max_total_threads_per_threadgroup({})]]", plan.threads).unwrap();
    writeln!(out, "kernel void {entry}(device const float2* src [[buffer(0)]],").unwrap();
    writeln!(out, "{pad}device float2* dst [[buffer(1)]],").unwrap();
    writeln!(out, "{pad}constant FftParams& params [[buffer(2)]],").unwrap();
    writeln!(out, "{pad}uint tid [[thread_index_in_threadgroup]],").unwrap();
    writeln!(out, "{pad}uint tg [[threadgroup_position_in_grid]])").unwrap();
    writeln!(out, "{{").unwrap();
    match plan.threadgroup_buffers() {
        0 => {}
        1 => writeln!(out, "    threadgroup float2 buf[{}];", plan.n).unwrap(),
        _ => {
            writeln!(out, "    threadgroup float2 buf0[{}];", plan.n).unwrap();
            writeln!(out, "    threadgroup float2 buf1[{}];", plan.n).unwrap();
        }
    }
    writeln!(out, "    const uint src_base = layout_base(params.src, tg);").unwrap();
    writeln!(out, "    const uint dst_base = layout_base(params.dst, tg);").unwrap();

    let last = plan.stages.len() - 1;
    for (s, stage) in plan.stages.iter().enumerate() {
        let a = plan.addressing(s);
        let from_tg = stage.exchange == Exchange::Threadgroup;
        writeln!(out).unwrap();
        if from_tg {
            writeln!(out, "    {BARRIER}").unwrap();
        }
        let dest = if s == last { "device" } else { "threadgroup" };
        let source = if from_tg { "threadgroup" } else { "device" };
        writeln!(out, "    // stage {s}: radix {}, span {}, {source} -> {dest}", a.radix, a.span).unwrap();
        writeln!(out, "    {{").unwrap();
        stage_body(&mut out, plan, s, &a, stage.twiddle_policy);
        writeln!(out, "    }}").unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

fn stage_body(out: &mut String, plan: &FftPlan, s: usize, a: &StageAddressing, policy: TwiddlePolicy) {
    let radix = a.radix;
    let butterflies = a.butterflies();
    let threads = plan.threads;
    let per_thread = butterflies.div_ceil(threads);
    let guard = per_thread * threads > butterflies;
    let from_tg = plan.stages[s].exchange == Exchange::Threadgroup;
    let to_device = s + 1 == plan.stages.len();

    let loop_head = |out: &mut String| {
        writeln!(out, "        for (uint i = 0; i < {per_thread}u; ++i) {{").unwrap();
        writeln!(out, "            const uint j = tid + i * {threads}u;").unwrap();
        if guard {
            writeln!(out, "            if (j >= {butterflies}u) {{ continue; }}").unwrap();
        }
    };

    writeln!(out, "        float2 v[{per_thread}][{radix}];").unwrap();
    loop_head(out);
    for r in 0..radix {
        let idx = a.input_index_expr("j", r);
        if from_tg {
            writeln!(out, "            v[i][{r}] = {}[{idx}];", buffer_name(plan, s - 1)).unwrap();
        } else {
            writeln!(out, "            v[i][{r}] = src[src_base + ({idx}) * params.src.elem_stride];").unwrap();
        }
    }
    writeln!(out, "        }}").unwrap();
    if from_tg && plan.buffer_strategy == BufferStrategy::RegisterTiledSingleBuffer {
        writeln!(out, "        {BARRIER}").unwrap();
    }

    loop_head(out);
    if a.span > 1 {
        let step = -2.0 * PI / a.twiddle_order() as f64;
        writeln!(out, "            const uint k = {};", a.twiddle_exponent_expr("j")).unwrap();
        match policy {
            TwiddlePolicy::ChainedSingleSincos => {
                writeln!(out, "            float c;").unwrap();
                writeln!(out, "            const float s = precise::sincos({} * float(k), c);", float_lit(step)).unwrap();
                writeln!(out, "            const float2 w1 = float2(c, s);").unwrap();
                writeln!(out, "            float2 w = w1;").unwrap();
                for r in 1..radix {
                    if r > 1 {
                        writeln!(out, "            w = cmul(w, w1);").unwrap();
                    }
                    writeln!(out, "            v[i][{r}] = cmul(v[i][{r}], w);").unwrap();
                }
            }
            TwiddlePolicy::Direct => {
                for r in 1..radix {
                    writeln!(out, "            {{").unwrap();
                    writeln!(out, "                float c;").unwrap();
                    writeln!(
                        out,
                        "                const float s = precise::sincos({} * float(k * {r}u), c);",
                        float_lit(step)
                    )
                    .unwrap();
                    writeln!(out, "                v[i][{r}] = cmul(v[i][{r}], float2(c, s));").unwrap();
                    writeln!(out, "            }}").unwrap();
                }
            }
        }
    }
    writeln!(out, "            radix{radix}(v[i]);").unwrap();
    writeln!(out, "            const uint o = {};", a.output_base_expr("j", "k")).unwrap();
    for r in 0..radix {
        let idx = a.output_index_expr("o", r);
        if to_device {
            writeln!(out, "            dst[dst_base + ({idx}) * params.dst.elem_stride] = v[i][{r}];").unwrap();
        } else {
            writeln!(out, "            {}[{idx}] = v[i][{r}];", buffer_name(plan, s)).unwrap();
        }
    }
    writeln!(out, "        }}").unwrap();
}

/// Transposes each `rows × cols` matrix of a batch, optionally scaling
/// element `(r, c)` by `W_{rows·cols}^{rc}` on the way.
pub(super) fn transpose_kernel(rows: usize, cols: usize, twiddle: bool, entry: &str) -> String {
    let n = rows * cols;
    let threads = super::TRANSPOSE_THREADS.min(n);
    let mut out = String::new();
    if twiddle {
        writeln!(out, "// Twiddle-scaling transpose of {rows} x {cols} matrices, one element per thread.").unwrap();
    } else {
        writeln!(out, "// Transpose of {rows} x {cols} matrices, one element per thread.").unwrap();
    }
    out.push_str(PRELUDE);
    let pad = " ".repeat("kernel void ".len() + entry.len() + 1);
    writeln!(out).unwrap();
    writeln!(out, "[[max_total_threads_per_threadgroup({threads})]]").unwrap();
    writeln!(out, "kernel void {entry}(device const float2* src [[buffer(0)]],").unwrap();
    writeln!(out, "{pad}device float2* dst [[buffer(1)]],").unwrap();
    writeln!(out, "{pad}uint gid [[thread_position_in_grid]])").unwrap();
    writeln!(out, "{{").unwrap();
    writeln!(out, "    const uint base = gid / {n}u * {n}u;").unwrap();
    writeln!(out, "    const uint e = gid % {n}u;").unwrap();
    writeln!(out, "    const uint r = e / {cols}u;").unwrap();
    writeln!(out, "    const uint c = e % {cols}u;").unwrap();
    if twiddle {
        writeln!(out, "    float cs;").unwrap();
        writeln!(
            out,
            "    const float sn = precise::sincos({} * float((r * c) % {n}u), cs);",
            float_lit(-2.0 * PI / n as f64)
        )
        .unwrap();
        writeln!(out, "    dst[base + c * {rows}u + r] = cmul(src[gid], float2(cs, sn));").unwrap();
    } else {
        writeln!(out, "    dst[base + c * {rows}u + r] = src[gid];").unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}
