//! Acceptance checks, one PASS/FAIL line each. Exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rayon::prelude::*;

use stockfft_core::butterfly::{butterfly_radix8_splitradix, dft8_matrix, mma_complex_multiply, mma_flop_ratio, ComplexMatrix8};
use stockfft_core::cost::{estimate, rank_designs, reference_designs};
use stockfft_core::emit::{emit_kernel, emit_plan, structural_check};
use stockfft_core::oracle::{compare, naive_dft, random_samples};
use stockfft_core::plan::{count_barriers, make_plan, RadixPolicy};
use stockfft_core::planner::{
    max_local_fft, radix_profiles, select_radix, synthesize, synthesize_with, Decomposition, DecompositionKind,
    MemoryStrategy, SynthesisOptions,
};
use stockfft_core::{
    execute, execute_four_step, execute_inverse, four_step_split, twiddle, twiddle_chain, Complex32, HardwareModel,
    Real, Signal,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed.as_secs() < limit_secs, || format!("took {:.1} s, limit {limit_secs} s", elapsed.as_secs_f64()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut worst32, mut worst64) = (0.0f64, 0.0f64);
    for bits in 2..=12u32 {
        let n = 1usize << bits;
        let results: Vec<Result<(f64, f64), String>> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let seed = seed * 1000 + bits as u64;
                let x32 = Signal::new(random_samples::<f32>(n, seed)).unwrap();
                let x64 = Signal::new(random_samples::<f64>(n, seed)).unwrap();
                let (ref32, ref64) = (naive_dft(x32.as_slice()), naive_dft(x64.as_slice()));
                let (mut w32, mut w64) = (0.0f64, 0.0f64);
                for policy in [RadixPolicy::Prefer4, RadixPolicy::Prefer8] {
                    let plan = make_plan(n, policy).unwrap();
                    let e32 = compare(execute(&plan, &x32).unwrap().as_slice(), &ref32).unwrap().relative_l2;
                    let e64 = compare(execute(&plan, &x64).unwrap().as_slice(), &ref64).unwrap().relative_l2;
                    if e32 >= 1e-5 || e64 >= 1e-12 {
                        return Err(format!("n={n} {policy:?} seed={seed}: single {e32:.2e}, double {e64:.2e}"));
                    }
                    w32 = w32.max(e32);
                    w64 = w64.max(e64);
                }
                Ok((w32, w64))
            })
            .collect();
        for r in results {
            let (a, b) = r?;
            worst32 = worst32.max(a);
            worst64 = worst64.max(b);
        }
    }
    within_time(start.elapsed(), 60)?;
    Ok(format!(
        "N=4..4096, both policies, 20 signals: worst single {worst32:.2e}, double {worst64:.2e} ({:.1} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn four_step_equivalence() -> Outcome {
    let start = Instant::now();
    let hw = HardwareModel::apple_m1();
    let mut notes = Vec::new();
    for n in [8192usize, 16384, 32768] {
        let plan = synthesize(n, &hw).unwrap();
        let Decomposition::FourStep(fs) = &plan.plan else {
            return Err(format!("{n} was not planned as a four-step"));
        };
        let x64 = Signal::new(random_samples::<f64>(n, n as u64)).unwrap();
        let e64 = compare(execute_four_step(fs, &x64).unwrap().as_slice(), &naive_dft(x64.as_slice())).unwrap().relative_l2;
        let x32 = Signal::new(random_samples::<f32>(n, n as u64 + 1)).unwrap();
        let direct = execute(&make_plan(n, RadixPolicy::Prefer8).unwrap(), &x32).unwrap();
        let e32 = compare(execute_four_step(fs, &x32).unwrap().as_slice(), direct.as_slice()).unwrap().relative_l2;
        ensure(e64 < 1e-12 && e32 < 1e-5, || format!("n={n}: double vs oracle {e64:.2e}, single vs direct {e32:.2e}"))?;
        notes.push(format!("{n}: {e64:.1e}/{e32:.1e}"));
    }
    within_time(start.elapsed(), 120)?;
    Ok(format!("{} ({:.1} s)", notes.join(", "), start.elapsed().as_secs_f64()))
}

fn planner_constants() -> Outcome {
    let hw = HardwareModel::apple_m1();
    let local = |eb, s| max_local_fft(&hw, eb, s).unwrap();
    ensure(local(8, MemoryStrategy::RegisterTiled) == 4096, || "register-tiled limit".into())?;
    ensure(local(8, MemoryStrategy::DoubleBuffered) == 2048, || "double-buffered limit".into())?;
    ensure(local(8, MemoryStrategy::RegisterResident) == 8192, || "register-resident limit".into())?;
    ensure(four_step_split(8192, 4096).unwrap() == (2, 4096), || "split of 8192".into())?;
    ensure(four_step_split(16384, 4096).unwrap() == (4, 4096), || "split of 16384".into())?;
    let opts = SynthesisOptions { radix_override: Some(RadixPolicy::Prefer4), ..Default::default() };
    for (n, threads, stages, kib) in [(256, 64, 4, 2), (512, 128, 5, 4), (1024, 256, 5, 8), (2048, 512, 6, 16), (4096, 1024, 6, 32)] {
        for plan in [make_plan(n, RadixPolicy::Prefer4).unwrap(), synthesize_with(n, &hw, &opts).unwrap().local_plan().clone()] {
            ensure(
                plan.threads == threads && plan.stages.len() == stages && plan.threadgroup_bytes == kib * 1024,
                || format!("n={n}: {} threads, {} stages, {} B", plan.threads, plan.stages.len(), plan.threadgroup_bytes),
            )?;
        }
        ensure(synthesize(n, &hw).unwrap().kind == DecompositionKind::SingleThreadgroup, || format!("{n} not single"))?;
    }
    let sel = select_radix(&hw, &radix_profiles()).unwrap();
    ensure(sel.profile.radix == 8 && !sel.degraded, || format!("selected radix {}", sel.profile.radix))?;
    Ok("B_max 4096/2048/8192, splits (2,4096) (4,4096), five table sizes, radix 8 at 128 GPRs".into())
}

fn barrier_accounting() -> Outcome {
    let r8 = count_barriers(&make_plan(4096, RadixPolicy::Prefer8).unwrap());
    let r4 = count_barriers(&make_plan(4096, RadixPolicy::Prefer4).unwrap());
    ensure(r8 == 6 && r4 == 10, || format!("radix-8 {r8}, radix-4 {r4}"))?;
    Ok(format!("radix-8 N=4096: {r8}, radix-4 N=4096: {r4}"))
}

fn butterfly_identities() -> Outcome {
    let f = dft8_matrix::<f32>();
    let (f_re, f_im) = f.split();
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let x: [Complex32; 8] = random_samples::<f32>(8, seed).try_into().unwrap();
        let e = compare(&butterfly_radix8_splitradix(x), &f.mul_vec(&x)).unwrap().relative_l2;
        ensure(e < 1e-5, || format!("radix-8 vs F8, seed {seed}: {e:.2e}"))?;
        worst = worst.max(e);
    }
    for seed in 0..125u64 {
        let cols: [[Complex32; 8]; 8] =
            std::array::from_fn(|c| random_samples::<f32>(8, seed * 8 + c as u64).try_into().unwrap());
        let x = ComplexMatrix8::from_columns(&cols);
        let (x_re, x_im) = x.split();
        let (y_re, y_im) = mma_complex_multiply(&f_re, &f_im, &x_re, &x_im);
        let y = ComplexMatrix8::join(&y_re, &y_im);
        for (c, col) in cols.iter().enumerate() {
            let e = compare(&y.column(c), &f.mul_vec(col)).unwrap().relative_l2;
            ensure(e < 1e-5, || format!("MMA column {c}, seed {seed}: {e:.2e}"))?;
            worst = worst.max(e);
        }
    }
    let ratio = mma_flop_ratio();
    ensure((3.0..=4.0).contains(&ratio), || format!("MMA FLOP ratio {ratio:.3}"))?;
    Ok(format!("worst error {worst:.2e} over 1000 vectors, MMA FLOP ratio {ratio:.3}"))
}

fn cost_ordering() -> Outcome {
    let hw = HardwareModel::apple_m1();
    let designs = reference_designs(4096, &hw).unwrap();
    let ranked = rank_designs(&designs, &hw, 256);
    let names: Vec<&str> = ranked.iter().map(|(d, _)| d.rationale[0].as_str()).collect();
    ensure(names[0] == "radix-8 Stockham" && names[2].starts_with("SIMD-shuffle"), || format!("ranking {names:?}"))?;
    let gflops = |n: usize| estimate(&synthesize(n, &hw).unwrap(), &hw, 256).gflops_predicted;
    let series: Vec<f64> = [256, 512, 1024, 2048, 4096].into_iter().map(gflops).collect();
    ensure(series.windows(2).all(|w| w[1] >= w[0]), || format!("GFLOPS not non-decreasing: {series:.1?}"))?;
    let at_8192 = gflops(8192);
    ensure(at_8192 < series[4], || format!("8192 at {at_8192:.1} does not drop below {:.1}", series[4]))?;
    Ok(format!("radix8 > radix4 > shuffle; GFLOPS {series:.0?} then {at_8192:.0} at 8192"))
}

fn emitter_structure() -> Outcome {
    let hw = HardwareModel::apple_m1();
    for bits in 8..=12 {
        let plan = synthesize(1 << bits, &hw).unwrap();
        let k = emit_kernel(plan.local_plan()).map_err(|e| e.to_string())?;
        let report = structural_check(&k, plan.local_plan());
        ensure(report.passed(), || format!("n={}: {:?}", 1 << bits, report.failures().collect::<Vec<_>>()))?;
    }
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let opts = SynthesisOptions { radix_override: Some(RadixPolicy::Prefer4), ..Default::default() };
    let mut files = 0;
    for n in [256usize, 512, 1024, 2048, 4096] {
        let plan = synthesize_with(n, &hw, &opts).unwrap();
        for _ in 0..2 {
            let bundle = emit_plan(&plan).map_err(|e| e.to_string())?;
            let k = &bundle.kernels[0];
            let committed = std::fs::read_to_string(golden.join(k.file_name())).map_err(|e| e.to_string())?;
            ensure(committed == k.text, || format!("{} differs from its golden file", k.file_name()))?;
        }
        files += 1;
    }
    let plan = make_plan(4096, RadixPolicy::Prefer8).unwrap();
    let k = emit_kernel(&plan).unwrap();
    let mut broken = k.clone();
    broken.text = k.text.replacen("    threadgroup_barrier(mem_flags::mem_threadgroup);\n", "", 1);
    ensure(!structural_check(&broken, &plan).passed(), || "missing barrier went unnoticed".into())?;
    broken.text = k.text.replace("buf[4096]", "buf[4095]");
    ensure(!structural_check(&broken, &plan).passed(), || "wrong buffer size went unnoticed".into())?;
    ensure(!structural_check(&k, &make_plan(2048, RadixPolicy::Prefer8).unwrap()).passed(), || "wrong plan accepted".into())?;
    Ok(format!("N=256..4096 pass, {files} golden files stable, corrupted sources rejected"))
}

fn run<T: std::fmt::Debug>(name: &str, r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn property_suite() -> Outcome {
    let cases = 128;
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    run(
        "parseval",
        runner.run(&(1u32..=12, any::<u64>()), |(bits, seed)| {
            let n = 1usize << bits;
            let x = Signal::new(random_samples::<f32>(n, seed)).unwrap();
            let y = execute(&make_plan(n, RadixPolicy::Prefer8).unwrap(), &x).unwrap();
            prop_assert!((y.energy() / (n as f64 * x.energy()) - 1.0).abs() < 1e-4);
            Ok(())
        }),
    )?;
    run(
        "linearity",
        runner.run(&(1u32..=12, any::<u64>(), -1.0f32..1.0, -1.0f32..1.0), |(bits, seed, a, b)| {
            let n = 1usize << bits;
            let plan = make_plan(n, RadixPolicy::Prefer4).unwrap();
            let (a, b) = (Complex32::new(a, b), Complex32::new(b, -a));
            let x = random_samples::<f32>(n, seed);
            let y = random_samples::<f32>(n, !seed);
            let mix: Vec<_> = x.iter().zip(&y).map(|(p, q)| a * *p + b * *q).collect();
            let lhs = execute(&plan, &Signal::new(mix).unwrap()).unwrap();
            let (fx, fy) = (execute(&plan, &Signal::new(x).unwrap()).unwrap(), execute(&plan, &Signal::new(y).unwrap()).unwrap());
            let rhs: Vec<_> = fx.as_slice().iter().zip(fy.as_slice()).map(|(p, q)| a * *p + b * *q).collect();
            prop_assert!(compare(lhs.as_slice(), &rhs).unwrap().relative_l2 < 1e-5);
            Ok(())
        }),
    )?;
    run(
        "round trip",
        runner.run(&(1u32..=12, any::<u64>()), |(bits, seed)| {
            let n = 1usize << bits;
            let plan = make_plan(n, RadixPolicy::Prefer8).unwrap();
            let x = Signal::new(random_samples::<f32>(n, seed)).unwrap();
            let back = execute_inverse(&plan, &execute(&plan, &x).unwrap()).unwrap();
            prop_assert!(compare(back.as_slice(), x.as_slice()).unwrap().relative_l2 < 1e-5);
            Ok(())
        }),
    )?;
    run(
        "twiddle modulus",
        runner.run(&(1usize..=65536, 0.0f64..1.0), |(n, frac)| {
            let k = (n as f64 * frac) as i64;
            let w = twiddle::<f32>(n, k).unwrap().to_f64();
            prop_assert!((w.abs() - 1.0).abs() < 4.0 * f32::EPSILON as f64);
            Ok(())
        }),
    )?;
    run(
        "twiddle chain",
        runner.run(&(1u32..=16, 0.0f64..1.0, 1usize..=64), |(bits, frac, count)| {
            let n = 1usize << bits;
            let k = (n as f64 * frac) as i64;
            let chain = twiddle_chain(twiddle::<f32>(n, k).unwrap(), count);
            for (j, w) in chain.iter().enumerate() {
                let exact = twiddle::<f64>(n, k * (j as i64 + 1)).unwrap();
                let err = (w.to_f64().re - exact.re).abs().max((w.to_f64().im - exact.im).abs());
                prop_assert!(err <= count as f64 * 4.0 * <f32 as Real>::EPSILON as f64);
            }
            Ok(())
        }),
    )?;
    Ok(format!("Parseval, linearity, round trip, twiddle modulus, chain bound: {cases} cases each"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 oracle equivalence", oracle_equivalence),
        ("AC2 four-step equivalence", four_step_equivalence),
        ("AC3 planner constants", planner_constants),
        ("AC4 barrier accounting", barrier_accounting),
        ("AC5 butterfly identities", butterfly_identities),
        ("AC6 cost-model ordering", cost_ordering),
        ("AC7 emitter structure", emitter_structure),
        ("AC8 property suite", property_suite),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
