use serde::{Deserialize, Serialize};

use super::{KernelSource, PlanDigest};
use crate::plan::{count_barriers, FftPlan};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub expected: String,
    pub found: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    fn push(&mut self, name: &str, expected: impl ToString, found: impl ToString) {
        let (expected, found) = (expected.to_string(), found.to_string());
        self.items.push(CheckItem { name: name.into(), passed: expected == found, expected, found });
    }
}

fn threadgroup_buffer_sizes(text: &str) -> Vec<usize> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix("threadgroup float2 "))
        .filter_map(|rest| {
            let open = rest.find('[')?;
            let close = rest.find(']')?;
            rest[open + 1..close].parse().ok()
        })
        .collect()
}

fn declared_threads(text: &str) -> Option<usize> {
    let key = "max_total_threads_per_threadgroup(";
    let start = text.find(key)? + key.len();
    let end = start + text[start..].find(')')?;
    text[start..end].parse().ok()
}

/// Reads an emitted kernel back and compares what it declares and does
/// against `plan`: barrier statements, stage blocks, threadgroup buffer
/// sizes, the thread limit and the recorded plan digest.
pub fn structural_check(kernel: &KernelSource, plan: &FftPlan) -> CheckReport {
    let text = &kernel.text;
    let mut report = CheckReport { items: Vec::new() };
    report.push("barriers", count_barriers(plan), text.matches("threadgroup_barrier(").count());
    let stages = text.lines().filter(|l| l.starts_with("    // stage ")).count();
    report.push("stage blocks", plan.stages.len(), stages);
    let sizes = threadgroup_buffer_sizes(text);
    report.push("threadgroup buffers", plan.threadgroup_buffers(), sizes.len());
    report.push("threadgroup buffer length", format!("{:?}", vec![plan.n; plan.threadgroup_buffers()]), format!("{sizes:?}"));
    report.push(
        "threads per threadgroup",
        plan.threads,
        declared_threads(text).map_or_else(|| "missing".to_string(), |t| t.to_string()),
    );
    let digest_ok = kernel.plan_digest.as_ref() == Some(&PlanDigest::of(plan));
    report.push("plan digest", true, digest_ok);
    report
}
